//! Bernoulli convolutions: spectral measures of `Π cos(α_n t)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation threshold on `Σ_{n>n*} α_n²`.
pub const TAIL_SQ_THRESHOLD: f64 = 1e-24;

/// Rule generating the decreasing sequence `α_n`, `n ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum BernoulliRule {
    /// `α_n = a^n`.
    Geometric { a: f64 },
    /// `α_n = 1/n!`.
    Factorial,
    /// Explicit prefix followed by a geometric tail `α_{n+1} = ratio · α_n`.
    Explicit { prefix: Vec<f64>, ratio: f64 },
}

impl BernoulliRule {
    /// `α_n` for `n ≥ 1`.
    pub fn alpha(&self, n: usize) -> f64 {
        assert!(n >= 1, "sequence is indexed from 1");
        match self {
            BernoulliRule::Geometric { a } => a.powi(n as i32),
            BernoulliRule::Factorial => {
                let mut v = 1.0;
                for k in 2..=n {
                    v /= k as f64;
                }
                v
            }
            BernoulliRule::Explicit { prefix, ratio } => {
                if n <= prefix.len() {
                    prefix[n - 1]
                } else {
                    prefix[prefix.len() - 1] * ratio.powi((n - prefix.len()) as i32)
                }
            }
        }
    }

    /// Checks that the sequence is positive, strictly decreasing and square summable.
    pub fn validate(&self) -> Result<()> {
        match self {
            BernoulliRule::Geometric { a } => {
                if !(*a > 0.0 && *a < 1.0) {
                    return Err(Error::ParameterOutOfRange(format!("bernoulli ratio a must lie in (0,1), got {a}")));
                }
            }
            BernoulliRule::Factorial => {}
            BernoulliRule::Explicit { prefix, ratio } => {
                if prefix.is_empty() {
                    return Err(Error::InvalidMeasure("bernoulli prefix must be non-empty".into()));
                }
                if !(*ratio > 0.0 && *ratio < 1.0) {
                    return Err(Error::ParameterOutOfRange(format!("bernoulli tail ratio must lie in (0,1), got {ratio}")));
                }
                if prefix.iter().any(|a| !(*a > 0.0 && a.is_finite())) || prefix.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(Error::InvalidMeasure("bernoulli prefix must be positive and strictly decreasing".into()));
                }
            }
        }
        Ok(())
    }

    /// `Σ_{n>m} α_n²`, exact for the closed-form tails and summed otherwise.
    pub fn tail_sq(&self, m: usize) -> f64 {
        match self {
            BernoulliRule::Geometric { a } => a.powi(2 * (m as i32 + 1)) / (1.0 - a * a),
            BernoulliRule::Explicit { prefix, ratio } if m >= prefix.len() => {
                let next = self.alpha(m + 1);
                next * next / (1.0 - ratio * ratio)
            }
            _ => {
                let mut s = 0.0;
                let mut n = m + 1;
                loop {
                    let a = self.alpha(n);
                    let t = a * a;
                    s += t;
                    if t < 1e-40 * s.max(1e-300) || n > m + 400 {
                        break;
                    }
                    n += 1;
                }
                s
            }
        }
    }

    /// Tail sum `R_n = Σ_{i>n} α_i`.
    pub fn tail_sum(&self, m: usize) -> f64 {
        match self {
            BernoulliRule::Geometric { a } => a.powi(m as i32 + 1) / (1.0 - a),
            BernoulliRule::Explicit { prefix, ratio } if m >= prefix.len() => self.alpha(m + 1) / (1.0 - ratio),
            _ => {
                let mut s = 0.0;
                let mut n = m + 1;
                loop {
                    let a = self.alpha(n);
                    s += a;
                    if a < 1e-18 * s || n > m + 400 {
                        break;
                    }
                    n += 1;
                }
                s
            }
        }
    }

    /// Smallest `n*` with `Σ_{n>n*} α_n² < 10⁻²⁴`.
    pub fn truncation_index(&self) -> usize {
        let mut m = 1;
        while self.tail_sq(m) >= TAIL_SQ_THRESHOLD {
            m += 1;
        }
        m
    }

    /// `σ² = Σ α_n²`.
    pub fn second_moment(&self) -> f64 {
        self.tail_sq(0)
    }

    /// Short identifier.
    pub fn id(&self) -> String {
        match self {
            BernoulliRule::Geometric { a } => format!("bernoulli(a={a})"),
            BernoulliRule::Factorial => "bernoulli(factorial)".into(),
            BernoulliRule::Explicit { prefix, ratio } => format!("bernoulli(prefix={prefix:?},ratio={ratio})"),
        }
    }
}

/// Truncated product `Π_{n≤n*} cos(α_n t)` with its derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliProduct {
    pub alphas: Vec<f64>,
    pub tail_sq: f64,
}

impl BernoulliProduct {
    pub fn new(rule: &BernoulliRule) -> Self {
        let n = rule.truncation_index();
        BernoulliProduct {
            alphas: (1..=n).map(|k| rule.alpha(k)).collect(),
            tail_sq: rule.tail_sq(n),
        }
    }

    /// `(r, r′, r″)` of the truncated product, by multiplying second-order jets.
    pub fn jet(&self, t: f64) -> (f64, f64, f64) {
        let (mut v, mut d1, mut d2) = (1.0, 0.0, 0.0);
        for &a in &self.alphas {
            let (s, c) = (a * t).sin_cos();
            let (w, w1, w2) = (c, -a * s, -a * a * c);
            let nv = v * w;
            let n1 = d1 * w + v * w1;
            let n2 = d2 * w + 2.0 * d1 * w1 + v * w2;
            v = nv;
            d1 = n1;
            d2 = n2;
        }
        (v, d1, d2)
    }

    /// Bound `½ t² Σ_{n>n*} α_n²` on the truncation error of `r(t)`.
    pub fn truncation_bound(&self, t: f64) -> f64 {
        0.5 * t * t * self.tail_sq
    }

    /// Second moment of the truncated product's measure.
    pub fn second_moment(&self) -> f64 {
        self.alphas.iter().map(|a| a * a).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_one_third_moments_and_tails() {
        let r = BernoulliRule::Geometric { a: 1.0 / 3.0 };
        assert!((r.second_moment() - 0.125).abs() < 1e-15);
        for n in 0..10 {
            let exact = 3f64.powi(-(n as i32)) / 2.0;
            assert!((r.tail_sum(n) / exact - 1.0).abs() < 1e-13);
        }
        assert!(r.tail_sq(r.truncation_index()) < TAIL_SQ_THRESHOLD);
    }

    #[test]
    fn factorial_tail_is_e_minus_partial_sum() {
        let r = BernoulliRule::Factorial;
        assert!((r.tail_sum(1) - (std::f64::consts::E - 2.0)).abs() < 1e-14);
    }

    #[test]
    fn jet_matches_finite_differences() {
        let p = BernoulliProduct::new(&BernoulliRule::Geometric { a: 1.0 / 3.0 });
        let h = 1e-4;
        for &t in &[0.3, 2.0, 17.0] {
            let (_, d1, d2) = p.jet(t);
            let fd1 = (p.jet(t + h).0 - p.jet(t - h).0) / (2.0 * h);
            let fd2 = (p.jet(t + h).0 - 2.0 * p.jet(t).0 + p.jet(t - h).0) / (h * h);
            assert!((d1 - fd1).abs() < 1e-8);
            assert!((d2 - fd2).abs() < 1e-6);
        }
    }
}
