//! Presets for the worked examples: the special atom at `σ`, Cantor-type
//! Bernoulli products and the cancellation density.

use serde::Serialize;

use super::integrals::key_integral;
use super::series::{phi_sup_from, select_t0};
use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_right_singular, QuadOptions};
use crate::spectral::density::cancellation_coefficients;
use crate::spectral::{BernoulliRule, CatalogSpec, Kernel};

/// `I_θ(T)/I(T)` for `r_θ = (1 − θ)r + θ cos(σt)` and the threshold `θ₀ = (1 − M)/(√2 − M)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecialAtom {
    pub ratio: f64,
    pub theta0: f64,
    /// `sup φ` of the base kernel beyond `T₀`, the `M` in `θ₀`.
    pub phi_sup: f64,
}

/// Scaling of the key integral under the special atom.
pub fn special_atom_scaling(kernel: &Kernel, theta: f64, t: f64, tol: f64) -> Result<SpecialAtom> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("theta must lie in (0, 1), got {theta}")));
    }
    let blended = kernel.with_special_atom(theta)?;
    let base = key_integral(kernel, t, tol)?;
    let with_atom = key_integral(&blended, t, tol)?;
    let m = match select_t0(kernel, t) {
        Some(s) => s.phi_sup,
        None => phi_sup_from(kernel, t, t),
    };
    Ok(SpecialAtom {
        ratio: with_atom / base,
        theta0: (1.0 - m) / (std::f64::consts::SQRT_2 - m),
        phi_sup: m,
    })
}

/// Growth data for a Bernoulli product in the Cantor regime `α_n > R_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CantorGrowth {
    /// `α_1, α_2, …` up to the truncation index.
    pub alphas: Vec<f64>,
    /// `R_n = Σ_{i>n} α_i` for `n = 0, 1, …`.
    pub tails: Vec<f64>,
    #[serde(rename = "T")]
    pub t: f64,
    /// `M_T` with `R_M < 1/T ≤ R_{M−1}`, or 0 when `1/T > R_0`.
    pub m_t: usize,
    /// `T²·2^{−M_T}`.
    pub predicted_scale: f64,
    /// `T·I(T)` from the truncated product kernel.
    pub t_key_integral: f64,
}

impl CantorGrowth {
    /// `T·I(T) / (T²·2^{−M_T})`.
    pub fn ratio(&self) -> f64 {
        self.t_key_integral / self.predicted_scale
    }
}

/// `M_T` with `R_M < 1/T ≤ R_{M−1}` for a strictly decreasing sequence `R_0, R_1, …`.
pub fn cantor_index(rule: &BernoulliRule, t: f64) -> usize {
    let inv = 1.0 / t;
    if rule.tail_sum(0) < inv {
        return 0;
    }
    let mut m = 1;
    while rule.tail_sum(m) >= inv {
        m += 1;
    }
    m
}

/// Computes `M_T`, the predicted scale and the numeric `T·I(T)`.
pub fn cantor_growth(rule: &BernoulliRule, t: f64, tol: f64) -> Result<CantorGrowth> {
    rule.validate()?;
    let kernel = Kernel::from_catalog(&CatalogSpec::Bernoulli(rule.clone()))?;
    let n = rule.truncation_index();
    let alphas: Vec<f64> = (1..=n).map(|k| rule.alpha(k)).collect();
    let tails: Vec<f64> = (0..=n).map(|k| rule.tail_sum(k)).collect();
    if let Some(k) = (1..=n).find(|&k| alphas[k - 1] <= tails[k]) {
        return Err(Error::ParameterOutOfRange(format!("sequence is not in the Cantor regime: alpha_{k} <= R_{k}")));
    }
    let m_t = cantor_index(rule, t);
    let i = key_integral(&kernel, t, tol)?;
    Ok(CantorGrowth {
        alphas,
        tails,
        t,
        m_t,
        predicted_scale: t * t * 0.5f64.powi(m_t as i32),
        t_key_integral: t * i,
    })
}

/// Numerical checks on the cancellation density `c₁(1 − |λ|)^{−α}` on `|λ| < 1`, `c₂` on `1 < |λ| < M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CancellationCheck {
    pub alpha: f64,
    pub m: f64,
    pub c1: f64,
    pub c2: f64,
    pub mass: f64,
    pub second_moment: f64,
    /// Cutoffs `ε`: the truncated integrals run over `|λ| < 1 − ε` on the singular piece.
    pub cutoffs: Vec<f64>,
    /// Truncated `∫ φ²`.
    pub phi_sq: Vec<f64>,
    /// Truncated `∫ λ⁴ φ²`.
    pub lambda4_phi_sq: Vec<f64>,
    /// Truncated `∫ (1 − λ²)² φ²`.
    pub mu_sq: Vec<f64>,
    /// `∫ (1 − λ²)² φ²` without cutoff.
    pub mu_sq_limit: f64,
}

/// Mass, second moment and the truncated square integrals of the cancellation density.
pub fn cancellation_check(alpha: f64, m: f64, cutoffs: &[f64]) -> Result<CancellationCheck> {
    if !(alpha > 0.5 && alpha < 1.0 && m > 1.0) {
        return Err(Error::ParameterOutOfRange(format!("need 1/2 < alpha < 1 and M > 1, got alpha={alpha}, M={m}")));
    }
    let (c1, c2) = cancellation_coefficients(alpha, m);
    let opts = QuadOptions::default().with_rel_tol(1e-13).with_abs_tol(1e-16);
    // Both sides of the origin contribute equally, hence the factors 2.
    let sing = |w: &dyn Fn(f64) -> f64, beta: f64| integrate_right_singular(|l| w(l), 0.0, 1.0, beta, &opts).map(|r| 2.0 * r.value);
    let flat = |w: &dyn Fn(f64) -> f64| integrate(|l| w(l), 1.0, m, &[], &opts).map(|r| 2.0 * r.value);
    let mass = c1 * sing(&|_| 1.0, alpha)? + c2 * flat(&|_| 1.0)?;
    let second_moment = c1 * sing(&|l| l * l, alpha)? + c2 * flat(&|l| l * l)?;
    let truncated = |w: &dyn Fn(f64) -> f64, eps: f64| -> Result<f64> {
        // With 1 − λ = e^s the piece over [0, 1 − ε] becomes smooth on [ln ε, 0].
        let inner = integrate(|s| w(1.0 - s.exp()) * c1 * c1 * (s * (1.0 - 2.0 * alpha)).exp(), eps.ln(), 0.0, &[], &opts)?;
        Ok(2.0 * inner.value + c2 * c2 * flat(w)?)
    };
    let mut phi_sq = Vec::new();
    let mut lambda4_phi_sq = Vec::new();
    let mut mu_sq = Vec::new();
    for &eps in cutoffs {
        phi_sq.push(truncated(&|_| 1.0, eps)?);
        lambda4_phi_sq.push(truncated(&|l| l.powi(4), eps)?);
        mu_sq.push(truncated(&|l| (1.0 - l * l).powi(2), eps)?);
    }
    // (1 − λ²)² = (1 − λ)²(1 + λ)² turns the singular exponent into 2α − 2 < 0.
    let mu_sq_limit = c1 * c1 * sing(&|l| (1.0 + l).powi(2), 2.0 * alpha - 2.0)? + c2 * c2 * flat(&|l| (1.0 - l * l).powi(2))?;
    Ok(CancellationCheck {
        alpha,
        m,
        c1,
        c2,
        mass,
        second_moment,
        cutoffs: cutoffs.to_vec(),
        phi_sq,
        lambda4_phi_sq,
        mu_sq,
        mu_sq_limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_index_brackets() {
        let rule = BernoulliRule::Geometric { a: 1.0 / 3.0 };
        for t in [3.0, 10.0, 100.0, 1000.0] {
            let m = cantor_index(&rule, t);
            assert!(rule.tail_sum(m) < 1.0 / t);
            assert!(m == 0 || rule.tail_sum(m - 1) >= 1.0 / t);
        }
        assert_eq!(cantor_index(&rule, 1.0), 0);
    }

    #[test]
    fn cancellation_moments() {
        let c = cancellation_check(0.75, 2.0, &[1e-2, 1e-3]).unwrap();
        assert!((c.mass - 1.0).abs() < 1e-10);
        assert!((c.second_moment - 1.0).abs() < 1e-10);
        assert!(c.phi_sq[1] > c.phi_sq[0]);
    }
}
