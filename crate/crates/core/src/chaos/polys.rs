//! The chaos polynomials `P̃_q`, `P_q`, the quotients `R_q = P_q/(x+z)²`, and
//! fast double-double evaluators for `R_q`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, Zero};

use super::coeffs::{a_coeff, b_coeff, c_coeff, factorial, to_f64, Rational, Q_MAX};
use super::poly::{pascal, TrivariatePoly};
use crate::dd::Dd;
use crate::error::{Error, Result};

fn check_q(q: u32) -> Result<()> {
    if q == 0 || q > Q_MAX {
        return Err(Error::SizeGuard(format!("chaos order q must lie in 1..={Q_MAX}, got {q}")));
    }
    Ok(())
}

/// `P̃_q = Σ_{l₁,l₂} a_q(l₁)a_q(l₂) Σ_n b_q(l₁,l₂,n) x^{2(q−l₁−l₂)+n} y^{2(l₁+l₂−n)} z^n`.
///
/// Every summand is an integer over the common denominator `(2q)!·L²` with
/// `L = lcm_l |2l − 1|`, since `a_q(l₁)a_q(l₂)b_q = u(l₁)u(l₂)·mult/((2l₁−1)(2l₂−1)(2q)!)`
/// where `u(l) = (2q−2l)!(2l)!/(l!(q−l)!)` and `mult` is the multinomial coefficient
/// of the four pairing classes. The sums are therefore carried out in integers.
pub fn poly_p_tilde(q: u32) -> Result<TrivariatePoly> {
    check_q(q)?;
    let qi = q as i64;
    let binom = pascal(2 * q as usize);
    let c = |n: i64, k: i64| &binom[n as usize][k as usize];
    let odd: Vec<i64> = (0..=qi).map(|l| 2 * l - 1).collect();
    let lcm = odd.iter().fold(BigInt::from(1u32), |acc, &v| acc.lcm(&BigInt::from(v.abs())));
    // w(l) = u(l)·L/(2l − 1) = C(2q−2l, q−l)(q−l)!·C(2l, l)l!·L/(2l−1)
    let w: Vec<BigInt> = (0..=qi)
        .map(|l| {
            let u = c(2 * qi - 2 * l, qi - l) * factorial((qi - l) as u32) * c(2 * l, l) * factorial(l as u32);
            u * &lcm / BigInt::from(odd[l as usize])
        })
        .collect();
    let mut acc: HashMap<(u32, u32, u32), BigInt> = HashMap::new();
    for l1 in 0..=qi {
        for l2 in 0..=qi {
            let ww = &w[l1 as usize] * &w[l2 as usize];
            let lo = 0.max(2 * (l1 + l2 - qi));
            let hi = (2 * l1).min(2 * l2);
            for n in lo..=hi {
                let mult = c(2 * qi, n) * c(2 * qi - n, 2 * l1 - n) * c(2 * qi - 2 * l1, 2 * l2 - n);
                let m = ((2 * (qi - l1 - l2) + n) as u32, (2 * (l1 + l2 - n)) as u32, n as u32);
                *acc.entry(m).or_default() += &ww * mult;
            }
        }
    }
    let den = factorial(2 * q) * &lcm * &lcm;
    let mut p = TrivariatePoly::zero();
    for (m, num) in acc {
        p.add_term(m, Rational::new(num, den.clone()));
    }
    Ok(p)
}

/// Term-by-term rational construction of `P̃_q`, kept as an independent reference.
pub fn poly_p_tilde_reference(q: u32) -> Result<TrivariatePoly> {
    check_q(q)?;
    let qi = q as i64;
    let mut p = TrivariatePoly::zero();
    for l1 in 0..=qi {
        for l2 in 0..=qi {
            let a = a_coeff(q, l1) * a_coeff(q, l2);
            if a.is_zero() {
                continue;
            }
            let lo = 0.max(2 * (l1 + l2 - qi));
            let hi = (2 * l1).min(2 * l2);
            for n in lo..=hi {
                let c = &a * b_coeff(q, l1, l2, n);
                let m = ((2 * (qi - l1 - l2) + n) as u32, (2 * (l1 + l2 - n)) as u32, n as u32);
                p.add_term(m, c);
            }
        }
    }
    Ok(p)
}

/// The correction `c_q(x^{2q−1}z + (2q−1)x^{2q−2}y²)`.
pub fn correction(q: u32) -> TrivariatePoly {
    let c = c_coeff(q);
    let mut p = TrivariatePoly::zero();
    p.add_term((2 * q - 1, 0, 1), c.clone());
    p.add_term((2 * q - 2, 2, 0), c * Rational::from_integer(BigInt::from(2 * q - 1)));
    p
}

/// `P_q = P̃_q + c_q(x^{2q−1}z + (2q−1)x^{2q−2}y²)`.
pub fn poly_p(q: u32) -> Result<TrivariatePoly> {
    Ok(poly_p_tilde(q)?.add(&correction(q)))
}

/// `R_q = P_q/(x + z)²`; a nonzero remainder is an identity violation.
pub fn quotient_r(q: u32) -> Result<TrivariatePoly> {
    Ok(chaos_polys(q)?.r.clone())
}

fn compute_quotient(q: u32, p: &TrivariatePoly) -> Result<TrivariatePoly> {
    let (quo, rem) = p.divide_by_x_plus_z_sq();
    if !rem.is_zero() {
        return Err(Error::IdentityViolation(format!("P_{q} is not divisible by (x+z)^2: remainder {rem}")));
    }
    Ok(quo)
}

/// Exact polynomials of one chaos order together with a fast evaluator for `R_q`.
#[derive(Debug)]
pub struct ChaosPolys {
    pub q: u32,
    pub p_tilde: TrivariatePoly,
    pub p: TrivariatePoly,
    pub r: TrivariatePoly,
    pub r_eval: DdPoly,
}

/// Cached exact polynomials for order `q`.
pub fn chaos_polys(q: u32) -> Result<Arc<ChaosPolys>> {
    check_q(q)?;
    static CACHE: OnceLock<Mutex<Vec<Option<Arc<ChaosPolys>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(vec![None; Q_MAX as usize + 1]));
    if let Some(hit) = cache.lock().expect("cache lock").get(q as usize).cloned().flatten() {
        return Ok(hit);
    }
    let p_tilde = poly_p_tilde(q)?;
    let p = p_tilde.add(&correction(q));
    let r = compute_quotient(q, &p)?;
    let r_eval = DdPoly::new(&r);
    let entry = Arc::new(ChaosPolys { q, p_tilde, p, r, r_eval });
    cache.lock().expect("cache lock")[q as usize] = Some(entry.clone());
    Ok(entry)
}

fn to_dd(c: &Rational) -> Dd {
    let hi = to_f64(c);
    let rest = c - Rational::from_f64(hi).unwrap_or_else(Rational::zero);
    Dd::new(hi, to_f64(&rest))
}

/// Double-double evaluator of a polynomial that is even in `y`, organised as
/// `Σ_j (y²)^j Σ_i c_{ij} x^i z^{k}`.
#[derive(Debug, Clone)]
pub struct DdPoly {
    /// `(i, j/2, k, coefficient)` with terms sorted by `j`.
    terms: Vec<(usize, usize, usize, Dd)>,
    max_x: usize,
    max_y2: usize,
    max_z: usize,
    abs_sum: f64,
}

/// Powers of one evaluation point, shared between the orders evaluated there.
#[derive(Debug, Clone)]
pub struct DdPowers {
    x: Vec<Dd>,
    y2: Vec<Dd>,
    z: Vec<Dd>,
}

impl DdPowers {
    pub fn new(x: Dd, y: Dd, z: Dd, max_deg: usize) -> Self {
        let pows = |b: Dd, n: usize| {
            let mut v = Vec::with_capacity(n + 1);
            v.push(Dd::ONE);
            for i in 1..=n {
                let prev = v[i - 1];
                v.push(prev * b);
            }
            v
        };
        DdPowers {
            x: pows(x, max_deg),
            y2: pows(y * y, max_deg / 2 + 1),
            z: pows(z, max_deg),
        }
    }
}

impl DdPoly {
    pub fn new(p: &TrivariatePoly) -> Self {
        assert!(p.is_even_in_y(), "evaluator requires even powers of y");
        let mut terms: Vec<(usize, usize, usize, Dd)> = p.terms().map(|(&(i, j, k), c)| (i as usize, j as usize / 2, k as usize, to_dd(c))).collect();
        terms.sort_by_key(|t| (t.1, t.0, t.2));
        let max_x = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let max_y2 = terms.iter().map(|t| t.1).max().unwrap_or(0);
        let max_z = terms.iter().map(|t| t.2).max().unwrap_or(0);
        let abs_sum = terms.iter().map(|t| t.3.hi.abs()).sum();
        DdPoly { terms, max_x, max_y2, max_z, abs_sum }
    }

    /// Value at the point whose powers are given.
    pub fn eval(&self, pw: &DdPowers) -> Dd {
        debug_assert!(pw.x.len() > self.max_x && pw.y2.len() > self.max_y2 && pw.z.len() > self.max_z);
        let mut total = Dd::ZERO;
        let mut group = Dd::ZERO;
        let mut cur = usize::MAX;
        for &(i, j, k, c) in &self.terms {
            if j != cur {
                if cur != usize::MAX {
                    total = total + group * pw.y2[cur];
                }
                group = Dd::ZERO;
                cur = j;
            }
            group = group + c * pw.x[i] * pw.z[k];
        }
        if cur != usize::MAX {
            total = total + group * pw.y2[cur];
        }
        total
    }

    /// Value at `(x, y, z)` in double-double.
    pub fn eval_point(&self, x: f64, y: f64, z: f64) -> Dd {
        let d = self.max_x.max(self.max_z).max(2 * self.max_y2);
        self.eval(&DdPowers::new(Dd::from_f64(x), Dd::from_f64(y), Dd::from_f64(z), d))
    }

    /// `Σ |c_ijk| |x|^i |y|^j |z|^k`, the condition scale of an evaluation.
    pub fn abs_eval(&self, x: f64, y: f64, z: f64) -> f64 {
        let (x, y2, z) = (x.abs(), y * y, z.abs());
        self.terms.iter().map(|&(i, j, k, c)| c.hi.abs() * x.powi(i as i32) * y2.powi(j as i32) * z.powi(k as i32)).sum()
    }

    /// Sum of absolute coefficients.
    pub fn abs_coeff_sum(&self) -> f64 {
        self.abs_sum
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Evaluates `R_1, …, R_qmax` at one point in double-double and returns them as `f64`.
pub fn eval_r_range(qmax: u32, x: f64, y: f64, z: f64) -> Result<Vec<f64>> {
    let polys: Vec<Arc<ChaosPolys>> = (1..=qmax).map(chaos_polys).collect::<Result<_>>()?;
    let pw = DdPowers::new(Dd::from_f64(x), Dd::from_f64(y), Dd::from_f64(z), 2 * qmax as usize);
    Ok(polys.iter().map(|p| p.r_eval.eval(&pw).to_f64()).collect())
}

/// Double-double evaluators for `R_1..=R_qmax`, built once and reused across nodes.
#[derive(Debug, Clone)]
pub struct RTable {
    polys: Vec<Arc<ChaosPolys>>,
}

impl RTable {
    pub fn new(qmax: u32) -> Result<Self> {
        Ok(RTable {
            polys: (1..=qmax).map(chaos_polys).collect::<Result<_>>()?,
        })
    }

    pub fn qmax(&self) -> u32 {
        self.polys.len() as u32
    }

    /// Writes `R_q(x, y, z)` for `q = 1..=qmax` into `out`.
    pub fn eval_into(&self, x: f64, y: f64, z: f64, out: &mut [f64]) {
        let pw = DdPowers::new(Dd::from_f64(x), Dd::from_f64(y), Dd::from_f64(z), 2 * self.polys.len());
        for (o, p) in out.iter_mut().zip(&self.polys) {
            *o = p.r_eval.eval(&pw).to_f64();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    #[test]
    fn integer_construction_matches_reference() {
        for q in 1..=8 {
            assert_eq!(poly_p_tilde(q).unwrap(), poly_p_tilde_reference(q).unwrap(), "q = {q}");
        }
    }

    #[test]
    fn first_polynomial() {
        let p1 = poly_p(1).unwrap();
        assert_eq!(p1, TrivariatePoly::x_plus_z_sq().scale(&r(2)));
        let pt = poly_p_tilde(1).unwrap();
        let mut corr = TrivariatePoly::zero();
        corr.add_term((1, 0, 1), r(4));
        corr.add_term((0, 2, 0), r(4));
        assert_eq!(pt, p1.sub(&corr));
        assert_eq!(quotient_r(1).unwrap(), TrivariatePoly::constant(r(2)));
    }

    #[test]
    fn dd_evaluator_matches_exact() {
        let q = 6;
        let p = chaos_polys(q).unwrap();
        let (x, y, z) = (0.375, -0.25, -0.5);
        let exact = p.r.eval_rational(&Rational::from_f64(x).unwrap(), &Rational::from_f64(y).unwrap(), &Rational::from_f64(z).unwrap());
        let v = p.r_eval.eval_point(x, y, z).to_f64();
        assert!((v - to_f64(&exact)).abs() <= 1e-15 * to_f64(&exact).abs().max(1.0));
    }
}
