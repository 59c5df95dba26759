//! The full chaos series for `var N(T)` with truncation control.
//!
//! The series `σ²/π² Σ V_q/4^q` converges slowly near `t = 0`, where the
//! normalised point `(r, r′/σ, r″/σ²)` approaches the corner `(1, 0, −1)` of the
//! domain and `|R_q|/4^q` stops decaying. When `|r(t)| < 1` for every `t > 0`
//! the discarded orders are therefore resummed in closed form through the
//! generating function `Σ_{q≥1} P_q/4^q`, which is the Gaussian conditional
//! expectation `π²E|f′(0)f′(t)| | f(0)=f(t)=0 / (σ² p(0,0)) − 1` minus the
//! correction terms. The rigorous geometric bound on the discarded orders is
//! reported alongside.

use std::f64::consts::PI;
use std::time::Instant;

use serde::Serialize;

use super::integrals::{arccos_remainder, chaos_second_moment, time_options, DEFAULT_TOL};
use crate::chaos::coeffs::{to_f64, Q_MAX};
use crate::chaos::polys::RTable;
use crate::chaos::c_coeff;
use crate::error::{Error, Result};
use crate::quad::integrate_vec;
use crate::special::ln_gamma;
use crate::spectral::{phi, Kernel};

/// Hard cap on the number of chaos orders summed explicitly.
pub const Q_CAP: u32 = 40;

/// Target of the tol-driven order choice, relative to `V₁(T)`.
pub const TAIL_TARGET: f64 = 1e-6;

/// Window length and threshold of the `T₀` scan.
pub const T0_WINDOW: f64 = 20.0;
pub const T0_THRESHOLD: f64 = 0.99;

/// How many chaos orders to sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// Exactly this many orders.
    Fixed(u32),
    /// The fewest orders whose geometric tail bound is below `TAIL_TARGET · V₁(T)`, capped at `Q_CAP`.
    Tolerance,
}

/// Options of [`variance_chaos`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaosOptions {
    pub truncation: Truncation,
    /// Relative quadrature tolerance.
    pub tol: f64,
    /// Split point between the near-origin and far parts; scanned for when absent.
    pub t0: Option<f64>,
    /// Whether to add the closed-form sum of the discarded orders when available.
    pub resum: bool,
}

impl Default for ChaosOptions {
    fn default() -> Self {
        ChaosOptions {
            truncation: Truncation::Tolerance,
            tol: DEFAULT_TOL,
            t0: None,
            resum: true,
        }
    }
}

/// Result of the chaos evaluation of `var N(T)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceReport {
    pub kernel_id: String,
    #[serde(rename = "T")]
    pub t: f64,
    pub sigma2: f64,
    /// `I(T) = ∫₀^T (1 − t/T) μ̂(t)² dt`.
    pub key_integral: f64,
    /// `(q, V_q(T))` for `q = 1..=Q`.
    pub v_terms: Vec<(u32, f64)>,
    /// `σ²/π² V_q(T)/4^q` for `q = 1..=Q`.
    pub term_values: Vec<f64>,
    /// `E[N_q(T)²] = V_q + c_q/(qσ²)(1 − r(T)^{2q})` for `q = 1..=Q`.
    pub component_second_moments: Vec<f64>,
    /// `(arccos r(T)/π)(1 − arccos r(T)/π)`.
    pub remainder_arccos: f64,
    /// `σ²/π² Σ_{q≤Q} V_q/4^q` plus the arccos remainder.
    pub total_truncated: f64,
    /// `σ²/π² Σ_{q>Q} V_q/4^q` summed in closed form, when the kernel allows it.
    pub resummed_tail: Option<f64>,
    /// Best estimate of `var N(T)`.
    pub total: f64,
    /// `σ²/π² T I(T)`.
    pub lower_bound: f64,
    /// Geometric bound on the `[T₀, T]` part of the discarded orders (`∞` when unavailable).
    pub truncation_bound: f64,
    /// Crude bound on the `[0, T₀]` part of the discarded orders `Q < q ≤ 64`.
    pub near_origin_bound: f64,
    pub q_used: u32,
    pub t0: Option<f64>,
    /// `sup φ` over `[T₀, max(T, T₀ + 20)]`.
    pub phi_sup: Option<f64>,
    /// True when no `T₀` with `sup φ < 1` exists on the scanned range.
    pub tail_unbounded: bool,
    /// Quadrature error estimate on `total`.
    pub quadrature_error: f64,
    pub wall_ms: f64,
}

/// `Σ_{q≥1} P_q(x, y, z)/4^q` in closed form, valid for `|x| < 1`.
pub fn chaos_generating_function(x: f64, y: f64, z: f64) -> f64 {
    let om = (1.0 - x) * (1.0 + x);
    let y2 = y * y;
    let c11 = 1.0 - y2 / om;
    let c12 = -z - x * y2 / om;
    // E|Y₁Y₂| for a centred pair with variances c11 and correlation ρ.
    let e = if c11 > 0.0 {
        let rho = (c12 / c11).clamp(-1.0, 1.0);
        2.0 / PI * c11 * ((1.0 - rho * rho).sqrt() + rho * rho.asin())
    } else {
        0.0
    };
    let g = e / (2.0 * PI * om.sqrt());
    let corr = y2 / om + x.asin() * (z * om + x * y2) / (om * om.sqrt());
    PI * PI * g - 1.0 + corr
}

/// True when `|r(t)| < 1` for all `t > 0`, i.e. the measure has a density component.
pub fn resummation_available(kernel: &Kernel) -> bool {
    kernel.measure().map(|m| m.density.is_some()).unwrap_or(false)
}

/// Split point and `sup φ` beyond it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSplit {
    pub t0: f64,
    pub phi_sup: f64,
}

fn phi_grid_step(kernel: &Kernel) -> f64 {
    (PI / (16.0 * kernel.lambda_max())).min(0.05)
}

/// Smallest grid point `t ≤ T` at which `sup φ` over `[t, t + 20]` is below 0.99,
/// together with `sup φ` over `[t, max(T, t + 20)]`.
pub fn select_t0(kernel: &Kernel, t: f64) -> Option<TailSplit> {
    let h = phi_grid_step(kernel);
    let w = (T0_WINDOW / h).ceil() as usize;
    let n = (t / h).ceil() as usize;
    let vals: Vec<f64> = (0..=n + w).map(|i| phi(kernel, i as f64 * h)).collect();
    // next_bad[i] is the first index ≥ i with φ ≥ threshold.
    let mut next_bad = vec![usize::MAX; vals.len() + 1];
    for i in (0..vals.len()).rev() {
        next_bad[i] = if !(vals[i] < T0_THRESHOLD) { i } else { next_bad[i + 1] };
    }
    let i0 = (0..=n).find(|&i| next_bad[i] > i + w)?;
    let phi_sup = vals[i0..].iter().copied().fold(0.0, f64::max);
    Some(TailSplit { t0: i0 as f64 * h, phi_sup })
}

/// `sup φ` over `[t0, max(T, t0 + 20)]` on the scan grid.
pub fn phi_sup_from(kernel: &Kernel, t0: f64, t: f64) -> f64 {
    let h = phi_grid_step(kernel);
    let end = t.max(t0 + T0_WINDOW);
    let n = ((end - t0) / h).ceil() as usize;
    (0..=n).map(|i| phi(kernel, (t0 + i as f64 * h).min(end))).fold(0.0, f64::max)
}

/// `e²/(4√π) Σ_{q>Q} q^{3/2} M^{2q−2}`, the bound on `Σ_{q>Q}|V_q|/4^q` in units of `V₁`.
pub fn geometric_tail_factor(q: u32, m: f64) -> f64 {
    if !(m < 1.0) {
        return f64::INFINITY;
    }
    let c = std::f64::consts::E.powi(2) / (4.0 * PI.sqrt());
    let mut sum = 0.0;
    let mut k = q as f64 + 1.0;
    let m2 = m * m;
    let mut pow = m2.powf(k - 1.0);
    loop {
        let term = k.powf(1.5) * pow;
        sum += term;
        // Once the term ratio is below 1, the remaining sum is at most term·ratio/(1 − ratio).
        let ratio = ((k + 1.0) / k).powf(1.5) * m2;
        if ratio < 1.0 && term * ratio / (1.0 - ratio) <= 1e-16 * sum {
            break;
        }
        if pow == 0.0 {
            break;
        }
        k += 1.0;
        pow *= m2;
    }
    c * sum
}

/// Bound on `sup |P_q|` over the cube `[−1, 1]³`: the absolute coefficient sum of
/// `P̃_q` before cancellation plus that of the correction, `2q c_q`.
pub fn cube_sup_bound(q: u32) -> f64 {
    let qi = q as i64;
    let lf = |n: i64| ln_gamma(n as f64 + 1.0);
    let ln_a = |l: i64| -lf(l) - lf(qi - l) - ((2 * l - 1).abs() as f64).ln();
    let mut sum = 0.0;
    for l1 in 0..=qi {
        for l2 in 0..=qi {
            let head = ln_a(l1) + ln_a(l2) + lf(2 * qi - 2 * l1) + lf(2 * l1) + lf(2 * qi - 2 * l2) + lf(2 * l2);
            let lo = 0.max(2 * (l1 + l2 - qi));
            for n in lo..=(2 * l1).min(2 * l2) {
                sum += (head - lf(2 * qi - 2 * l1 - 2 * l2 + n) - lf(2 * l1 - n) - lf(2 * l2 - n) - lf(n)).exp();
            }
        }
    }
    sum + 2.0 * q as f64 * to_f64(&c_coeff(q))
}

/// `σ²/π² Σ_{Q<q≤64} 4^{−q} · 2T·T₀ · sup_cube |P_q|`.
pub fn near_origin_bound(sigma2: f64, t: f64, t0: f64, q: u32) -> f64 {
    let s: f64 = (q + 1..=Q_MAX).map(|k| cube_sup_bound(k) / 4f64.powi(k as i32)).sum();
    sigma2 / (PI * PI) * 2.0 * t * t0 * s
}

/// Evaluates `var N(T)` through the chaos series.
pub fn variance_chaos(kernel: &Kernel, t: f64, opts: &ChaosOptions) -> Result<VarianceReport> {
    let start = Instant::now();
    if kernel.is_degenerate() {
        return Err(Error::DegenerateKernel);
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!("horizon T must be positive and finite, got {t}")));
    }
    let split = match opts.t0 {
        Some(t0) => {
            if !(t0 >= 0.0) {
                return Err(Error::ParameterOutOfRange(format!("T0 must be nonnegative, got {t0}")));
            }
            let m = phi_sup_from(kernel, t0, t);
            (m < 1.0).then_some(TailSplit { t0, phi_sup: m })
        }
        None => select_t0(kernel, t),
    };
    let tail_unbounded = split.is_none();
    let q = match opts.truncation {
        Truncation::Fixed(q) => {
            if q == 0 || q > Q_MAX {
                return Err(Error::ParameterOutOfRange(format!("number of chaos orders must lie in 1..={Q_MAX}, got {q}")));
            }
            q
        }
        Truncation::Tolerance => match split {
            Some(s) => (1..=Q_CAP).find(|&q| geometric_tail_factor(q, s.phi_sup) < TAIL_TARGET).unwrap_or(Q_CAP),
            None => Q_CAP,
        },
    };
    let table = RTable::new(q)?;
    let sigma2 = kernel.sigma2();
    let resum = opts.resum && resummation_available(kernel);
    // Below t_min the closed form loses accuracy to cancellation in 1 − r², so the
    // tail integrand is frozen at its value there.
    let t_min = (1e-4 / kernel.sigma()).min(0.5 * t);
    let qn = q as usize;
    let tail_at = |s: f64, rq: &mut [f64]| -> f64 {
        let (x, y, z) = kernel.normalized(s);
        let m = kernel.mu_hat(s);
        table.eval_into(x, y, z, rq);
        let mut partial = 0.0;
        let mut w = 1.0;
        for v in rq.iter() {
            w *= 0.25;
            partial += w * m * m * v;
        }
        chaos_generating_function(x, y, z) - partial
    };
    let frozen = if resum { tail_at(t_min, &mut vec![0.0; qn]) } else { 0.0 };
    let dim = qn + usize::from(resum);
    let mut weights: Vec<f64> = (1..=q).map(|k| 0.25f64.powi(k as i32)).collect();
    if resum {
        weights.push(1.0);
    }
    let res = integrate_vec(
        |s, out: &mut [f64]| {
            let (x, y, z) = kernel.normalized(s);
            let m = kernel.mu_hat(s);
            let win = 1.0 - s / t;
            table.eval_into(x, y, z, &mut out[..qn]);
            let mut partial = 0.0;
            let mut w = 1.0;
            for v in out[..qn].iter_mut() {
                w *= 0.25;
                partial += w * m * m * *v;
                *v *= win * m * m;
            }
            if resum {
                out[qn] = win * if s < t_min { frozen } else { chaos_generating_function(x, y, z) - partial };
            }
        },
        dim,
        &weights,
        0.0,
        t,
        &[t_min],
        &time_options(kernel, opts.tol),
    )?;
    if res.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Unsupported("chaos integrand evaluated to a non-finite value".into()));
    }
    let scale = sigma2 / (PI * PI);
    let r_t = kernel.r(t);
    let v_terms: Vec<(u32, f64)> = (1..=q).map(|k| (k, 2.0 * t * res.values[k as usize - 1])).collect();
    let term_values: Vec<f64> = v_terms.iter().map(|&(k, v)| scale * v / 4f64.powi(k as i32)).collect();
    let component_second_moments = v_terms.iter().map(|&(k, v)| chaos_second_moment(v, k, sigma2, r_t)).collect();
    let remainder_arccos = arccos_remainder(r_t);
    let total_truncated = term_values.iter().sum::<f64>() + remainder_arccos;
    let resummed_tail = resum.then(|| scale * 2.0 * t * res.values[qn]);
    let total = total_truncated + resummed_tail.unwrap_or(0.0);
    let key = res.values[0] / 2.0;
    let v1 = 4.0 * t * key;
    let quadrature_error = scale * 2.0 * t * res.errors.iter().zip(&weights).map(|(e, w)| e * w).sum::<f64>();
    let (truncation_bound, near) = match split {
        Some(s) => (scale * v1 * geometric_tail_factor(q, s.phi_sup), near_origin_bound(sigma2, t, s.t0, q)),
        None => (f64::INFINITY, f64::INFINITY),
    };
    Ok(VarianceReport {
        kernel_id: kernel.id().to_string(),
        t,
        sigma2,
        key_integral: key,
        v_terms,
        term_values,
        component_second_moments,
        remainder_arccos,
        total_truncated,
        resummed_tail,
        total,
        lower_bound: scale * t * key,
        truncation_bound,
        near_origin_bound: near,
        q_used: q,
        t0: split.map(|s| s.t0),
        phi_sup: split.map(|s| s.phi_sup),
        tail_unbounded,
        quadrature_error,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::polys::chaos_polys;

    #[test]
    fn generating_function_matches_partial_sums_away_from_the_corner() {
        // A point of D well inside, where the series converges fast.
        let (x, y, z) = (0.3, -0.2, 0.1);
        let mut s = 0.0;
        for q in 1..=30 {
            let p = chaos_polys(q).unwrap();
            s += (x + z) * (x + z) * p.r_eval.eval_point(x, y, z).to_f64() / 4f64.powi(q as i32);
        }
        assert!((s - chaos_generating_function(x, y, z)).abs() < 1e-12, "{s}");
    }

    #[test]
    fn geometric_factor_is_monotone() {
        assert!(geometric_tail_factor(5, 0.5) > geometric_tail_factor(6, 0.5));
        assert_eq!(geometric_tail_factor(5, 1.0), f64::INFINITY);
    }

    #[test]
    fn cube_bound_dominates_coefficient_sum() {
        for q in 1..=6 {
            let p = chaos_polys(q).unwrap();
            let exact = to_f64(&p.p.abs_coeff_sum());
            assert!(cube_sup_bound(q) >= exact * (1.0 - 1e-12), "q={q}");
        }
    }
}
