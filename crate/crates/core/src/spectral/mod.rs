//! Spectral measures, covariance kernels and the derived functions `μ̂` and `φ`.

pub mod bernoulli;
pub mod density;
pub mod kernel;
pub mod measure;
pub mod spec;

pub use bernoulli::{BernoulliProduct, BernoulliRule};
pub use density::Density;
pub use kernel::{kernel_from_catalog, kernel_from_measure, Jet, Kernel};
pub use measure::SpectralMeasure;
pub use spec::{CatalogSpec, KernelSpec};

use crate::error::{Error, Result};
use crate::quad::QuadOptions;

/// Mean number of zeros on `[0, T]`, `σT/π`.
pub fn kac_rice_mean(kernel: &Kernel, t: f64) -> f64 {
    kernel.sigma() * t / std::f64::consts::PI
}

/// `μ̂(t) = r(t) + r″(t)/σ²`.
pub fn mu_hat(kernel: &Kernel, t: f64) -> f64 {
    kernel.mu_hat(t)
}

/// `φ(t) = max{|r| + |r′|/σ, |r′|/σ + |r″|/σ²}`.
pub fn phi(kernel: &Kernel, t: f64) -> f64 {
    let (x, y, z) = kernel.normalized(t);
    (x.abs() + y.abs()).max(y.abs() + z.abs())
}

/// Supremum of `φ` over the grid `t0, t0 + step, …, horizon`.
///
/// This is a grid estimate of `limsup φ`, used to choose the constant `M` that
/// controls the geometric decay of the chaos tail.
pub fn phi_sup_tail(kernel: &Kernel, t0: f64, horizon: f64, step: f64) -> f64 {
    assert!(t0 < horizon && step > 0.0, "need t0 < horizon and a positive step");
    let n = ((horizon - t0) / step).ceil() as usize;
    (0..=n).map(|i| phi(kernel, (t0 + i as f64 * step).min(horizon))).fold(0.0, f64::max)
}

/// Number of leading signs enumerated exactly for Bernoulli log-moments.
const BERNOULLI_ENUM_DEPTH: usize = 16;

/// Log-moment `∫ log(1 + |λ|) λ² dρ(λ)`.
pub fn geman_log_moment(measure: &SpectralMeasure) -> Result<f64> {
    measure.validate()?;
    let g = |l: f64| l * l * l.abs().ln_1p();
    let mut total: f64 = measure.atoms.iter().map(|&(a, w)| w * g(a)).sum();
    if let Some(d) = &measure.density {
        let opts = QuadOptions::default().with_rel_tol(1e-10).with_max_evals(2_000_000);
        // log(1 + λ) ≤ √λ, so the integrand is dominated by λ^{5/2} p(λ).
        let r = d.integrate_half(g, 2.5, &opts)?;
        if !r.value.is_finite() {
            return Err(Error::Unsupported("log-moment diverges".into()));
        }
        total += 2.0 * measure.density_mass() * r.value;
    }
    if let Some(rule) = &measure.bernoulli {
        // Enumerate ±α₁ ± … ± α_K; the remaining signs enter only through their
        // variance, which is below 1e−24 once K reaches the truncation index.
        let k = rule.truncation_index().min(BERNOULLI_ENUM_DEPTH);
        let alphas: Vec<f64> = (1..=k).map(|n| rule.alpha(n)).collect();
        let rest = rule.tail_sq(k);
        let mut acc = 0.0;
        for mask in 0u32..(1u32 << k) {
            let s: f64 = alphas.iter().enumerate().map(|(i, a)| if mask >> i & 1 == 1 { *a } else { -*a }).sum();
            acc += (s * s + rest) * s.abs().ln_1p();
        }
        total += measure.bernoulli_mass() * acc / f64::from(1u32 << k);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn phi_of_cosine_at_quarter_period() {
        let k = kernel_from_catalog("cosine", &serde_json::json!({"sigma": 1.0})).unwrap();
        assert!((phi(&k, PI / 4.0) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(phi(&k, 0.0), 1.0);
    }

    #[test]
    fn log_moment_of_single_atom() {
        let m = SpectralMeasure::atomic(vec![(1.0, 1.0)]);
        assert!((geman_log_moment(&m).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn log_moment_of_uniform_density() {
        let m = SpectralMeasure::with_density(Density::Uniform { half_width: 1.0 });
        let exact = 2.0 * 2f64.ln() / 3.0 - 5.0 / 18.0;
        assert!((geman_log_moment(&m).unwrap() - exact).abs() < 1e-12);
    }
}
