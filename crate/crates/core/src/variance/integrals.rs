//! Time-domain integrals of `μ̂²` against the triangle window and the chaos terms `V_q`.

use std::f64::consts::PI;

use crate::chaos::polys::chaos_polys;
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::spectral::Kernel;

/// Default relative tolerance of the time-domain quadratures.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Quadrature options with the oscillation-aware panel cap `π/(4 λ_max)`.
pub fn time_options(kernel: &Kernel, tol: f64) -> QuadOptions {
    QuadOptions::default().with_rel_tol(tol).with_max_panel(PI / (4.0 * kernel.lambda_max()))
}

fn check_inputs(kernel: &Kernel, t: f64) -> Result<()> {
    if kernel.is_degenerate() {
        return Err(Error::DegenerateKernel);
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!("horizon T must be positive and finite, got {t}")));
    }
    Ok(())
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Unsupported(format!("{what} evaluated to a non-finite value")))
    }
}

/// `I(T) = ∫₀^T (1 − t/T) μ̂(t)² dt`.
pub fn key_integral(kernel: &Kernel, t: f64, tol: f64) -> Result<f64> {
    check_inputs(kernel, t)?;
    let r = integrate(
        |s| {
            let m = kernel.mu_hat(s);
            (1.0 - s / t) * m * m
        },
        0.0,
        t,
        &[],
        &time_options(kernel, tol),
    )?;
    finite(r.value, "key integral")
}

/// `V₁(T) = 4T·I(T)`.
pub fn v1(kernel: &Kernel, t: f64, tol: f64) -> Result<f64> {
    Ok(4.0 * t * key_integral(kernel, t, tol)?)
}

/// `V_q(T) = 2∫₀^T (T − t) P_q(r, r′/σ, r″/σ²) dt`, with `P_q = μ̂² R_q` evaluated
/// through the exact quotient `R_q = P_q/(x + z)²`.
pub fn vq(kernel: &Kernel, t: f64, q: u32, tol: f64) -> Result<f64> {
    check_inputs(kernel, t)?;
    let polys = chaos_polys(q)?;
    let r = integrate(
        |s| {
            let m = kernel.mu_hat(s);
            let (x, y, z) = kernel.normalized(s);
            (1.0 - s / t) * m * m * polys.r_eval.eval_point(x, y, z).to_f64()
        },
        0.0,
        t,
        &[],
        &time_options(kernel, tol),
    )?;
    finite(2.0 * t * r.value, "V_q")
}

/// Lower bound `σ²/π² · T · I(T)`; zero for the degenerate kernel.
pub fn lower_bound_thm12(kernel: &Kernel, t: f64, tol: f64) -> Result<f64> {
    if kernel.is_degenerate() {
        return Ok(0.0);
    }
    Ok(kernel.sigma2() / (PI * PI) * t * key_integral(kernel, t, tol)?)
}

/// `{σT/π}(1 − {σT/π})`, the zero-count variance of a random cosine.
pub fn degenerate_variance(sigma: f64, t: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!("sigma must be positive, got {sigma}")));
    }
    let u = sigma * t / PI;
    let frac = u - u.floor();
    Ok(frac * (1.0 - frac))
}

/// `(arccos r/π)(1 − arccos r/π)`.
pub fn arccos_remainder(r: f64) -> f64 {
    let a = r.clamp(-1.0, 1.0).acos() / PI;
    a * (1.0 - a)
}

/// `E[N_q(T)²] = V_q(T) + c_q/(qσ²)(1 − r(T)^{2q})`, which must be nonnegative.
pub fn chaos_second_moment(v_q: f64, q: u32, sigma2: f64, r_t: f64) -> f64 {
    let c = crate::chaos::coeffs::to_f64(&crate::chaos::c_coeff(q));
    // For tiny |r(T)| the power is formed in log space so it underflows to zero gracefully.
    let pow = if r_t.abs() < 1e-8 {
        if r_t == 0.0 {
            0.0
        } else {
            (2.0 * q as f64 * r_t.abs().ln()).exp()
        }
    } else {
        r_t.powi(2 * q as i32)
    };
    v_q + c / (q as f64 * sigma2) * (1.0 - pow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{CatalogSpec, Kernel};

    #[test]
    fn degenerate_values() {
        assert_eq!(degenerate_variance(1.0, PI).unwrap(), 0.0);
        assert!((degenerate_variance(1.0, 2.5 * PI).unwrap() - 0.25).abs() < 1e-15);
        assert!((degenerate_variance(1.0, PI / 3.0).unwrap() - 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn arccos_remainder_at_zero() {
        assert_eq!(arccos_remainder(0.0), 0.25);
    }

    #[test]
    fn cosine_is_rejected_but_lower_bound_is_zero() {
        let k = Kernel::from_catalog(&CatalogSpec::Cosine { sigma: 1.0 }).unwrap();
        assert_eq!(v1(&k, 10.0, 1e-8), Err(Error::DegenerateKernel));
        assert_eq!(lower_bound_thm12(&k, 10.0, 1e-8).unwrap(), 0.0);
    }

    #[test]
    fn first_term_is_v1() {
        let k = Kernel::from_catalog(&CatalogSpec::Gaussian).unwrap();
        let a = v1(&k, 10.0, 1e-10).unwrap();
        let b = vq(&k, 10.0, 1, 1e-10).unwrap();
        assert!((a - b).abs() <= 1e-10 * a);
    }
}
