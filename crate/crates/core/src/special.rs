//! Special functions used by the kernel catalog.

use crate::quad::{integrate, QuadOptions};

/// Bessel function of the first kind, order 0.
pub fn bessel_j0(x: f64) -> f64 {
    libm::j0(x)
}

/// Bessel function of the first kind, order 1.
pub fn bessel_j1(x: f64) -> f64 {
    libm::j1(x)
}

/// Bessel function of the first kind, order 2.
pub fn bessel_j2(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        x2 / 8.0 * (1.0 - x2 / 12.0 * (1.0 - x2 / 32.0))
    } else {
        libm::jn(2, x)
    }
}

/// `J₁(x)/x`, continuous at the origin with value ½.
pub fn bessel_j1_over_x(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        0.5 * (1.0 - x2 / 8.0 * (1.0 - x2 / 24.0))
    } else {
        bessel_j1(x) / x
    }
}

/// Exponentially scaled modified Bessel function of the second kind, `e^x K_ν(x)`,
/// for real order `ν` and `x > 0`, from `K_ν(x) = ∫₀^∞ e^{−x cosh t} cosh(νt) dt`.
pub fn bessel_k_scaled(nu: f64, x: f64) -> f64 {
    assert!(x > 0.0, "K_nu requires a positive argument");
    let nu = nu.abs();
    // Beyond t_max the integrand is below e^{-740} relative to its peak.
    let mut t_max = (1.0 + 740.0 / x).acosh() + 1.0;
    if nu > 0.0 {
        t_max += (nu * t_max / x).ln_1p();
    }
    let f = |t: f64| {
        let c = t.cosh();
        let e = (-x * (c - 1.0) + nu * t).exp();
        let g = if nu > 0.0 { 0.5 * (e + (-x * (c - 1.0) - nu * t).exp()) } else { e };
        g
    };
    let opts = QuadOptions::default().with_rel_tol(1e-13).with_abs_tol(0.0);
    let breaks: Vec<f64> = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0].iter().copied().filter(|b| *b < t_max).collect();
    integrate(f, 0.0, t_max, &breaks, &opts).map(|r| r.value).unwrap_or(f64::NAN)
}

/// Modified Bessel function of the second kind `K_ν(x)` for `x > 0`.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    bessel_k_scaled(nu, x) * (-x).exp()
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Natural log of the gamma function.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Gamma function.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Quantile of the centred normal law with the given variance.
pub fn normal_quantile(p: f64, variance: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    Normal::new(0.0, variance.sqrt()).expect("positive variance").inverse_cdf(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j2_first_maximum_table_value() {
        // Tabulated: max J₂ = 0.486_498_682_269_0 at x = 3.054_236_928_227_14
        let x = 3.054_236_928_227_14;
        assert!((bessel_j2(x) - 0.486_498_682_269_003).abs() < 1e-12);
    }

    #[test]
    fn j2_small_argument_branch_is_continuous() {
        let a = bessel_j2(1e-3 * (1.0 - 1e-12));
        let b = libm::jn(2, 1e-3);
        assert!((a - b).abs() < 1e-17);
    }

    #[test]
    fn k_half_closed_form() {
        for &x in &[0.01, 0.3, 1.0, 5.0, 40.0] {
            let exact = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp();
            let k = bessel_k(0.5, x);
            assert!((k / exact - 1.0).abs() < 1e-12, "x={x}: {k} vs {exact}");
        }
    }

    #[test]
    fn k1_reference_value() {
        // K₁(1) = 0.601_907_230_197_234_6 (standard table)
        assert!((bessel_k(1.0, 1.0) - 0.601_907_230_197_234_6).abs() < 1e-14);
        // K₀(2) = 0.113_893_872_749_533_4
        assert!((bessel_k(0.0, 2.0) - 0.113_893_872_749_533_4).abs() < 1e-14);
    }
}
