//! Monte Carlo check of the Hermite product moments that enter the chaos expansion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::chaos::hermite_product_closed_form;
use crate::error::{Error, Result};
use crate::spectral::Kernel;

/// Probabilists' Hermite polynomial `He_n(x)`.
pub fn hermite(n: u32, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let c = x * b - k as f64 * a;
        a = b;
        b = c;
    }
    b
}

/// Covariance of `(f(t), f(s), f′(t)/σ, f′(s)/σ)` at lag `τ = t − s`.
pub fn joint_covariance(kernel: &Kernel, lag: f64) -> Result<[[f64; 4]; 4]> {
    let j = kernel.try_jet(lag)?;
    let s = kernel.sigma();
    let (r, y, z) = (j.r, j.r1 / s, j.r2 / (s * s));
    Ok([[1.0, r, 0.0, -y], [r, 1.0, y, 0.0], [0.0, y, 1.0, -z], [-y, 0.0, -z, 1.0]])
}

/// Cholesky factor of a positive semidefinite matrix, zeroing columns with vanishing pivots.
fn psd_cholesky(a: &[[f64; 4]; 4]) -> Result<[[f64; 4]; 4]> {
    let mut l = [[0.0; 4]; 4];
    for j in 0..4 {
        let d = a[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        if d < -1e-10 {
            return Err(Error::IdentityViolation(format!("joint covariance is not positive semidefinite (pivot {d:e})")));
        }
        if d <= 1e-14 {
            continue;
        }
        let p = d.sqrt();
        l[j][j] = p;
        for i in j + 1..4 {
            l[i][j] = (a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>()) / p;
        }
    }
    Ok(l)
}

/// `E[H_{2q−2l₁}(f(t)) H_{2q−2l₂}(f(s)) H_{2l₁}(f′(t)/σ) H_{2l₂}(f′(s)/σ)]` by Monte Carlo and by the diagram formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HermiteCheck {
    pub mc_mean: f64,
    pub mc_se: f64,
    pub closed_form: f64,
}

impl HermiteCheck {
    /// `|mc − closed|` in units of the standard error.
    pub fn z_score(&self) -> f64 {
        (self.mc_mean - self.closed_form).abs() / self.mc_se.max(f64::MIN_POSITIVE)
    }
}

/// Diagram-formula value of the Hermite product moment at lag `lag`.
pub fn hermite_closed_form(kernel: &Kernel, lag: f64, q: u32, l1: u32, l2: u32) -> Result<f64> {
    let j = kernel.try_jet(lag)?;
    let s = kernel.sigma();
    Ok(hermite_product_closed_form(q, l1, l2, j.r, j.r1 / s, j.r2 / (s * s)))
}

/// Samples the joint Gaussian vector from its exact covariance and averages the Hermite product.
pub fn hermite_product_oracle(kernel: &Kernel, lag: f64, q: u32, l1: u32, l2: u32, n_samples: usize, seed: u64) -> Result<HermiteCheck> {
    if q == 0 || 2 * q > 8 {
        return Err(Error::SizeGuard(format!("hermite oracle needs 1 <= q <= 4, got {q}")));
    }
    if l1 > q || l2 > q {
        return Err(Error::ParameterOutOfRange(format!("need l1, l2 <= q, got ({l1}, {l2})")));
    }
    if n_samples < 2 {
        return Err(Error::ParameterOutOfRange("need at least two samples".into()));
    }
    if kernel.is_degenerate() {
        return Err(Error::DegenerateKernel);
    }
    let l = psd_cholesky(&joint_covariance(kernel, lag)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_samples {
        let e: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let v: [f64; 4] = std::array::from_fn(|i| (0..=i).map(|k| l[i][k] * e[k]).sum());
        let h = hermite(2 * (q - l1), v[0]) * hermite(2 * (q - l2), v[1]) * hermite(2 * l1, v[2]) * hermite(2 * l2, v[3]);
        sum += h;
        sum_sq += h * h;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = (sum_sq - n * mean * mean) / (n - 1.0);
    Ok(HermiteCheck {
        mc_mean: mean,
        mc_se: (var.max(0.0) / n).sqrt(),
        closed_form: hermite_closed_form(kernel, lag, q, l1, l2)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::CatalogSpec;

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(0, 0.3), 1.0);
        assert_eq!(hermite(2, 2.0), 3.0);
        assert_eq!(hermite(4, 1.0), 1.0 - 6.0 + 3.0);
    }

    #[test]
    fn first_order_closed_forms() {
        let k = Kernel::from_catalog(&CatalogSpec::Gaussian).unwrap();
        let tau = 0.4;
        let j = k.jet(tau);
        assert!((hermite_closed_form(&k, tau, 1, 0, 0).unwrap() - 2.0 * j.r * j.r).abs() < 1e-15);
        let z = j.r2 / k.sigma2();
        assert!((hermite_closed_form(&k, tau, 1, 1, 1).unwrap() - 2.0 * z * z).abs() < 1e-15);
    }

    #[test]
    fn oracle_agrees_at_small_order() {
        let k = Kernel::from_catalog(&CatalogSpec::Gaussian).unwrap();
        let c = hermite_product_oracle(&k, 0.4, 1, 0, 1, 200_000, 7).unwrap();
        assert!(c.z_score() < 4.0, "{c:?}");
    }
}
