//! Discretisation of a spectral measure into finitely many frequencies for
//! synthesis by random sinusoids, `f(t) = Σ_j √w_j (ξ_j cos λ_j t + η_j sin λ_j t)`.

use crate::error::{Error, Result};
use crate::spectral::{BernoulliRule, Density, Kernel, SpectralMeasure};

/// Frequencies `λ_j ≥ 0` and weights `w_j` with `Σ w_j cos(λ_j t) ≈ r(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralNodes {
    pub freqs: Vec<f64>,
    pub weights: Vec<f64>,
    /// True when every component is represented without discretisation error.
    pub exact: bool,
}

impl SpectralNodes {
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// `r_J(t) = Σ w_j cos(λ_j t)`.
    pub fn covariance(&self, t: f64) -> f64 {
        self.freqs.iter().zip(&self.weights).map(|(l, w)| w * (l * t).cos()).sum()
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.freqs.iter().zip(&self.weights).map(|(l, w)| w * l * l).sum()
    }
}

/// Reweights `w_j → w_j(a + bλ_j²)` so the component keeps its mass and hits
/// the target second moment exactly.
fn tilt(freqs: &[f64], weights: &mut [f64], target_m2: f64) -> Result<()> {
    let m0: f64 = weights.iter().sum();
    let m2: f64 = freqs.iter().zip(weights.iter()).map(|(l, w)| w * l * l).sum();
    let m4: f64 = freqs.iter().zip(weights.iter()).map(|(l, w)| w * l.powi(4)).sum();
    // a·m0 + b·m2 = m0 and a·m2 + b·m4 = target.
    let det = m0 * m4 - m2 * m2;
    if det.abs() <= 1e-300 {
        return Ok(());
    }
    let a = (m0 * m4 - m2 * target_m2) / det;
    let b = (m0 * target_m2 - m0 * m2) / det;
    if freqs.iter().any(|l| a + b * l * l <= 0.0) {
        return Err(Error::Discretization {
            error: (m2 / m0 - target_m2 / m0).abs(),
            threshold: 0.0,
        });
    }
    for (w, l) in weights.iter_mut().zip(freqs) {
        *w *= a + b * l * l;
    }
    Ok(())
}

/// Equal-mass nodes at the midpoints `u = (j + ½)/J` of the half-line law.
fn density_nodes(density: &Density, mass: f64, j: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let freqs: Vec<f64> = (0..j).map(|k| density.half_quantile((k as f64 + 0.5) / j as f64)).collect();
    let mut weights = vec![mass / j as f64; j];
    tilt(&freqs, &mut weights, mass * density.second_moment())?;
    Ok((freqs, weights))
}

/// Nodes of a Bernoulli convolution: the `2^k` sign patterns of `α_2, …, α_{k+1}`
/// with `ε_1 = +1`, each carrying mass `2^{−k}`. Their covariance is the
/// product `Π_{n≤k+1} cos(α_n t)` exactly.
fn bernoulli_nodes(rule: &BernoulliRule, mass: f64, j: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = (j.max(2) as f64).log2().ceil() as usize;
    let count = 1usize << k;
    let alphas: Vec<f64> = (1..=k + 1).map(|n| rule.alpha(n)).collect();
    let freqs: Vec<f64> = (0..count)
        .map(|pattern| {
            let mut l = alphas[0];
            for (bit, a) in alphas[1..].iter().enumerate() {
                l += if pattern >> bit & 1 == 1 { *a } else { -*a };
            }
            l.abs()
        })
        .collect();
    let mut weights = vec![mass / count as f64; count];
    tilt(&freqs, &mut weights, mass * rule.second_moment())?;
    Ok((freqs, weights))
}

/// Discretises a spectral measure with about `j` nodes per continuous component.
pub fn discretize(measure: &SpectralMeasure, j: usize) -> Result<SpectralNodes> {
    measure.validate()?;
    let mut freqs = Vec::new();
    let mut weights = Vec::new();
    for &(a, w) in &measure.atoms {
        if w > 0.0 {
            freqs.push(a);
            weights.push(w);
        }
    }
    if let Some(d) = &measure.density {
        let (f, w) = density_nodes(d, measure.density_mass(), j)?;
        freqs.extend(f);
        weights.extend(w);
    }
    if let Some(rule) = &measure.bernoulli {
        let (f, w) = bernoulli_nodes(rule, measure.bernoulli_mass(), j)?;
        freqs.extend(f);
        weights.extend(w);
    }
    Ok(SpectralNodes {
        freqs,
        weights,
        exact: !measure.has_continuous_component(),
    })
}

/// Number of lags at which the covariance error is evaluated on `[0, T]`.
fn lag_count(kernel: &Kernel, t: f64) -> usize {
    let per_period = (8.0 * t * kernel.lambda_max() / std::f64::consts::PI).ceil() as usize;
    per_period.clamp(2001, 20001)
}

/// `max_{t ∈ [0, T]} |r_J(t) − r(t)|` on a grid resolving the highest frequency.
pub fn kernel_approx_error(kernel: &Kernel, nodes: &SpectralNodes, t: f64) -> Result<f64> {
    let n = lag_count(kernel, t);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let s = t * i as f64 / (n - 1) as f64;
        let r = kernel.try_jet(s)?.r;
        worst = worst.max((nodes.covariance(s) - r).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::CatalogSpec;

    #[test]
    fn atoms_are_exact() {
        let m = SpectralMeasure::atomic(vec![(1.0, 0.5), (2.0, 0.5)]);
        let n = discretize(&m, 512).unwrap();
        assert!(n.exact);
        assert_eq!(n.freqs, vec![1.0, 2.0]);
    }

    #[test]
    fn sinc_nodes_resolve_the_kernel() {
        let k = Kernel::from_catalog(&CatalogSpec::Sinc).unwrap();
        let n = discretize(k.measure().unwrap(), 256).unwrap();
        assert!((n.mass() - 1.0).abs() < 1e-14);
        assert!((n.second_moment() - 1.0 / 3.0).abs() < 1e-14);
        assert!(kernel_approx_error(&k, &n, 50.0).unwrap() < 1e-3);
    }

    #[test]
    fn bernoulli_nodes_match_truncated_product() {
        let rule = BernoulliRule::Geometric { a: 1.0 / 3.0 };
        let (f, w) = bernoulli_nodes(&rule, 1.0, 16).unwrap();
        assert_eq!(f.len(), 16);
        let t = 2.7;
        let direct: f64 = (1..=5).map(|n| (rule.alpha(n) * t).cos()).product();
        let synth: f64 = f.iter().zip(&w).map(|(l, w)| w * (l * t).cos()).sum();
        assert!((direct - synth).abs() < 1e-5);
    }
}
