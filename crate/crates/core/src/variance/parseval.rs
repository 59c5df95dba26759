//! Spectral form of the key integral: `π ∫ (S_T * μ) dμ` with the Fejér kernel
//! `S_T(λ) = (T/2π) sinc²(Tλ/2)` and `dμ = (1 − λ²/σ²) dρ`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::spectral::SpectralMeasure;

/// `π S_T(u) = (T/2) sinc²(Tu/2)`.
fn fejer(t: f64, u: f64) -> f64 {
    let x = 0.5 * t * u;
    if x.abs() < 1e-4 {
        0.5 * t * (1.0 - x * x / 3.0)
    } else {
        let s = x.sin() / x;
        0.5 * t * s * s
    }
}

/// Largest number of density nodes in the quadratic form.
const NODE_BUDGET: usize = 24_000;

/// `π ∫∫ S_T(λ − λ′) dμ(λ) dμ(λ′)`, equal to `∫₀^T (1 − t/T) μ̂(t)² dt`.
///
/// Atom pairs are summed in closed form. The density is tabulated once on a
/// composite Gauss–Legendre rule over the half-line whose panels are at most
/// `π/T` wide, and the density parts become quadratic forms in those values
/// with the even reduction `S(λ − λ′) + S(λ + λ′)`.
///
/// Unbounded densities are truncated at `X`, doubled from the segmented core
/// until the tail is small, and the part beyond `X` is replaced by its
/// `T → ∞` limit `2π ∫_X^∞ m²`, where `m = (1 − λ²/σ²)p` is the signed density.
/// The error of that replacement is of relative order `1/(Tℓ)` with `ℓ` the
/// scale on which `m` varies beyond `X`.
/// For algebraic tails the node budget can stop the doubling before `tol` is met.
pub fn parseval_dual(measure: &SpectralMeasure, t: f64, tol: f64) -> Result<f64> {
    measure.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!("horizon T must be positive and finite, got {t}")));
    }
    if measure.bernoulli.is_some() {
        return Err(Error::Unsupported("the spectral dual is not available for Bernoulli components".into()));
    }
    let s2 = measure.second_moment();
    let c: Vec<(f64, f64)> = measure.atoms.iter().map(|&(a, w)| (a, w * (1.0 - a * a / s2))).collect();
    let mut total = 0.0;
    for &(ai, ci) in &c {
        for &(aj, cj) in &c {
            total += 0.5 * ci * cj * (fejer(t, ai - aj) + fejer(t, ai + aj));
        }
    }
    let Some(d) = &measure.density else {
        return Ok(total);
    };
    let mass = measure.density_mass();
    let width = (PI / t).min(0.25);
    let signed = |l: f64| mass * (1.0 - l * l / s2) * d.pdf(l);
    let opts = QuadOptions::default().with_rel_tol(1e-10);
    let tail_l2 = |x: f64| -> Result<f64> {
        let r = integrate(
            |u| {
                let l = x / u;
                let v = signed(l);
                if v.is_finite() {
                    v * v * x / (u * u)
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
            &[],
            &opts,
        )?;
        Ok(2.0 * PI * r.value)
    };
    let mut x_end = d.core_end();
    loop {
        let nodes: Vec<(f64, f64)> = d.half_nodes(x_end, width).into_iter().map(|(l, w)| (l, mass * w * (1.0 - l * l / s2))).collect();
        let mut core = total + 2.0 * quadratic_form(&nodes, t);
        for &(a, ci) in &c {
            let g: f64 = nodes.iter().map(|&(l, w)| w * (fejer(t, a - l) + fejer(t, a + l))).sum();
            core += 2.0 * ci * g;
        }
        if x_end >= d.support_top() {
            return Ok(core);
        }
        let tail = tail_l2(x_end)?;
        if tail / t <= tol * core.abs() || 2.0 * nodes.len() as f64 > NODE_BUDGET as f64 {
            return Ok(core + tail);
        }
        x_end *= 2.0;
    }
}

/// `Σᵢ Σⱼ wᵢ wⱼ (F(λᵢ − λⱼ) + F(λᵢ + λⱼ))` with `F(u) = (1 − cos Tu)/(Tu²)`.
///
/// `cos T(λᵢ ∓ λⱼ)` comes from tabulated `cos Tλ` and `sin Tλ`; pairs with
/// `|Tu| < 1/2` use the direct form to avoid cancellation in `1 − cos`.
fn quadratic_form(nodes: &[(f64, f64)], t: f64) -> f64 {
    let cs: Vec<(f64, f64)> = nodes.iter().map(|&(l, _)| ((t * l).cos(), (t * l).sin())).collect();
    let pair = |u: f64, cos_tu: f64| if (t * u).abs() < 0.5 { fejer(t, u) } else { (1.0 - cos_tu) / (t * u * u) };
    let rows: Vec<f64> = (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            let (li, wi) = nodes[i];
            let (ci, si) = cs[i];
            let mut acc = 0.5 * wi * (fejer(t, 0.0) + fejer(t, 2.0 * li));
            for j in i + 1..nodes.len() {
                let (lj, wj) = nodes[j];
                let (cj, sj) = cs[j];
                let (cc, ss) = (ci * cj, si * sj);
                acc += wj * (pair(li - lj, cc + ss) + pair(li + lj, cc - ss));
            }
            wi * acc
        })
        .collect();
    2.0 * rows.iter().sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_atom_gives_zero() {
        let m = SpectralMeasure::atomic(vec![(1.5, 1.0)]);
        assert_eq!(parseval_dual(&m, 20.0, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn two_atoms_long_time_mean() {
        // μ̂ = 0.3 cos t − 0.3 cos 2t, whose square has mean 0.09, so I(T)/T → 0.045.
        let m = SpectralMeasure::atomic(vec![(1.0, 0.5), (2.0, 0.5)]);
        let t = 1e6;
        assert!((parseval_dual(&m, t, 1e-10).unwrap() / t - 0.045).abs() < 1e-5);
    }
}
