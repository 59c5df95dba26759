//! Symmetric spectral measures: symmetrised atoms, an even density and a
//! Bernoulli-convolution component.

use serde::{Deserialize, Serialize};

use super::bernoulli::{BernoulliProduct, BernoulliRule};
use super::density::Density;
use crate::error::{Error, Result};

/// Tolerance on the total mass of a measure.
pub const MASS_TOL: f64 = 1e-12;

/// A symmetric probability measure on the line, stored on `λ ≥ 0`.
///
/// Each atom `(α, w)` stands for `w · ½(δ_α + δ_{−α})`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralMeasure {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Density>,
    /// Mass of the density component; defaults to 1 when a density is present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bernoulli: Option<BernoulliRule>,
    /// Mass of the Bernoulli component; defaults to 1 when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bernoulli_weight: Option<f64>,
}

impl SpectralMeasure {
    /// Purely atomic measure.
    pub fn atomic(atoms: Vec<(f64, f64)>) -> Self {
        SpectralMeasure {
            atoms,
            ..Default::default()
        }
    }

    /// Measure with a single density component of unit mass.
    pub fn with_density(density: Density) -> Self {
        SpectralMeasure {
            density: Some(density),
            ..Default::default()
        }
    }

    /// Bernoulli convolution of unit mass.
    pub fn bernoulli(rule: BernoulliRule) -> Self {
        SpectralMeasure {
            bernoulli: Some(rule),
            ..Default::default()
        }
    }

    pub fn density_mass(&self) -> f64 {
        if self.density.is_some() {
            self.density_weight.unwrap_or(1.0)
        } else {
            0.0
        }
    }

    pub fn bernoulli_mass(&self) -> f64 {
        if self.bernoulli.is_some() {
            self.bernoulli_weight.unwrap_or(1.0)
        } else {
            0.0
        }
    }

    /// Total mass `Σ wᵢ + ∫p + (Bernoulli weight)`.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum::<f64>() + self.density_mass() + self.bernoulli_mass()
    }

    /// Second moment `σ² = Σ wᵢαᵢ² + ∫λ²p + (weight)·Σα_n²`.
    pub fn second_moment(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|(a, w)| w * a * a).sum();
        let dens = self.density.as_ref().map(|d| self.density_mass() * d.second_moment()).unwrap_or(0.0);
        let bern = self.bernoulli.as_ref().map(|b| self.bernoulli_mass() * b.second_moment()).unwrap_or(0.0);
        atoms + dens + bern
    }

    /// Checks the measure invariants.
    pub fn validate(&self) -> Result<()> {
        for &(a, w) in &self.atoms {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::InvalidMeasure(format!("atom frequency must be finite and nonnegative, got {a}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidMeasure(format!("atom weight must be positive, got {w}")));
            }
        }
        if let Some(d) = &self.density {
            d.validate()?;
            if !(self.density_mass() > 0.0) {
                return Err(Error::InvalidMeasure("density weight must be positive".into()));
            }
        }
        if let Some(b) = &self.bernoulli {
            b.validate()?;
            if !(self.bernoulli_mass() > 0.0) {
                return Err(Error::InvalidMeasure("bernoulli weight must be positive".into()));
            }
        }
        if self.atoms.is_empty() && self.density.is_none() && self.bernoulli.is_none() {
            return Err(Error::InvalidMeasure("measure has no components".into()));
        }
        let mass = self.total_mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("total mass must be 1, got {mass}")));
        }
        let s2 = self.second_moment();
        if !(s2 > 0.0 && s2.is_finite()) {
            return Err(Error::InvalidMeasure(format!("second moment must be finite and positive, got {s2}")));
        }
        Ok(())
    }

    /// True iff the measure is a single symmetrised atom (a random cosine).
    pub fn is_degenerate(&self) -> bool {
        self.density.is_none() && self.bernoulli.is_none() && self.atoms.iter().filter(|(a, _)| *a > 0.0).count() == 1 && self.atoms.iter().all(|(a, _)| *a > 0.0)
    }

    /// True iff the measure has a non-atomic part.
    pub fn has_continuous_component(&self) -> bool {
        self.density.is_some() || self.bernoulli.is_some()
    }

    /// Top of the spectral support.
    pub fn lambda_max(&self) -> f64 {
        let atoms = self.atoms.iter().map(|(a, _)| *a).fold(0.0, f64::max);
        let dens = self.density.as_ref().map(|d| d.support_top()).unwrap_or(0.0);
        let bern = self.bernoulli.as_ref().map(|b| b.tail_sum(0)).unwrap_or(0.0);
        atoms.max(dens).max(bern)
    }

    /// Truncated Bernoulli product when present.
    pub fn bernoulli_product(&self) -> Option<BernoulliProduct> {
        self.bernoulli.as_ref().map(BernoulliProduct::new)
    }

    /// Short identifier.
    pub fn id(&self) -> String {
        let mut parts = Vec::new();
        if !self.atoms.is_empty() {
            let a: Vec<String> = self.atoms.iter().map(|(a, w)| format!("({a},{w})")).collect();
            parts.push(format!("atoms[{}]", a.join(",")));
        }
        if let Some(d) = &self.density {
            parts.push(format!("{}*{}", self.density_mass(), d.id()));
        }
        if let Some(b) = &self.bernoulli {
            parts.push(format!("{}*{}", self.bernoulli_mass(), b.id()));
        }
        format!("measure{{{}}}", parts.join("+"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_atom_second_moment() {
        let m = SpectralMeasure::atomic(vec![(1.0, 0.5), (2.0, 0.5)]);
        m.validate().unwrap();
        assert_eq!(m.second_moment(), 2.5);
        assert!(!m.is_degenerate());
    }

    #[test]
    fn single_atom_is_degenerate() {
        let m = SpectralMeasure::atomic(vec![(1.0, 1.0)]);
        assert!(m.is_degenerate());
    }

    #[test]
    fn mass_defect_rejected() {
        let m = SpectralMeasure::atomic(vec![(1.0, 0.5)]);
        assert!(matches!(m.validate(), Err(Error::InvalidMeasure(_))));
    }

    #[test]
    fn json_schema_round_trip() {
        let text = r#"{"atoms": [[1.0, 0.25]], "density": {"family": "uniform", "half_width": 1.0}, "density_weight": 0.75}"#;
        let m: SpectralMeasure = serde_json::from_str(text).unwrap();
        m.validate().unwrap();
        let back: SpectralMeasure = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(m, back);
    }
}
