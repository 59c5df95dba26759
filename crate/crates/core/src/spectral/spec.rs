//! JSON configuration of kernels and measures.
//!
//! Accepted shapes:
//!
//! ```text
//! {"kernel": {"catalog": "powerlaw", "b": 0.1}}
//! {"catalog": "gaussian"}
//! {"measure": {"atoms": [[1.0, 0.5], [2.0, 0.5]]}, "tol": 1e-10}
//! ```
//!
//! Catalog parameters: `powerlaw` needs `b`, `ou_smooth` needs `a`, `ou_spectral`
//! needs `M`, `cancellation` needs `alpha` and `M`, `cosine` takes `sigma`
//! (default 1), `atomic` needs `atoms`, and `bernoulli` takes either `a` for the
//! geometric rule or a rule object (`"rule": "factorial"`, or `"rule": "explicit"`
//! with `prefix` and `ratio`).

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Map, Value};

use super::bernoulli::BernoulliRule;
use super::measure::SpectralMeasure;
use crate::error::{Error, Result};

/// Default relative tolerance for kernels synthesised from a measure.
pub const DEFAULT_SYNTH_TOL: f64 = 1e-10;

/// A catalog entry with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum CatalogSpec {
    Sinc,
    Gaussian,
    BesselJ0,
    Powerlaw { b: f64 },
    OuSmooth { a: f64 },
    OuSpectral { m: f64 },
    Atomic { atoms: Vec<(f64, f64)> },
    Bernoulli(BernoulliRule),
    Cancellation { alpha: f64, m: f64 },
    Cosine { sigma: f64 },
}

/// A kernel configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Catalog(CatalogSpec),
    Measure { measure: SpectralMeasure, tol: f64 },
}

fn num(obj: &Map<String, Value>, keys: &[&str], name: &str) -> Result<f64> {
    for k in keys {
        if let Some(v) = obj.get(*k) {
            return v.as_f64().ok_or_else(|| Error::MalformedSpec(format!("parameter '{k}' of {name} must be a number")));
        }
    }
    Err(Error::MalformedSpec(format!("{name} requires parameter '{}'", keys[0])))
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str], name: &str) -> Result<()> {
    for k in obj.keys() {
        if k != "catalog" && !allowed.contains(&k.as_str()) {
            return Err(Error::MalformedSpec(format!("unknown parameter '{k}' for catalog entry {name}")));
        }
    }
    Ok(())
}

impl CatalogSpec {
    /// Parses `{"catalog": name, ...params}`.
    pub fn from_value(v: &Value) -> Result<CatalogSpec> {
        let obj = v.as_object().ok_or_else(|| Error::MalformedSpec("kernel spec must be a JSON object".into()))?;
        let name = obj
            .get("catalog")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::MalformedSpec("kernel spec needs a string field 'catalog'".into()))?;
        let spec = match name {
            "sinc" => {
                check_keys(obj, &[], name)?;
                CatalogSpec::Sinc
            }
            "gaussian" => {
                check_keys(obj, &[], name)?;
                CatalogSpec::Gaussian
            }
            "bessel_j0" => {
                check_keys(obj, &[], name)?;
                CatalogSpec::BesselJ0
            }
            "powerlaw" => {
                check_keys(obj, &["b"], name)?;
                CatalogSpec::Powerlaw { b: num(obj, &["b"], name)? }
            }
            "ou_smooth" => {
                check_keys(obj, &["a"], name)?;
                CatalogSpec::OuSmooth { a: num(obj, &["a"], name)? }
            }
            "ou_spectral" => {
                check_keys(obj, &["M", "m"], name)?;
                CatalogSpec::OuSpectral { m: num(obj, &["M", "m"], name)? }
            }
            "cancellation" => {
                check_keys(obj, &["alpha", "M", "m"], name)?;
                CatalogSpec::Cancellation {
                    alpha: num(obj, &["alpha"], name)?,
                    m: num(obj, &["M", "m"], name)?,
                }
            }
            "cosine" => {
                check_keys(obj, &["sigma"], name)?;
                let sigma = if obj.contains_key("sigma") { num(obj, &["sigma"], name)? } else { 1.0 };
                CatalogSpec::Cosine { sigma }
            }
            "atomic" => {
                check_keys(obj, &["atoms"], name)?;
                let atoms = obj.get("atoms").ok_or_else(|| Error::MalformedSpec("atomic requires parameter 'atoms'".into()))?;
                let atoms: Vec<(f64, f64)> = serde_json::from_value(atoms.clone())
                    .map_err(|e| Error::MalformedSpec(format!("atoms must be a list of [frequency, weight] pairs: {e}")))?;
                CatalogSpec::Atomic { atoms }
            }
            "bernoulli" => {
                check_keys(obj, &["a", "rule", "prefix", "ratio"], name)?;
                if obj.contains_key("a") {
                    if obj.contains_key("rule") {
                        return Err(Error::MalformedSpec("bernoulli takes either 'a' or 'rule', not both".into()));
                    }
                    CatalogSpec::Bernoulli(BernoulliRule::Geometric { a: num(obj, &["a"], name)? })
                } else {
                    let mut o = obj.clone();
                    o.remove("catalog");
                    let rule: BernoulliRule =
                        serde_json::from_value(Value::Object(o)).map_err(|e| Error::MalformedSpec(format!("invalid bernoulli rule: {e}")))?;
                    CatalogSpec::Bernoulli(rule)
                }
            }
            other => return Err(Error::UnknownCatalog(other.to_string())),
        };
        Ok(spec)
    }

    /// Canonical JSON form, the inverse of [`CatalogSpec::from_value`].
    pub fn to_value(&self) -> Value {
        match self {
            CatalogSpec::Sinc => json!({"catalog": "sinc"}),
            CatalogSpec::Gaussian => json!({"catalog": "gaussian"}),
            CatalogSpec::BesselJ0 => json!({"catalog": "bessel_j0"}),
            CatalogSpec::Powerlaw { b } => json!({"catalog": "powerlaw", "b": b}),
            CatalogSpec::OuSmooth { a } => json!({"catalog": "ou_smooth", "a": a}),
            CatalogSpec::OuSpectral { m } => json!({"catalog": "ou_spectral", "M": m}),
            CatalogSpec::Cancellation { alpha, m } => json!({"catalog": "cancellation", "alpha": alpha, "M": m}),
            CatalogSpec::Cosine { sigma } => json!({"catalog": "cosine", "sigma": sigma}),
            CatalogSpec::Atomic { atoms } => json!({"catalog": "atomic", "atoms": atoms}),
            CatalogSpec::Bernoulli(BernoulliRule::Geometric { a }) => json!({"catalog": "bernoulli", "a": a}),
            CatalogSpec::Bernoulli(rule) => {
                let mut v = serde_json::to_value(rule).expect("rule serialises");
                v.as_object_mut().expect("tagged enum is an object").insert("catalog".into(), json!("bernoulli"));
                v
            }
        }
    }
}

impl KernelSpec {
    /// Parses any of the accepted JSON shapes.
    pub fn from_value(v: &Value) -> Result<KernelSpec> {
        let obj = v.as_object().ok_or_else(|| Error::MalformedSpec("kernel spec must be a JSON object".into()))?;
        if let Some(inner) = obj.get("kernel") {
            if obj.len() != 1 {
                return Err(Error::MalformedSpec("'kernel' must be the only top-level key".into()));
            }
            return KernelSpec::from_value(inner);
        }
        if let Some(m) = obj.get("measure") {
            for k in obj.keys() {
                if k != "measure" && k != "tol" {
                    return Err(Error::MalformedSpec(format!("unknown top-level key '{k}' next to 'measure'")));
                }
            }
            let measure: SpectralMeasure = serde_json::from_value(m.clone()).map_err(|e| Error::MalformedSpec(format!("invalid measure: {e}")))?;
            let tol = match obj.get("tol") {
                None => DEFAULT_SYNTH_TOL,
                Some(t) => t.as_f64().filter(|t| *t > 0.0).ok_or_else(|| Error::MalformedSpec("'tol' must be a positive number".into()))?,
            };
            return Ok(KernelSpec::Measure { measure, tol });
        }
        if obj.contains_key("catalog") {
            return Ok(KernelSpec::Catalog(CatalogSpec::from_value(v)?));
        }
        Err(Error::MalformedSpec("kernel spec needs one of 'kernel', 'catalog' or 'measure'".into()))
    }

    /// Parses JSON text.
    pub fn parse(text: &str) -> Result<KernelSpec> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::MalformedSpec(format!("kernel spec is not valid JSON: {e}")))?;
        KernelSpec::from_value(&v)
    }

    /// Canonical JSON form.
    pub fn to_value(&self) -> Value {
        match self {
            KernelSpec::Catalog(c) => json!({ "kernel": c.to_value() }),
            KernelSpec::Measure { measure, tol } => json!({ "measure": measure, "tol": tol }),
        }
    }
}

impl Serialize for KernelSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for KernelSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        KernelSpec::from_value(&v).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_all_three_shapes() {
        let a = KernelSpec::parse(r#"{"kernel": {"catalog": "powerlaw", "b": 0.1}}"#).unwrap();
        let b = KernelSpec::parse(r#"{"catalog": "powerlaw", "b": 0.1}"#).unwrap();
        assert_eq!(a, b);
        let m = KernelSpec::parse(r#"{"measure": {"atoms": [[1.0, 0.5], [2.0, 0.5]]}}"#).unwrap();
        assert!(matches!(m, KernelSpec::Measure { .. }));
    }

    #[test]
    fn round_trip_is_stable() {
        let texts = [
            r#"{"catalog": "gaussian"}"#,
            r#"{"catalog": "ou_spectral", "m": 100}"#,
            r#"{"catalog": "bernoulli", "a": 0.3333333333333333}"#,
            r#"{"catalog": "bernoulli", "rule": "factorial"}"#,
            r#"{"catalog": "bernoulli", "rule": "explicit", "prefix": [0.5, 0.2], "ratio": 0.1}"#,
            r#"{"catalog": "atomic", "atoms": [[1.0, 0.5], [2.0, 0.5]]}"#,
            r#"{"measure": {"density": {"family": "uniform", "half_width": 1.0}}, "tol": 1e-9}"#,
        ];
        for t in texts {
            let s = KernelSpec::parse(t).unwrap();
            let text = serde_json::to_string(&s).unwrap();
            let back = KernelSpec::parse(&text).unwrap();
            assert_eq!(s, back, "{t}");
            assert_eq!(text, serde_json::to_string(&back).unwrap());
        }
    }

    #[test]
    fn rejects_unknown_catalog_and_parameters() {
        assert!(matches!(KernelSpec::parse(r#"{"catalog": "matern"}"#), Err(Error::UnknownCatalog(_))));
        assert!(matches!(KernelSpec::parse(r#"{"catalog": "gaussian", "b": 1}"#), Err(Error::MalformedSpec(_))));
        assert!(matches!(KernelSpec::parse(r#"{"catalog": "powerlaw"}"#), Err(Error::MalformedSpec(_))));
        assert!(matches!(KernelSpec::parse("not json"), Err(Error::MalformedSpec(_))));
    }
}
