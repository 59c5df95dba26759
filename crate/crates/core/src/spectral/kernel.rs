//! Covariance kernels `r(t)` with their first two derivatives.

use std::f64::consts::PI;

use super::bernoulli::{BernoulliProduct, BernoulliRule};
use super::density::{cancellation_admissible, Density};
use super::measure::SpectralMeasure;
use super::spec::{CatalogSpec, KernelSpec};
use crate::error::{Error, Result};
use crate::quad::QuadOptions;
use crate::special::{bessel_j0, bessel_j1, bessel_j1_over_x, bessel_j2};

/// Values `r(t)`, `r′(t)`, `r″(t)` at one time lag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub r: f64,
    pub r1: f64,
    pub r2: f64,
}

#[derive(Debug, Clone)]
enum Form {
    Cosine,
    Sinc,
    Gaussian,
    BesselJ0,
    PowerLaw { b: f64 },
    OuSmooth { a: f64 },
    OuSpectral { m: f64 },
    Atomic { atoms: Vec<(f64, f64)> },
    Bernoulli { product: BernoulliProduct },
    Synth { measure: SpectralMeasure, product: Option<BernoulliProduct>, tol: f64 },
    Blend { base: Box<Kernel>, theta: f64 },
}

/// A stationary covariance kernel normalised to `r(0) = 1`.
#[derive(Debug, Clone)]
pub struct Kernel {
    form: Form,
    sigma: f64,
    id: String,
    spec: Option<KernelSpec>,
    measure: Option<SpectralMeasure>,
}

impl Kernel {
    /// Builds a kernel from a catalog entry.
    pub fn from_catalog(spec: &CatalogSpec) -> Result<Kernel> {
        let mk = |form: Form, sigma2: f64, id: String, measure: Option<SpectralMeasure>| Kernel {
            form,
            sigma: sigma2.sqrt(),
            id,
            spec: Some(KernelSpec::Catalog(spec.clone())),
            measure,
        };
        let k = match spec {
            CatalogSpec::Sinc => mk(Form::Sinc, 1.0 / 3.0, "sinc".into(), Some(SpectralMeasure::with_density(Density::Uniform { half_width: 1.0 }))),
            CatalogSpec::Gaussian => mk(Form::Gaussian, 2.0, "gaussian".into(), Some(SpectralMeasure::with_density(Density::Gaussian { variance: 2.0 }))),
            CatalogSpec::BesselJ0 => mk(Form::BesselJ0, 0.5, "bessel_j0".into(), Some(SpectralMeasure::with_density(Density::Arcsine { half_width: 1.0 }))),
            CatalogSpec::Powerlaw { b } => {
                let d = Density::PowerLaw { b: *b };
                d.validate()?;
                mk(Form::PowerLaw { b: *b }, 2.0 * b, format!("powerlaw(b={b})"), Some(SpectralMeasure::with_density(d)))
            }
            CatalogSpec::OuSmooth { a } => {
                let d = Density::OuSmooth { a: *a };
                d.validate()?;
                mk(Form::OuSmooth { a: *a }, 1.0 / a, format!("ou_smooth(a={a})"), Some(SpectralMeasure::with_density(d)))
            }
            CatalogSpec::OuSpectral { m } => {
                let d = Density::OuSpectral { m: *m };
                d.validate()?;
                mk(Form::OuSpectral { m: *m }, *m, format!("ou_spectral(M={m})"), Some(SpectralMeasure::with_density(d)))
            }
            CatalogSpec::Atomic { atoms } => {
                let measure = SpectralMeasure::atomic(atoms.clone());
                measure.validate()?;
                let s2 = measure.second_moment();
                let a: Vec<String> = atoms.iter().map(|(a, w)| format!("({a},{w})")).collect();
                let id = format!("atomic[{}]", a.join(","));
                if measure.is_degenerate() {
                    let sigma = atoms.iter().find(|(a, _)| *a > 0.0).map(|(a, _)| *a).unwrap_or(0.0);
                    mk(Form::Cosine, sigma * sigma, id, Some(measure))
                } else {
                    mk(Form::Atomic { atoms: atoms.clone() }, s2, id, Some(measure))
                }
            }
            CatalogSpec::Bernoulli(rule) => {
                rule.validate()?;
                let product = BernoulliProduct::new(rule);
                let s2 = rule.second_moment();
                mk(Form::Bernoulli { product }, s2, rule.id(), Some(SpectralMeasure::bernoulli(rule.clone())))
            }
            CatalogSpec::Cancellation { alpha, m } => {
                if !(*alpha > 0.5 && *alpha < 1.0) {
                    return Err(Error::ParameterOutOfRange(format!("cancellation exponent alpha must lie in (1/2, 1), got {alpha}")));
                }
                if !cancellation_admissible(*alpha, *m) {
                    return Err(Error::ParameterOutOfRange(format!("cancellation parameters (alpha={alpha}, M={m}) violate the positivity inequality")));
                }
                let measure = SpectralMeasure::with_density(Density::Cancellation { alpha: *alpha, m: *m });
                let mut k = Kernel::from_measure(&measure, 1e-10)?;
                k.id = format!("cancellation(alpha={alpha},M={m})");
                k.spec = Some(KernelSpec::Catalog(spec.clone()));
                k
            }
            CatalogSpec::Cosine { sigma } => {
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::ParameterOutOfRange(format!("cosine frequency must be positive, got {sigma}")));
                }
                mk(Form::Cosine, sigma * sigma, format!("cosine(sigma={sigma})"), Some(SpectralMeasure::atomic(vec![(*sigma, 1.0)])))
            }
        };
        Ok(k)
    }

    /// Synthesises a kernel from a spectral measure, evaluating the cosine transform
    /// and its derivatives by quadrature to relative tolerance `tol`.
    pub fn from_measure(measure: &SpectralMeasure, tol: f64) -> Result<Kernel> {
        measure.validate()?;
        let sigma = measure.second_moment().sqrt();
        let kernel = if measure.is_degenerate() {
            Kernel {
                form: Form::Cosine,
                sigma,
                id: measure.id(),
                spec: Some(KernelSpec::Measure { measure: measure.clone(), tol }),
                measure: Some(measure.clone()),
            }
        } else if measure.density.is_none() && measure.bernoulli.is_none() {
            Kernel {
                form: Form::Atomic { atoms: measure.atoms.clone() },
                sigma,
                id: measure.id(),
                spec: Some(KernelSpec::Measure { measure: measure.clone(), tol }),
                measure: Some(measure.clone()),
            }
        } else {
            Kernel {
                form: Form::Synth {
                    measure: measure.clone(),
                    product: measure.bernoulli_product(),
                    tol,
                },
                sigma,
                id: measure.id(),
                spec: Some(KernelSpec::Measure { measure: measure.clone(), tol }),
                measure: Some(measure.clone()),
            }
        };
        for &t in &[0.0, 1.0, 10.0, 100.0] {
            kernel.try_jet(t)?;
        }
        Ok(kernel)
    }

    /// Builds a kernel from a parsed spec.
    pub fn from_spec(spec: &KernelSpec) -> Result<Kernel> {
        match spec {
            KernelSpec::Catalog(c) => Kernel::from_catalog(c),
            KernelSpec::Measure { measure, tol } => Kernel::from_measure(measure, *tol),
        }
    }

    /// Kernel `(1 − θ) r + θ cos(σt)` with the same `σ`.
    pub fn with_special_atom(&self, theta: f64) -> Result<Kernel> {
        if !(0.0..1.0).contains(&theta) {
            return Err(Error::ParameterOutOfRange(format!("theta must lie in [0, 1), got {theta}")));
        }
        let measure = self.measure.as_ref().map(|m| {
            let mut m = m.clone();
            m.atoms.iter_mut().for_each(|(_, w)| *w *= 1.0 - theta);
            m.density_weight = m.density.as_ref().map(|_| m.density_mass() * (1.0 - theta));
            m.bernoulli_weight = m.bernoulli.as_ref().map(|_| m.bernoulli_mass() * (1.0 - theta));
            m.atoms.push((self.sigma, theta));
            m
        });
        Ok(Kernel {
            form: Form::Blend {
                base: Box::new(self.clone()),
                theta,
            },
            sigma: self.sigma,
            id: format!("{}+special_atom(theta={theta})", self.id),
            spec: None,
            measure,
        })
    }

    /// `σ = √(−r″(0))`.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `σ²`.
    pub fn sigma2(&self) -> f64 {
        self.sigma * self.sigma
    }

    /// Provenance identifier.
    pub fn id(&self) -> &str {
        &self.id
    }

    /// The spec this kernel was built from, when it has one.
    pub fn spec(&self) -> Option<&KernelSpec> {
        self.spec.as_ref()
    }

    /// The spectral measure, when known.
    pub fn measure(&self) -> Option<&SpectralMeasure> {
        self.measure.as_ref()
    }

    /// True iff the kernel is `cos(σt)`.
    pub fn is_degenerate(&self) -> bool {
        matches!(self.form, Form::Cosine)
    }

    /// True iff the kernel was synthesised by quadrature from a measure.
    pub fn is_synthesized(&self) -> bool {
        matches!(self.form, Form::Synth { .. })
    }

    /// Top of the spectral support, or `4σ` when the support is unbounded.
    pub fn lambda_max(&self) -> f64 {
        let top = self.measure.as_ref().map(|m| m.lambda_max()).unwrap_or(f64::INFINITY);
        if top.is_finite() && top > 0.0 {
            top
        } else {
            4.0 * self.sigma
        }
    }

    /// Bound on the truncation error of `r(t)` for Bernoulli products, zero otherwise.
    pub fn truncation_bound(&self, t: f64) -> f64 {
        match &self.form {
            Form::Bernoulli { product } => product.truncation_bound(t),
            Form::Synth { product: Some(p), measure, .. } => measure.bernoulli_mass() * p.truncation_bound(t),
            Form::Blend { base, theta } => (1.0 - theta) * base.truncation_bound(t),
            _ => 0.0,
        }
    }

    /// `(r, r′, r″)` at `t`, or a quadrature error for synthesised kernels.
    pub fn try_jet(&self, t: f64) -> Result<Jet> {
        let s = t.signum();
        let a = t.abs();
        let jet = match &self.form {
            Form::Cosine => {
                let (sn, c) = (self.sigma * t).sin_cos();
                Jet {
                    r: c,
                    r1: -self.sigma * sn,
                    r2: -self.sigma2() * c,
                }
            }
            Form::Sinc => sinc_jet(t),
            Form::Gaussian => {
                let e = (-t * t).exp();
                Jet {
                    r: e,
                    r1: -2.0 * t * e,
                    r2: (4.0 * t * t - 2.0) * e,
                }
            }
            Form::BesselJ0 => Jet {
                r: bessel_j0(t),
                r1: -bessel_j1(t),
                r2: bessel_j1_over_x(t) - bessel_j0(t),
            },
            Form::PowerLaw { b } => {
                let u = 1.0 + t * t;
                let r = u.powf(-b);
                Jet {
                    r,
                    r1: -2.0 * b * t * r / u,
                    r2: -2.0 * b * r / u + 4.0 * b * (b + 1.0) * t * t * r / (u * u),
                }
            }
            Form::OuSmooth { a: p } => {
                let q = (p * p + t * t).sqrt();
                let r = (p - q).exp();
                Jet {
                    r,
                    r1: -t / q * r,
                    r2: r * (-1.0 / q + t * t / (q * q * q) + t * t / (q * q)),
                }
            }
            Form::OuSpectral { m } => {
                let (e1, em) = ((-a).exp(), (-m * a).exp());
                Jet {
                    r: (m * e1 - em) / (m - 1.0),
                    r1: s * m * (em - e1) / (m - 1.0),
                    r2: m * (e1 - m * em) / (m - 1.0),
                }
            }
            Form::Atomic { atoms } => {
                let mut j = Jet { r: 0.0, r1: 0.0, r2: 0.0 };
                for &(al, w) in atoms {
                    let (sn, c) = (al * t).sin_cos();
                    j.r += w * c;
                    j.r1 -= w * al * sn;
                    j.r2 -= w * al * al * c;
                }
                j
            }
            Form::Bernoulli { product } => {
                let (r, r1, r2) = product.jet(t);
                Jet { r, r1, r2 }
            }
            Form::Synth { measure, product, tol } => synth_jet(measure, product.as_ref(), *tol, t)?,
            Form::Blend { base, theta } => {
                let b = base.try_jet(t)?;
                let (sn, c) = (self.sigma * t).sin_cos();
                Jet {
                    r: (1.0 - theta) * b.r + theta * c,
                    r1: (1.0 - theta) * b.r1 - theta * self.sigma * sn,
                    r2: (1.0 - theta) * b.r2 - theta * self.sigma2() * c,
                }
            }
        };
        Ok(jet)
    }

    /// `(r, r′, r″)` at `t`; synthesised kernels yield NaN on quadrature failure.
    pub fn jet(&self, t: f64) -> Jet {
        self.try_jet(t).unwrap_or(Jet {
            r: f64::NAN,
            r1: f64::NAN,
            r2: f64::NAN,
        })
    }

    pub fn r(&self, t: f64) -> f64 {
        self.jet(t).r
    }

    pub fn r1(&self, t: f64) -> f64 {
        self.jet(t).r1
    }

    pub fn r2(&self, t: f64) -> f64 {
        self.jet(t).r2
    }

    /// `μ̂(t) = r(t) + r″(t)/σ²`, from a cancellation-free closed form where one exists.
    pub fn mu_hat(&self, t: f64) -> f64 {
        let a = t.abs();
        match &self.form {
            Form::Cosine => 0.0,
            Form::Gaussian => 2.0 * t * t * (-t * t).exp(),
            Form::BesselJ0 => bessel_j2(t),
            Form::Sinc => {
                if a < 0.5 {
                    // ∫₀¹ (1 − 3λ²) cos(λt) dλ as a Taylor series.
                    let x2 = t * t;
                    let mut term = 1.0;
                    let mut sum = 0.0;
                    for k in 1..12 {
                        term *= -x2 / ((2 * k - 1) as f64 * (2 * k) as f64);
                        let kf = k as f64;
                        sum += term * (1.0 / (2.0 * kf + 1.0) - 3.0 / (2.0 * kf + 3.0));
                    }
                    sum
                } else {
                    let j = sinc_jet(t);
                    j.r + 3.0 * j.r2
                }
            }
            Form::PowerLaw { b } => {
                let u = 1.0 + t * t;
                t * t * u.powf(-b - 2.0) * (t * t + 2.0 * b + 3.0)
            }
            Form::OuSmooth { a: p } => {
                let q = (p * p + t * t).sqrt();
                let r = (p - q).exp();
                r * t * t * (1.0 / (q * (q + p)) + p / (q * q * q) + p / (q * q))
            }
            Form::OuSpectral { m } => (m + 1.0) * ((-a).exp_m1() - (-m * a).exp_m1()) / (m - 1.0),
            Form::Atomic { atoms } => {
                let s2 = self.sigma2();
                atoms.iter().map(|&(al, w)| w * (1.0 - al * al / s2) * (al * t).cos()).sum()
            }
            Form::Synth { measure, tol, product } => synth_mu_hat(measure, product.as_ref(), self.sigma2(), *tol, t).unwrap_or(f64::NAN),
            Form::Blend { base, theta } => (1.0 - theta) * base.mu_hat(t),
            Form::Bernoulli { .. } => {
                let j = self.jet(t);
                j.r + j.r2 / self.sigma2()
            }
        }
    }

    /// Normalised point `(r, r′/σ, r″/σ²)` at which the chaos polynomials are evaluated.
    pub fn normalized(&self, t: f64) -> (f64, f64, f64) {
        let j = self.jet(t);
        (j.r, j.r1 / self.sigma, j.r2 / self.sigma2())
    }
}

fn sinc_jet(t: f64) -> Jet {
    let a = t.abs();
    if a < 0.1 {
        // Taylor series of sin t / t: Σ (−1)^k t^{2k} / (2k+1)!
        let x2 = t * t;
        let (mut r, mut r1, mut r2) = (0.0, 0.0, 0.0);
        let mut c = 1.0;
        for k in 0..10 {
            let kf = k as f64;
            if k > 0 {
                c *= -1.0 / ((2.0 * kf) * (2.0 * kf + 1.0));
            }
            r += c * x2.powi(k);
            if k >= 1 {
                r1 += c * 2.0 * kf * t.powi(2 * k as i32 - 1);
                r2 += c * 2.0 * kf * (2.0 * kf - 1.0) * t.powi(2 * k as i32 - 2);
            }
        }
        Jet { r, r1, r2 }
    } else {
        let (s, c) = t.sin_cos();
        Jet {
            r: s / t,
            r1: (t * c - s) / (t * t),
            r2: -s / t - 2.0 * c / (t * t) + 2.0 * s / (t * t * t),
        }
    }
}

fn synth_opts(tol: f64, t: f64) -> QuadOptions {
    let mut o = QuadOptions::default().with_rel_tol(tol).with_abs_tol(tol * 1e-3).with_max_evals(4_000_000);
    if t.abs() > 0.0 {
        o.max_panel = PI / (4.0 * t.abs());
    }
    o
}

fn synth_jet(measure: &SpectralMeasure, product: Option<&BernoulliProduct>, tol: f64, t: f64) -> Result<Jet> {
    let mut j = Jet { r: 0.0, r1: 0.0, r2: 0.0 };
    for &(al, w) in &measure.atoms {
        let (sn, c) = (al * t).sin_cos();
        j.r += w * c;
        j.r1 -= w * al * sn;
        j.r2 -= w * al * al * c;
    }
    if let Some(d) = &measure.density {
        let o = synth_opts(tol, t);
        let wgt = 2.0 * measure.density_mass();
        j.r += wgt * d.integrate_half(|l| (l * t).cos(), 0.0, &o)?.value;
        j.r1 -= wgt * d.integrate_half(|l| l * (l * t).sin(), 1.0, &o)?.value;
        j.r2 -= wgt * d.integrate_half(|l| l * l * (l * t).cos(), 2.0, &o)?.value;
    }
    if let Some(p) = product {
        let (r, r1, r2) = p.jet(t);
        let w = measure.bernoulli_mass();
        j.r += w * r;
        j.r1 += w * r1;
        j.r2 += w * r2;
    }
    Ok(j)
}

fn synth_mu_hat(measure: &SpectralMeasure, product: Option<&BernoulliProduct>, s2: f64, tol: f64, t: f64) -> Result<f64> {
    let mut v: f64 = measure.atoms.iter().map(|&(al, w)| w * (1.0 - al * al / s2) * (al * t).cos()).sum();
    if let Some(d) = &measure.density {
        let o = synth_opts(tol, t);
        v += 2.0 * measure.density_mass() * d.integrate_half(|l| (1.0 - l * l / s2) * (l * t).cos(), 2.0, &o)?.value;
    }
    if let Some(p) = product {
        let (r, _, r2) = p.jet(t);
        v += measure.bernoulli_mass() * (r + r2 / s2);
    }
    Ok(v)
}

/// Builds a catalog kernel from an id and a JSON parameter object.
pub fn kernel_from_catalog(name: &str, params: &serde_json::Value) -> Result<Kernel> {
    let mut obj = match params {
        serde_json::Value::Object(m) => m.clone(),
        serde_json::Value::Null => serde_json::Map::new(),
        other => return Err(Error::MalformedSpec(format!("catalog parameters must be an object, got {other}"))),
    };
    obj.insert("catalog".into(), serde_json::Value::String(name.into()));
    let spec = CatalogSpec::from_value(&serde_json::Value::Object(obj))?;
    Kernel::from_catalog(&spec)
}

/// Builds a kernel from a measure, as `kernel_from_measure(measure, tol)`.
pub fn kernel_from_measure(measure: &SpectralMeasure, tol: f64) -> Result<Kernel> {
    Kernel::from_measure(measure, tol)
}

/// Convenience constructor for the Bernoulli family `α_n = a^n`.
pub fn bernoulli_geometric(a: f64) -> Result<Kernel> {
    Kernel::from_catalog(&CatalogSpec::Bernoulli(BernoulliRule::Geometric { a }))
}
