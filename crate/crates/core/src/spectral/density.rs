//! Even spectral densities with support metadata.
//!
//! Every family is normalised to unit mass on the whole line. Integration over
//! the half-line `λ ≥ 0` is split into segments that carry the algebraic exponent
//! of any endpoint singularity, plus a tail beyond the last segment for unbounded
//! supports, controlled by an explicit upper bound on the tail moments.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{gauss10, integrate, integrate_to_infinity, QuadOptions, QuadResult};
use crate::special::{bessel_k, bessel_k_scaled, gamma, normal_quantile};

/// A named density family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Density {
    /// `1/(2h)` on `[−h, h]`.
    Uniform { half_width: f64 },
    /// Centred normal law with the given variance.
    Gaussian { variance: f64 },
    /// Arcsine law `1/(π√(h² − λ²))` on `(−h, h)`.
    Arcsine { half_width: f64 },
    /// Spectral density of `(1 + t²)^(−b)`.
    PowerLaw { b: f64 },
    /// Spectral density of `exp(a − √(a² + t²))`.
    OuSmooth { a: f64 },
    /// Spectral density of `(M e^{−|t|} − e^{−M|t|})/(M − 1)`.
    OuSpectral { m: f64 },
    /// `c₁(1 − |λ|)^(−α)` on `|λ| < 1` and `c₂` on `1 < |λ| < M`.
    Cancellation { alpha: f64, m: f64 },
}

/// Which end of a segment carries an algebraic singularity `|λ − end|^(−β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Singular {
    None,
    Left(f64),
    Right(f64),
}

/// A piece of the half-line support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: f64,
    pub b: f64,
    pub singular: Singular,
}

/// Coefficients `(c₁, c₂)` of the cancellation density, solving unit mass and unit
/// second moment.
pub fn cancellation_coefficients(alpha: f64, m: f64) -> (f64, f64) {
    let a11 = 1.0 / (1.0 - alpha);
    let a12 = m - 1.0;
    let a21 = 1.0 / (1.0 - alpha) - 2.0 / (2.0 - alpha) + 1.0 / (3.0 - alpha);
    let a22 = (m * m * m - 1.0) / 3.0;
    let det = a11 * a22 - a12 * a21;
    let c1 = 0.5 * (a22 - a12) / det;
    let c2 = 0.5 * (a11 - a21) / det;
    (c1, c2)
}

/// Positivity condition on `(α, M)` for the cancellation density.
pub fn cancellation_admissible(alpha: f64, m: f64) -> bool {
    alpha > 0.5
        && alpha < 1.0
        && m > 1.0
        && m * m + m + 1.0 > 3.0 + 3.0 * (1.0 - alpha) * (1.0 / (3.0 - alpha) - 2.0 / (2.0 - alpha))
}

impl Density {
    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let bad = |s: String| Err(Error::ParameterOutOfRange(s));
        match *self {
            Density::Uniform { half_width: h } | Density::Arcsine { half_width: h } => {
                if !(h > 0.0 && h.is_finite()) {
                    return bad(format!("half_width must be positive, got {h}"));
                }
            }
            Density::Gaussian { variance } => {
                if !(variance > 0.0 && variance.is_finite()) {
                    return bad(format!("variance must be positive, got {variance}"));
                }
            }
            Density::PowerLaw { b } => {
                if !(b > 0.0 && b < 0.25) {
                    return bad(format!("power-law exponent b must lie in (0, 1/4), got {b}"));
                }
            }
            Density::OuSmooth { a } => {
                if !(a > 0.0 && a.is_finite()) {
                    return bad(format!("ou_smooth parameter a must be positive, got {a}"));
                }
            }
            Density::OuSpectral { m } => {
                if !(m > 1.0 && m.is_finite()) {
                    return bad(format!("ou_spectral parameter M must exceed 1, got {m}"));
                }
            }
            Density::Cancellation { alpha, m } => {
                if !(alpha > 0.5 && alpha < 1.0) {
                    return bad(format!("cancellation exponent alpha must lie in (1/2, 1), got {alpha}"));
                }
                if !cancellation_admissible(alpha, m) {
                    return bad(format!("cancellation parameters (alpha={alpha}, M={m}) violate the positivity inequality"));
                }
                let (c1, c2) = cancellation_coefficients(alpha, m);
                if !(c1 > 0.0 && c2 > 0.0) {
                    return bad(format!("cancellation coefficients not positive: c1={c1}, c2={c2}"));
                }
            }
        }
        Ok(())
    }

    /// Density value at `λ` (even in `λ`).
    pub fn pdf(&self, lambda: f64) -> f64 {
        let l = lambda.abs();
        match *self {
            Density::Uniform { half_width: h } => {
                if l <= h {
                    0.5 / h
                } else {
                    0.0
                }
            }
            Density::Gaussian { variance: v } => (-l * l / (2.0 * v)).exp() / (2.0 * PI * v).sqrt(),
            Density::Arcsine { half_width: h } => {
                if l < h {
                    1.0 / (PI * ((h - l) * (h + l)).sqrt())
                } else {
                    0.0
                }
            }
            Density::PowerLaw { b } => {
                if l == 0.0 {
                    return f64::INFINITY;
                }
                let nu = 0.5 - b;
                2f64.powf(nu) / (gamma(b) * PI.sqrt()) * l.powf(-nu) * bessel_k(nu, l)
            }
            Density::OuSmooth { a } => {
                let u = (1.0 + l * l).sqrt();
                // e^a · a K₁(a u)/(π u), with the exponential scaling applied first.
                a * bessel_k_scaled(1.0, a * u) * (a - a * u).exp() / (PI * u)
            }
            Density::OuSpectral { m } => m * (m + 1.0) / (PI * (l * l + 1.0) * (l * l + m * m)),
            Density::Cancellation { alpha, m } => {
                let (c1, c2) = cancellation_coefficients(alpha, m);
                if l < 1.0 {
                    c1 * (1.0 - l).powf(-alpha)
                } else if l < m {
                    c2
                } else {
                    0.0
                }
            }
        }
    }

    /// Density at distance `d > 0` inside a singular segment endpoint `end`, computed
    /// without forming `end ∓ d` where that would lose the distance to rounding.
    pub fn pdf_near(&self, end: f64, d: f64, from_right: bool) -> f64 {
        match *self {
            Density::Arcsine { half_width: h } if from_right && end == h => 1.0 / (PI * (d * (2.0 * h - d)).sqrt()),
            Density::Cancellation { alpha, m } if from_right && end == 1.0 => {
                let (c1, _) = cancellation_coefficients(alpha, m);
                c1 * d.powf(-alpha)
            }
            _ => {
                if from_right {
                    self.pdf(end - d)
                } else {
                    self.pdf(end + d)
                }
            }
        }
    }

    /// Closed-form second moment `∫ λ² p(λ) dλ`.
    pub fn second_moment(&self) -> f64 {
        match *self {
            Density::Uniform { half_width: h } => h * h / 3.0,
            Density::Gaussian { variance } => variance,
            Density::Arcsine { half_width: h } => h * h / 2.0,
            Density::PowerLaw { b } => 2.0 * b,
            Density::OuSmooth { a } => 1.0 / a,
            Density::OuSpectral { m } => m,
            Density::Cancellation { alpha, m } => {
                let (c1, c2) = cancellation_coefficients(alpha, m);
                let beta = 1.0 / (1.0 - alpha) - 2.0 / (2.0 - alpha) + 1.0 / (3.0 - alpha);
                2.0 * (c1 * beta + c2 * (m * m * m - 1.0) / 3.0)
            }
        }
    }

    /// Top of the support (`∞` when unbounded).
    pub fn support_top(&self) -> f64 {
        match *self {
            Density::Uniform { half_width: h } | Density::Arcsine { half_width: h } => h,
            Density::Cancellation { m, .. } => m,
            _ => f64::INFINITY,
        }
    }

    /// Decomposition of `[0, core_end]` into integration segments, where `core_end`
    /// is the support top for bounded families and a cut beyond which the tail bound
    /// takes over otherwise.
    pub fn segments(&self) -> Vec<Segment> {
        let seg = |a, b, singular| Segment { a, b, singular };
        match *self {
            Density::Uniform { half_width: h } => vec![seg(0.0, h, Singular::None)],
            Density::Arcsine { half_width: h } => vec![seg(0.0, h, Singular::Right(0.5))],
            Density::Cancellation { alpha, m } => vec![seg(0.0, 1.0, Singular::Right(alpha)), seg(1.0, m, Singular::None)],
            Density::Gaussian { variance } => {
                let s = variance.sqrt();
                vec![seg(0.0, 4.0 * s, Singular::None), seg(4.0 * s, 8.0 * s, Singular::None)]
            }
            Density::PowerLaw { b } => vec![seg(0.0, 1.0, Singular::Left(1.0 - 2.0 * b)), seg(1.0, 8.0, Singular::None)],
            Density::OuSmooth { a } => {
                let top = (8.0 / a).max(4.0);
                vec![seg(0.0, top, Singular::None)]
            }
            Density::OuSpectral { m } => vec![seg(0.0, 2.0 * m, Singular::None)],
        }
    }

    /// End of the segmented core.
    pub fn core_end(&self) -> f64 {
        self.segments().last().map(|s| s.b).unwrap_or(0.0)
    }

    /// Upper bound on `∫_x^∞ λ^k p(λ) dλ` (half-line) for `x ≥ core_end` and `0 ≤ k ≤ 3`.
    /// Returns `∞` when the moment diverges.
    pub fn tail_bound(&self, x: f64, k: f64) -> f64 {
        if x >= self.support_top() {
            return 0.0;
        }
        let x = x.max(1.0);
        match *self {
            Density::Gaussian { variance: v } => {
                // ∫_x^∞ λ³ e^{−λ²/2v}/√(2πv) dλ dominates every k ≤ 3 once x ≥ 1.
                v * (x * x + 2.0 * v) * (-x * x / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()
            }
            Density::PowerLaw { b } => {
                // K_ν ≤ K_{1/2} for 0 ≤ ν ≤ 1/2 gives p(λ) ≤ C√(π/2) λ^{b−1} e^{−λ}.
                let c = 2f64.powf(0.5 - b) / (gamma(b) * PI.sqrt()) * (PI / 2.0).sqrt();
                c * (-x).exp() * (x.powi(3) + 3.0 * x * x + 6.0 * x + 6.0)
            }
            Density::OuSmooth { a } => {
                // K₁ ≤ K_{3/2} gives p(λ) ≤ C λ^{−3/2} e^{−aλ} with an explicit C.
                let c = a.exp() * a * (PI / (2.0 * a)).sqrt() * (1.0 + 1.0 / a) / PI;
                c * (-a * x).exp() * (x.powi(3) / a + 3.0 * x * x / (a * a) + 6.0 * x / a.powi(3) + 6.0 / a.powi(4))
            }
            Density::OuSpectral { m } => {
                if k >= 3.0 {
                    f64::INFINITY
                } else {
                    m * (m + 1.0) / PI * x.powf(k - 3.0) / (3.0 - k)
                }
            }
            _ => 0.0,
        }
    }

    /// `∫₀^∞ w(λ) p(λ) dλ` over the half-line, with `max_panel` applied in `λ`.
    ///
    /// `tail_k` is the moment order used for the tail bound (`|w(λ)| ≤ C λ^k`).
    pub fn integrate_half<F>(&self, w: F, tail_k: f64, opts: &QuadOptions) -> Result<QuadResult>
    where
        F: Fn(f64) -> f64,
    {
        let mut total = QuadResult {
            value: 0.0,
            error: 0.0,
            evals: 0,
        };
        for seg in self.segments() {
            let r = self.integrate_segment(&seg, &w, opts)?;
            total.value += r.value;
            total.error += r.error;
            total.evals += r.evals;
        }
        let end = self.core_end();
        if end < self.support_top() {
            let tol_abs = opts.abs_tol.max(0.1 * opts.rel_tol * total.value.abs());
            if self.tail_bound(end, tail_k) > tol_abs {
                let r = integrate_to_infinity(|l| w(l) * self.pdf(l), end, end, |x| self.tail_bound(x, tail_k), opts)?;
                total.value += r.value;
                total.error += r.error;
                total.evals += r.evals;
            } else {
                total.error += self.tail_bound(end, tail_k);
            }
        }
        Ok(total)
    }

    /// Fixed composite 10-point Gauss–Legendre rule for `∫₀^x_end w(λ) p(λ) dλ`,
    /// returned as `(λ, weight·p(λ))` pairs.
    ///
    /// Panels are at most `max_width` wide in `λ`. Singular segment ends use the power
    /// substitution of [`Density::integrate_half`], and `[core_end, x_end]` is appended
    /// as a regular segment.
    pub fn half_nodes(&self, x_end: f64, max_width: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let regular = |a: f64, b: f64, out: &mut Vec<(f64, f64)>| {
            let n = ((b - a) / max_width).ceil().max(1.0) as usize;
            let h = (b - a) / n as f64;
            for k in 0..n {
                let lo = a + h * k as f64;
                out.extend(gauss10(lo, lo + h).map(|(l, w)| (l, w * self.pdf(l))));
            }
        };
        let substituted = |end: f64, len: f64, beta: f64, from_right: bool, out: &mut Vec<(f64, f64)>| {
            let p = 1.0 / (1.0 - beta);
            let smax = len.powf(1.0 / p);
            let stretch = p * smax.powf(p - 1.0);
            let n = (smax * stretch / max_width).ceil().max(1.0) as usize;
            let h = smax / n as f64;
            for k in 0..n {
                let lo = h * k as f64;
                out.extend(gauss10(lo, lo + h).map(|(s, w)| {
                    let d = s.powf(p);
                    let l = if from_right { end - d } else { end + d };
                    (l, w * p * s.powf(p - 1.0) * self.pdf_near(end, d, from_right))
                }));
            }
        };
        for seg in self.segments() {
            let len = seg.b - seg.a;
            match seg.singular {
                Singular::None => regular(seg.a, seg.b, &mut out),
                Singular::Right(beta) => {
                    let cut = seg.b - (0.25 * len).min(0.25);
                    regular(seg.a, cut, &mut out);
                    substituted(seg.b, seg.b - cut, beta, true, &mut out);
                }
                Singular::Left(beta) => {
                    let cut = seg.a + (0.25 * len).min(0.25);
                    substituted(seg.a, cut - seg.a, beta, false, &mut out);
                    regular(cut, seg.b, &mut out);
                }
            }
        }
        let end = self.core_end();
        if x_end > end {
            regular(end, x_end, &mut out);
        }
        out
    }

    fn integrate_segment<F>(&self, seg: &Segment, w: &F, opts: &QuadOptions) -> Result<QuadResult>
    where
        F: Fn(f64) -> f64,
    {
        match seg.singular {
            Singular::None => integrate(|l| w(l) * self.pdf(l), seg.a, seg.b, &[], opts),
            Singular::Right(beta) => {
                let len = seg.b - seg.a;
                let cut = seg.b - (0.25 * len).min(0.25);
                let regular = integrate(|l| w(l) * self.pdf(l), seg.a, cut, &[], opts)?;
                let p = 1.0 / (1.0 - beta);
                let smax = (seg.b - cut).powf(1.0 / p);
                let o = self.substituted_opts(opts, p, smax);
                let sing = integrate(
                    |s| {
                        let d = s.powf(p);
                        p * s.powf(p - 1.0) * w(seg.b - d) * self.pdf_near(seg.b, d, true)
                    },
                    0.0,
                    smax,
                    &[],
                    &o,
                )?;
                Ok(QuadResult {
                    value: regular.value + sing.value,
                    error: regular.error + sing.error,
                    evals: regular.evals + sing.evals,
                })
            }
            Singular::Left(beta) => {
                let len = seg.b - seg.a;
                let cut = seg.a + (0.25 * len).min(0.25);
                let regular = integrate(|l| w(l) * self.pdf(l), cut, seg.b, &[], opts)?;
                let p = 1.0 / (1.0 - beta);
                let smax = (cut - seg.a).powf(1.0 / p);
                let o = self.substituted_opts(opts, p, smax);
                let sing = integrate(
                    |s| {
                        let d = s.powf(p);
                        p * s.powf(p - 1.0) * w(seg.a + d) * self.pdf_near(seg.a, d, false)
                    },
                    0.0,
                    smax,
                    &[],
                    &o,
                )?;
                Ok(QuadResult {
                    value: regular.value + sing.value,
                    error: regular.error + sing.error,
                    evals: regular.evals + sing.evals,
                })
            }
        }
    }

    /// Panel cap in the substituted variable: `dλ/ds ≤ p·smax^(p−1)`.
    fn substituted_opts(&self, opts: &QuadOptions, p: f64, smax: f64) -> QuadOptions {
        let mut o = *opts;
        if o.max_panel.is_finite() {
            let stretch = p * smax.powf(p - 1.0);
            o.max_panel = (o.max_panel / stretch.max(1e-300)).max(smax / 4096.0);
        }
        o
    }

    /// Quantile of the half-line law (`λ ≥ 0`, normalised) at `u ∈ (0, 1)`.
    pub fn half_quantile(&self, u: f64) -> f64 {
        match *self {
            Density::Uniform { half_width: h } => u * h,
            Density::Gaussian { variance } => normal_quantile(0.5 * (1.0 + u), variance),
            Density::Arcsine { half_width: h } => h * (0.5 * PI * u).sin(),
            _ => self.numeric_half_quantile(u),
        }
    }

    fn half_cdf(&self, x: f64) -> f64 {
        let opts = QuadOptions::default().with_rel_tol(1e-11);
        let mut acc = 0.0;
        for seg in self.segments() {
            if seg.a >= x {
                break;
            }
            let s = Segment {
                a: seg.a,
                b: seg.b.min(x),
                singular: match seg.singular {
                    Singular::Right(_) if x < seg.b => Singular::None,
                    other => other,
                },
            };
            if let Ok(r) = self.integrate_segment(&s, &|_| 1.0, &opts) {
                acc += r.value;
            }
        }
        let end = self.core_end();
        if x > end && end < self.support_top() {
            if let Ok(r) = integrate(|l| self.pdf(l), end, x, &[], &opts) {
                acc += r.value;
            }
        }
        2.0 * acc
    }

    fn numeric_half_quantile(&self, u: f64) -> f64 {
        let mut lo = 0.0;
        let mut hi = if self.support_top().is_finite() {
            self.support_top()
        } else {
            let mut h = self.core_end().max(1.0);
            while self.half_cdf(h) < u && h < 1e12 {
                h *= 2.0;
            }
            h
        };
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.half_cdf(mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-13 * hi.max(1e-300) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Short identifier used in provenance strings.
    pub fn id(&self) -> String {
        match *self {
            Density::Uniform { half_width } => format!("uniform(h={half_width})"),
            Density::Gaussian { variance } => format!("gaussian_density(v={variance})"),
            Density::Arcsine { half_width } => format!("arcsine(h={half_width})"),
            Density::PowerLaw { b } => format!("powerlaw_density(b={b})"),
            Density::OuSmooth { a } => format!("ou_smooth_density(a={a})"),
            Density::OuSpectral { m } => format!("ou_spectral_density(M={m})"),
            Density::Cancellation { alpha, m } => format!("cancellation_density(alpha={alpha},M={m})"),
        }
    }
}
