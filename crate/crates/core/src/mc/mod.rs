//! Monte Carlo ground truth: stationary Gaussian paths, zero counts, cosine
//! crossings and batch-means error bars.
//!
//! Path `p` of a run with master seed `s` draws its normals from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `p`, so every path is
//! reproducible on its own and independent of how paths are scheduled.

pub mod count;
pub mod grid;
pub mod hermite;
pub mod synth;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use count::{count_zeros, count_zeros_with, graze_threshold, SignCounter, ZeroCount};
pub use grid::CirculantEmbedding;
pub use hermite::{hermite, hermite_closed_form, hermite_product_oracle, HermiteCheck};
pub use synth::{discretize, kernel_approx_error, SpectralNodes};

use crate::error::{Error, Result};
use crate::spectral::Kernel;

/// Default number of nodes per continuous spectral component.
pub const DEFAULT_NODES: usize = 512;
/// Smallest admissible number of nodes per continuous component.
pub const MIN_NODES: usize = 256;
/// Default bound on `max_t |r_J(t) − r(t)|` over `[0, T]`.
pub const DEFAULT_MAX_KERNEL_ERROR: f64 = 1e-2;
/// Number of batches for the batch-means standard error of the variance.
pub const BATCHES: usize = 32;
/// Paths processed together in one matrix product.
const CHUNK: usize = 64;
/// Cap on the entries of one block of the synthesis basis.
const BASIS_BUDGET: usize = 1 << 22;
/// Subdivisions used to refine a grazing interval.
const REFINE_STEPS: usize = 64;

/// Path synthesis method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Sum of random sinusoids at discretised spectral nodes.
    #[default]
    Spectral,
    /// Exact grid marginals by circulant embedding.
    Grid,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Spectral => "spectral",
            Method::Grid => "grid",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Method::Spectral),
            "grid" | "grid-gaussian" => Ok(Method::Grid),
            other => Err(Error::MalformedSpec(format!("unknown synthesis method `{other}` (expected spectral or grid)"))),
        }
    }
}

/// A Monte Carlo experiment on `[0, T]`.
#[derive(Debug, Clone)]
pub struct PathSpec {
    pub kernel: Kernel,
    pub t: f64,
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub method: Method,
    /// Nodes per continuous spectral component.
    pub nodes: usize,
    /// Resolve grazing candidates by evaluating the spectral path on a finer subgrid.
    pub refine: bool,
    pub max_kernel_error: f64,
}

impl PathSpec {
    pub fn new(kernel: Kernel, t: f64, dt: f64, n_paths: usize, seed: u64) -> Self {
        PathSpec {
            kernel,
            t,
            dt,
            n_paths,
            seed,
            method: Method::Spectral,
            nodes: DEFAULT_NODES,
            refine: false,
            max_kernel_error: DEFAULT_MAX_KERNEL_ERROR,
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes;
        self
    }

    pub fn with_refine(mut self, refine: bool) -> Self {
        self.refine = refine;
        self
    }

    /// Checks the grid step, path count and size guard.
    pub fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::ParameterOutOfRange(format!("horizon T must be positive and finite, got {}", self.t)));
        }
        let dt_max = 0.05f64.min(0.1 / self.kernel.sigma());
        if !(self.dt > 0.0 && self.dt <= dt_max * (1.0 + 1e-12)) {
            return Err(Error::ParameterOutOfRange(format!("dt must lie in (0, {dt_max}], got {}", self.dt)));
        }
        if self.n_paths < 100 {
            return Err(Error::ParameterOutOfRange(format!("need at least 100 paths, got {}", self.n_paths)));
        }
        if self.t / self.dt > 1e7 {
            return Err(Error::SizeGuard(format!("T/dt = {} exceeds 1e7", self.t / self.dt)));
        }
        if self.method == Method::Spectral && self.nodes < MIN_NODES {
            return Err(Error::ParameterOutOfRange(format!("need at least {MIN_NODES} spectral nodes, got {}", self.nodes)));
        }
        Ok(())
    }

    /// `(n_steps, h)` of the uniform grid `kh`, `k = 0..=n_steps`, with `h = T/n_steps ≤ dt`.
    pub fn grid(&self) -> (usize, f64) {
        let n = (self.t / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t / n as f64)
    }
}

/// Generator for path `path` of a run with master seed `seed`.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Prepared sampler shared by all paths of a run.
enum Sampler {
    Spectral { nodes: SpectralNodes, amp: Vec<f64> },
    Grid(CirculantEmbedding),
}

impl Sampler {
    fn new(spec: &PathSpec) -> Result<(Sampler, f64)> {
        let (n, h) = spec.grid();
        match spec.method {
            Method::Spectral => {
                let measure = spec.kernel.measure().ok_or_else(|| Error::Unsupported(format!("kernel {} has no spectral measure", spec.kernel.id())))?;
                let nodes = discretize(measure, spec.nodes)?;
                let err = kernel_approx_error(&spec.kernel, &nodes, spec.t)?;
                if err > spec.max_kernel_error {
                    return Err(Error::Discretization {
                        error: err,
                        threshold: spec.max_kernel_error,
                    });
                }
                let amp = nodes.weights.iter().map(|w| w.sqrt()).collect();
                Ok((Sampler::Spectral { nodes, amp }, err))
            }
            Method::Grid => {
                let e = CirculantEmbedding::new(&spec.kernel, h, n)?;
                let err = e.clipped;
                Ok((Sampler::Grid(e), err))
            }
        }
    }
}

/// Coefficients `(√w_j ξ_j, √w_j η_j)` of one spectral path.
fn spectral_coeffs(amp: &[f64], rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let mut a = Vec::with_capacity(amp.len());
    let mut b = Vec::with_capacity(amp.len());
    for s in amp {
        let xi: f64 = rng.sample(StandardNormal);
        let eta: f64 = rng.sample(StandardNormal);
        a.push(s * xi);
        b.push(s * eta);
    }
    (a, b)
}

/// `Σ_j a_j cos(λ_j t) + b_j sin(λ_j t)`.
fn spectral_eval(freqs: &[f64], a: &[f64], b: &[f64], t: f64) -> f64 {
    freqs.iter().zip(a.iter().zip(b)).map(|(l, (x, y))| {
        let (s, c) = (l * t).sin_cos();
        x * c + y * s
    }).sum()
}

/// One sampled path on the grid `kh`, `k = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    pub h: f64,
    pub values: Vec<f64>,
    synth: Option<(Vec<f64>, Vec<f64>, Vec<f64>)>,
}

impl SampledPath {
    /// Value at an arbitrary time when the path is a finite sum of sinusoids.
    pub fn eval(&self, t: f64) -> Option<f64> {
        self.synth.as_ref().map(|(f, a, b)| spectral_eval(f, a, b, t))
    }

    /// Zero count with optional refinement of grazing candidates.
    pub fn count_zeros(&self, graze_eps: f64, refine: bool) -> ZeroCount {
        match (&self.synth, refine) {
            (Some((f, a, b)), true) => {
                let g = |tau: f64| spectral_eval(f, a, b, tau * self.h);
                count_zeros_with(&self.values, graze_eps, Some((&g, REFINE_STEPS)))
            }
            _ => count_zeros(&self.values, graze_eps),
        }
    }
}

/// Samples path `path_index` of `spec` on its grid.
pub fn sample_path(spec: &PathSpec, path_index: u64) -> Result<SampledPath> {
    spec.validate()?;
    let (n, h) = spec.grid();
    let (sampler, _) = Sampler::new(spec)?;
    let mut rng = path_rng(spec.seed, path_index);
    match sampler {
        Sampler::Spectral { nodes, amp } => {
            let (a, b) = spectral_coeffs(&amp, &mut rng);
            let values = (0..=n).map(|k| spectral_eval(&nodes.freqs, &a, &b, k as f64 * h)).collect();
            Ok(SampledPath {
                h,
                values,
                synth: Some((nodes.freqs, a, b)),
            })
        }
        Sampler::Grid(e) => {
            let z: Vec<f64> = (0..2 * e.size()).map(|_| rng.sample(StandardNormal)).collect();
            let mut values = Vec::new();
            e.sample(&z, &mut values);
            Ok(SampledPath { h, values, synth: None })
        }
    }
}

/// Zero-count statistics over the paths of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroCountStats {
    pub kernel_id: String,
    #[serde(rename = "T")]
    pub t: f64,
    /// Effective grid step `T/n_steps`.
    pub dt: f64,
    pub paths: usize,
    pub seed: u64,
    pub method: Method,
    pub mean: f64,
    pub mean_se: f64,
    pub var: f64,
    pub var_se: f64,
    pub grazing_events: u64,
    /// `max_t |r_J − r|` for spectral synthesis; the clipped embedding mass for the grid method.
    pub kernel_approx_error: f64,
    pub nodes: usize,
    pub batches: usize,
    pub refined: bool,
    #[serde(skip)]
    pub counts: Vec<u64>,
}

impl ZeroCountStats {
    /// Sign-change counts on a grid of step `dt` miss pairs of zeros closer than
    /// about `dt`; the grazing count is the logged proxy for that bias.
    pub fn bias_note(&self) -> String {
        format!(
            "grid counting at dt={} with {} grazing candidates over {} paths ({})",
            self.dt,
            self.grazing_events,
            self.paths,
            if self.refined { "refined on a subgrid" } else { "not refined" }
        )
    }
}

/// Sample mean and unbiased sample variance.
fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Mean, variance and their standard errors; the variance error from batch means.
fn summarise(counts: &[u64]) -> (f64, f64, f64, f64, usize) {
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let n = xs.len();
    let (mean, var) = mean_var(&xs);
    let batches = BATCHES.min(n / 2).max(2);
    let batch_vars: Vec<f64> = (0..batches)
        .map(|b| {
            let lo = b * n / batches;
            let hi = (b + 1) * n / batches;
            mean_var(&xs[lo..hi]).1
        })
        .collect();
    let (_, bv) = mean_var(&batch_vars);
    (mean, (var / n as f64).sqrt(), var, (bv / batches as f64).sqrt(), batches)
}

/// `ψ(t) = A cos(σt + α)`, subtracted from the path before counting.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Level {
    a: f64,
    freq: f64,
    phase: f64,
}

impl Level {
    fn at(&self, t: f64) -> f64 {
        self.a * (self.freq * t + self.phase).cos()
    }
}

fn run(spec: &PathSpec, level: Option<Level>) -> Result<ZeroCountStats> {
    spec.validate()?;
    let (n, h) = spec.grid();
    let (sampler, approx_err) = Sampler::new(spec)?;
    let eps = graze_threshold(spec.kernel.sigma2(), h);
    let psi = |t: f64| level.map_or(0.0, |l| l.at(t));
    let mut counters = vec![SignCounter::new(eps); spec.n_paths];
    let refine = spec.refine && matches!(sampler, Sampler::Spectral { .. });
    match &sampler {
        Sampler::Spectral { nodes, amp } => {
            let j = nodes.len();
            let rows = (BASIS_BUDGET / (2 * j)).max(256);
            let mut start = 0;
            while start <= n {
                let end = (start + rows).min(n + 1);
                let mut basis = Array2::<f64>::zeros((end - start, 2 * j));
                for (i, mut row) in basis.rows_mut().into_iter().enumerate() {
                    let t = (start + i) as f64 * h;
                    for (k, l) in nodes.freqs.iter().enumerate() {
                        let (s, c) = (l * t).sin_cos();
                        row[k] = c;
                        row[j + k] = s;
                    }
                }
                counters.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
                    let p0 = ci * CHUNK;
                    let mut coeffs = Array2::<f64>::zeros((2 * j, chunk.len()));
                    let mut per_path = Vec::with_capacity(chunk.len());
                    for k in 0..chunk.len() {
                        let (a, b) = spectral_coeffs(amp, &mut path_rng(spec.seed, (p0 + k) as u64));
                        for m in 0..j {
                            coeffs[[m, k]] = a[m];
                            coeffs[[j + m, k]] = b[m];
                        }
                        per_path.push((a, b));
                    }
                    let vals = basis.dot(&coeffs);
                    for (k, counter) in chunk.iter_mut().enumerate() {
                        let (a, b) = &per_path[k];
                        for i in 0..end - start {
                            let t = (start + i) as f64 * h;
                            if let Some(g) = counter.push(vals[[i, k]] - psi(t)) {
                                if refine {
                                    let f = |tau: f64| spectral_eval(&nodes.freqs, a, b, tau * h) - psi(tau * h);
                                    counter.add_refined(count::refine_interval(&f, g.index as f64 - 1.0, g.index as f64 + 1.0, REFINE_STEPS));
                                }
                            }
                        }
                    }
                });
                start = end;
            }
        }
        Sampler::Grid(e) => {
            counters.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
                let mut values = Vec::new();
                for (k, counter) in chunk.iter_mut().enumerate() {
                    let mut rng = path_rng(spec.seed, (ci * CHUNK + k) as u64);
                    let z: Vec<f64> = (0..2 * e.size()).map(|_| rng.sample(StandardNormal)).collect();
                    e.sample(&z, &mut values);
                    for (i, v) in values.iter().enumerate() {
                        counter.push(v - psi(i as f64 * h));
                    }
                }
            });
        }
    }
    let counts: Vec<u64> = counters.iter().map(|c| c.count()).collect();
    let grazing_events = counters.iter().map(|c| c.grazing()).sum();
    let (mean, mean_se, var, var_se, batches) = summarise(&counts);
    Ok(ZeroCountStats {
        kernel_id: spec.kernel.id().to_string(),
        t: spec.t,
        dt: h,
        paths: spec.n_paths,
        seed: spec.seed,
        method: spec.method,
        mean,
        mean_se,
        var,
        var_se,
        grazing_events,
        kernel_approx_error: approx_err,
        nodes: match &sampler {
            Sampler::Spectral { nodes, .. } => nodes.len(),
            Sampler::Grid(e) => e.size(),
        },
        batches,
        refined: refine,
        counts,
    })
}

/// Runs all paths of `spec` and aggregates the zero counts.
pub fn estimate_moments(spec: &PathSpec) -> Result<ZeroCountStats> {
    run(spec, None)
}

/// Counts solutions of `f(t) = A cos(σt + α)` on `[0, πJ/σ]`; the horizon of `spec` is replaced.
pub fn crossings_of_cosine(spec: &PathSpec, a: f64, alpha: f64, j: u32) -> Result<ZeroCountStats> {
    let has_continuous = spec.kernel.measure().is_some_and(|m| m.has_continuous_component());
    if !has_continuous {
        return Err(Error::Unsupported("cosine crossings need a spectral measure with a continuous component".into()));
    }
    if j == 0 || !a.is_finite() || !alpha.is_finite() {
        return Err(Error::ParameterOutOfRange(format!("need J >= 1 and finite A, alpha; got J={j}, A={a}, alpha={alpha}")));
    }
    let sigma = spec.kernel.sigma();
    let mut s = spec.clone();
    s.t = PI * j as f64 / sigma;
    run(&s, Some(Level { a, freq: sigma, phase: alpha }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::CatalogSpec;

    fn spec(c: CatalogSpec, t: f64, paths: usize) -> PathSpec {
        PathSpec::new(Kernel::from_catalog(&c).unwrap(), t, 0.01, paths, 42)
    }

    #[test]
    fn validation_rejects_coarse_grids_and_few_paths() {
        let k = Kernel::from_catalog(&CatalogSpec::Gaussian).unwrap();
        assert!(PathSpec::new(k.clone(), 10.0, 0.08, 200, 1).validate().is_err());
        assert!(PathSpec::new(k.clone(), 10.0, 0.01, 50, 1).validate().is_err());
        assert!(PathSpec::new(k, 1e6, 0.01, 200, 1).validate().is_err());
    }

    #[test]
    fn degenerate_path_is_a_cosine() {
        let s = spec(CatalogSpec::Cosine { sigma: 1.0 }, 20.0, 100);
        let p = sample_path(&s, 3).unwrap();
        let (x, y) = (p.values[0], p.eval(PI / 2.0).unwrap());
        let amp = (x * x + y * y).sqrt();
        let phase = (-y).atan2(x);
        for (k, v) in p.values.iter().enumerate() {
            let t = k as f64 * p.h;
            assert!((v - amp * (t + phase).cos()).abs() < 1e-12);
        }
        let z = p.count_zeros(1e-4, false).zeros;
        assert!(z == 6 || z == 7);
    }

    #[test]
    fn counts_do_not_depend_on_thread_count() {
        let s = spec(CatalogSpec::Gaussian, 5.0, 200);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| estimate_moments(&s)).unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| estimate_moments(&s)).unwrap();
        assert_eq!(one.counts, three.counts);
    }

    #[test]
    fn streaming_counts_match_single_paths() {
        let s = spec(CatalogSpec::Sinc, 10.0, 100);
        let stats = estimate_moments(&s).unwrap();
        let eps = graze_threshold(s.kernel.sigma2(), s.grid().1);
        for p in [0u64, 17, 99] {
            let path = sample_path(&s, p).unwrap();
            assert_eq!(path.count_zeros(eps, false).zeros, stats.counts[p as usize]);
        }
    }

    #[test]
    fn grid_method_matches_kac_rice() {
        let s = spec(CatalogSpec::Gaussian, 10.0, 2000).with_method(Method::Grid);
        let st = estimate_moments(&s).unwrap();
        let target = s.kernel.sigma() * 10.0 / PI;
        assert!((st.mean - target).abs() < 4.0 * st.mean_se, "{} vs {target} ± {}", st.mean, st.mean_se);
    }

    #[test]
    fn atomic_only_measure_has_no_cosine_crossing_lemma() {
        let s = spec(CatalogSpec::Atomic { atoms: vec![(1.0, 0.5), (2.0, 0.5)] }, 10.0, 100);
        assert!(matches!(crossings_of_cosine(&s, 1.0, 0.0, 5), Err(Error::Unsupported(_))));
    }
}
