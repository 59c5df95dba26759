//! Adaptive Gauss–Kronrod (10/21 point) quadrature.
//!
//! The integrator works on vector-valued integrands so that families of
//! related integrals (for example every chaos term of one variance report)
//! share function evaluations. Panels are first laid out with a maximum width,
//! which keeps oscillatory integrands resolved, and then refined by global
//! bisection of the panel carrying the largest weighted error.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_977_211_156,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights attached to the odd-indexed Kronrod abscissae.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and budget for one integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum width of the initial panels; `f64::INFINITY` disables the cap.
    pub max_panel: f64,
    /// Maximum number of integrand evaluations.
    pub max_evals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-8,
            abs_tol: 1e-300,
            max_panel: f64::INFINITY,
            max_evals: 20_000_000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self
    }

    pub fn with_abs_tol(mut self, tol: f64) -> Self {
        self.abs_tol = tol;
        self
    }

    pub fn with_max_panel(mut self, width: f64) -> Self {
        self.max_panel = width;
        self
    }

    pub fn with_max_evals(mut self, n: usize) -> Self {
        self.max_evals = n;
        self
    }
}

/// Value and error estimate of a scalar integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

/// Values and error estimates of a vector integral.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadVecResult {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub evals: usize,
}

struct Panel {
    a: f64,
    b: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
    score: f64,
    floor: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.score.total_cmp(&other.score) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score.total_cmp(&other.score)
    }
}

/// Evaluates the 21-point Kronrod rule on `[a, b]` for a vector integrand,
/// returning per-component values and QUADPACK-style error estimates.
///
/// The third vector is the roundoff floor `50 ε ∫|f|` below which no error estimate drops.
fn gk21<F>(f: &F, dim: usize, a: f64, b: f64, buf: &mut [Vec<f64>; 21]) -> (Vec<f64>, Vec<f64>, Vec<f64>)
where
    F: Fn(f64, &mut [f64]),
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    for (i, x) in XGK.iter().enumerate() {
        if i < 10 {
            f(c - h * x, &mut buf[2 * i]);
            f(c + h * x, &mut buf[2 * i + 1]);
        } else {
            f(c, &mut buf[20]);
        }
    }
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    let mut floors = vec![0.0; dim];
    for d in 0..dim {
        let fc = buf[20][d];
        let mut kron = WGK[10] * fc;
        let mut gauss = 0.0;
        let mut resabs = WGK[10] * fc.abs();
        for i in 0..10 {
            let f1 = buf[2 * i][d];
            let f2 = buf[2 * i + 1][d];
            kron += WGK[i] * (f1 + f2);
            resabs += WGK[i] * (f1.abs() + f2.abs());
            if i % 2 == 1 {
                gauss += WG[i / 2] * (f1 + f2);
            }
        }
        let mean = 0.5 * kron;
        let mut resasc = WGK[10] * (fc - mean).abs();
        for i in 0..10 {
            resasc += WGK[i] * ((buf[2 * i][d] - mean).abs() + (buf[2 * i + 1][d] - mean).abs());
        }
        let habs = h.abs();
        let resabs = resabs * habs;
        let resasc = resasc * habs;
        let mut err = ((kron - gauss) * h).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        let round = 50.0 * f64::EPSILON * resabs;
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && round > err {
            err = round;
        }
        if !kron.is_finite() {
            err = f64::INFINITY;
        }
        values[d] = kron * h;
        errors[d] = err;
        floors[d] = round;
    }
    (values, errors, floors)
}

fn score(errors: &[f64], weights: &[f64]) -> f64 {
    errors.iter().zip(weights).map(|(e, w)| e * w).sum()
}

fn neumaier(xs: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Integrates a vector integrand over `[a, b]` with interior `breaks`.
///
/// Convergence is declared when `Σ wᵢ errᵢ ≤ max(abs_tol, rel_tol · Σ wᵢ |valueᵢ|)`.
pub fn integrate_vec<F>(
    f: F,
    dim: usize,
    weights: &[f64],
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: &QuadOptions,
) -> Result<QuadVecResult>
where
    F: Fn(f64, &mut [f64]),
{
    assert_eq!(weights.len(), dim, "one error weight per component");
    if a == b {
        return Ok(QuadVecResult {
            values: vec![0.0; dim],
            errors: vec![0.0; dim],
            evals: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = vec![lo];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|x| *x > lo && *x < hi).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    cuts.extend(inner);
    cuts.push(hi);

    let mut buf: [Vec<f64>; 21] = std::array::from_fn(|_| vec![0.0; dim]);
    let mut heap = BinaryHeap::new();
    let mut evals = 0usize;
    for w in cuts.windows(2) {
        let (s, e) = (w[0], w[1]);
        let n = if opts.max_panel.is_finite() && opts.max_panel > 0.0 {
            ((e - s) / opts.max_panel).ceil().max(1.0) as usize
        } else {
            1
        };
        let step = (e - s) / n as f64;
        for k in 0..n {
            let pa = s + step * k as f64;
            let pb = if k + 1 == n { e } else { s + step * (k + 1) as f64 };
            let (values, errors, floors) = gk21(&f, dim, pa, pb, &mut buf);
            evals += 21;
            let sc = score(&errors, weights);
            heap.push(Panel {
                a: pa,
                b: pb,
                values,
                errors,
                score: sc,
                floor: score(&floors, weights),
            });
        }
    }

    let recompute = |heap: &BinaryHeap<Panel>| -> (f64, Vec<f64>, f64) {
        let err = neumaier(heap.iter().map(|p| p.score));
        let vals = (0..dim).map(|d| neumaier(heap.iter().map(|p| p.values[d]))).collect();
        let floor = neumaier(heap.iter().map(|p| p.floor));
        (err, vals, floor)
    };
    // Bisection cannot push an error estimate below the roundoff floor, so an error
    // total made of floors alone is accepted whatever the requested tolerance.
    let accept = |err: f64, totals: &[f64], floor: f64| {
        let total_abs: f64 = totals.iter().zip(weights).map(|(v, w)| w * v.abs()).sum();
        err <= opts.abs_tol.max(opts.rel_tol * total_abs).max(floor * (1.0 + 1e-9))
    };
    let (mut total_err, mut totals, mut total_floor) = recompute(&heap);
    let mut since_refresh = 0usize;
    loop {
        if accept(total_err, &totals, total_floor) {
            // Running sums drift; confirm against a fresh summation before stopping.
            let (e, v, fl) = recompute(&heap);
            total_err = e;
            totals = v;
            total_floor = fl;
            if accept(total_err, &totals, total_floor) {
                break;
            }
        }
        if evals + 42 > opts.max_evals {
            return Err(Error::QuadratureBudget {
                tol: opts.rel_tol,
                evals,
                value: totals.first().copied().unwrap_or(0.0),
                error: total_err,
            });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || worst.score == 0.0 {
            // The panel cannot be split further in floating point; freeze its estimate.
            total_err -= worst.score;
            total_floor -= worst.floor;
            let mut frozen = worst;
            frozen.score = 0.0;
            frozen.floor = 0.0;
            frozen.errors.iter_mut().for_each(|e| *e = 0.0);
            heap.push(frozen);
            if heap.iter().all(|p| p.score == 0.0) {
                break;
            }
            continue;
        }
        total_err -= worst.score;
        total_floor -= worst.floor;
        for d in 0..dim {
            totals[d] -= worst.values[d];
        }
        for (pa, pb) in [(worst.a, mid), (mid, worst.b)] {
            let (values, errors, floors) = gk21(&f, dim, pa, pb, &mut buf);
            evals += 21;
            let sc = score(&errors, weights);
            let fl = score(&floors, weights);
            total_err += sc;
            total_floor += fl;
            for d in 0..dim {
                totals[d] += values[d];
            }
            heap.push(Panel {
                a: pa,
                b: pb,
                values,
                errors,
                score: sc,
                floor: fl,
            });
        }
        since_refresh += 1;
        if since_refresh >= 512 {
            since_refresh = 0;
            let (e, v, fl) = recompute(&heap);
            total_err = e;
            totals = v;
            total_floor = fl;
        }
    }

    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let values = (0..dim)
        .map(|d| sign * neumaier(panels.iter().map(|p| p.values[d])))
        .collect();
    let errors = (0..dim)
        .map(|d| panels.iter().map(|p| p.errors[d]).sum())
        .collect();
    Ok(QuadVecResult {
        values,
        errors,
        evals,
    })
}

/// Integrates a scalar function over `[a, b]` with optional interior breakpoints.
pub fn integrate<F>(f: F, a: f64, b: f64, breaks: &[f64], opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    let r = integrate_vec(|x, out: &mut [f64]| out[0] = f(x), 1, &[1.0], a, b, breaks, opts)?;
    Ok(QuadResult {
        value: r.values[0],
        error: r.errors[0],
        evals: r.evals,
    })
}

/// Integrates `g(λ)·(b − λ)^(−β)` over `[a, b]` for `β < 1` by the substitution
/// `λ = b − s^p` with `p = 1/(1 − β)`, which removes the endpoint singularity.
pub fn integrate_right_singular<F>(g: F, a: f64, b: f64, beta: f64, opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    assert!(beta < 1.0, "singularity must be integrable");
    let p = 1.0 / (1.0 - beta);
    let smax = (b - a).powf(1.0 / p);
    let mut o = *opts;
    o.max_panel = f64::INFINITY;
    integrate(move |s| p * g(b - s.powf(p)), 0.0, smax, &[], &o)
}

/// Integrates `g(λ)·(λ − a)^(−β)` over `[a, b]` for `β < 1`.
pub fn integrate_left_singular<F>(g: F, a: f64, b: f64, beta: f64, opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    assert!(beta < 1.0, "singularity must be integrable");
    let p = 1.0 / (1.0 - beta);
    let smax = (b - a).powf(1.0 / p);
    let mut o = *opts;
    o.max_panel = f64::INFINITY;
    integrate(move |s| p * g(a + s.powf(p)), 0.0, smax, &[], &o)
}

/// Nodes and weights of the 10-point Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss10(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (0..5).flat_map(move |i| {
        let (x, w) = (h * XGK[2 * i + 1], h * WG[i]);
        [(c - x, w), (c + x, w)]
    })
}

/// Integrates `f` over `[a, ∞)` by geometric tail panels `[a + L·2^k, a + L·2^(k+1)]`.
///
/// `tail(x)` must bound `∫_x^∞ |f|`; panels are added until that bound drops below
/// the requested tolerance relative to the accumulated value.
pub fn integrate_to_infinity<F, B>(f: F, a: f64, first: f64, tail: B, opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
    B: Fn(f64) -> f64,
{
    let mut total = integrate(&f, a, a + first, &[], opts)?;
    let mut start = a + first;
    let mut width = first;
    for _ in 0..200 {
        let bound = tail(start);
        if bound <= opts.abs_tol.max(0.1 * opts.rel_tol * total.value.abs()) {
            total.error += bound;
            return Ok(total);
        }
        let piece = integrate(&f, start, start + width, &[], opts)?;
        total.value += piece.value;
        total.error += piece.error;
        total.evals += piece.evals;
        start += width;
        width *= 2.0;
        if total.evals > opts.max_evals {
            break;
        }
    }
    Err(Error::QuadratureBudget {
        tol: opts.rel_tol,
        evals: total.evals,
        value: total.value,
        error: tail(start),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss10_is_exact_to_degree_nineteen() {
        let v: f64 = gauss10(-1.0, 2.0).map(|(x, w)| w * x.powi(19)).sum();
        assert!((v - (2f64.powi(20) - 1.0) / 20.0).abs() < 1e-9);
    }

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x.powi(7) - 3.0 * x * x, 0.0, 2.0, &[], &QuadOptions::default()).unwrap();
        assert!((r.value - (32.0 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_with_panel_cap() {
        let t = 200.0;
        let opts = QuadOptions::default().with_max_panel(std::f64::consts::PI / (4.0 * t)).with_rel_tol(1e-12);
        let r = integrate(|x| (t * x).cos(), 0.0, 1.0, &[], &opts).unwrap();
        assert!((r.value - (t.sin() / t)).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let opts = QuadOptions::default();
        let r = integrate(|x| x.exp(), 1.0, 0.0, &[], &opts).unwrap();
        assert!((r.value + (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn right_singular_beta_integral() {
        // ∫₀¹ λ² (1−λ)^(−3/4) dλ = B(3, 1/4)
        let opts = QuadOptions::default().with_rel_tol(1e-13);
        let r = integrate_right_singular(|l| l * l, 0.0, 1.0, 0.75, &opts).unwrap();
        let exact = 1.0 / 0.25 - 2.0 / 1.25 + 1.0 / 2.25;
        assert!((r.value - exact).abs() < 1e-12, "{} vs {}", r.value, exact);
    }

    #[test]
    fn semi_infinite_gaussian() {
        let opts = QuadOptions::default().with_rel_tol(1e-12);
        let r = integrate_to_infinity(|x| (-x * x).exp(), 0.0, 1.0, |x| (-x * x).exp() / (2.0 * x.max(1e-300)), &opts).unwrap();
        assert!((r.value - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn vector_components_share_nodes() {
        let opts = QuadOptions::default().with_rel_tol(1e-12);
        let r = integrate_vec(
            |x, out: &mut [f64]| {
                out[0] = x.sin();
                out[1] = x.cos();
            },
            2,
            &[1.0, 1.0],
            0.0,
            std::f64::consts::PI,
            &[],
            &opts,
        )
        .unwrap();
        assert!((r.values[0] - 2.0).abs() < 1e-12);
        assert!(r.values[1].abs() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let opts = QuadOptions::default().with_rel_tol(1e-15).with_max_evals(100);
        let r = integrate(|x| (1.0 / x).sin(), 1e-6, 1.0, &[], &opts);
        assert!(matches!(r, Err(Error::QuadratureBudget { .. })));
    }
}
