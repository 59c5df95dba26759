//! Command-line entry point: `verify`, `variance`, `sweep`, `simulate` and `explore`.
//!
//! Exit status: 0 on success, 1 on an identity violation, 2 on a usage error,
//! 3 when a numerical budget is exhausted.

pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::chaos::{bound_check_prop52, explore_rq_max, verify_all, IdentityReport, Status};
use crate::error::Error;
use crate::mc::{crossings_of_cosine, estimate_moments, Method, PathSpec, DEFAULT_NODES};
use crate::spectral::{kac_rice_mean, CatalogSpec, Kernel, KernelSpec};
use crate::variance::{
    cancellation_check, cantor_growth, key_integral, lower_bound_thm12, parseval_dual, special_atom_scaling, v1, variance_chaos, ChaosOptions, Truncation, DEFAULT_TOL,
};
use output::{config_from_text, Artifact, Cell, Format};

/// Exit status of a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status when an exact identity or bound fails.
pub const EXIT_IDENTITY: i32 = 1;
/// Exit status for malformed input.
pub const EXIT_USAGE: i32 = 2;
/// Exit status when quadrature, discretisation or embedding budgets are exhausted.
pub const EXIT_BUDGET: i32 = 3;

/// Maps a library error onto the exit status contract.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::IdentityViolation(_) => EXIT_IDENTITY,
        Error::QuadratureBudget { .. } | Error::Discretization { .. } | Error::Embedding(_) => EXIT_BUDGET,
        _ => EXIT_USAGE,
    }
}

fn parse_json(s: &str) -> Result<Value, String> {
    serde_json::from_str(s).map_err(|e| format!("not valid JSON: {e}"))
}

#[derive(Debug, Parser)]
#[command(name = "zerovar", version, about = "Variance of the number of zeros of stationary Gaussian processes")]
pub struct Cli {
    /// Master seed for Monte Carlo runs.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (defaults to ZEROVAR_THREADS, then the available parallelism).
    #[arg(long, global = true, env = "ZEROVAR_THREADS")]
    pub threads: Option<usize>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; verify defaults to json, everything else to csv.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Re-run the config echoed in a previous output file, or a bare config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

/// Subcommands with their parameters; this is also the serialised run config.
#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Check the exact chaos identities and the pointwise quotient bound.
    Verify(VerifyArgs),
    /// Evaluate the variance of the zero count at one horizon.
    Variance(VarianceArgs),
    /// Tabulate key quantities over a grid of horizons or cutoffs.
    Sweep(SweepArgs),
    /// Monte Carlo estimate of the mean and variance of the zero count.
    Simulate(SimulateArgs),
    /// Search for the largest values of the quotient polynomials.
    Explore(ExploreArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    /// Largest chaos order checked.
    #[arg(long, default_value_t = 16)]
    pub qmax: u32,
    /// Lattice points per bound check (0 skips the bound checks).
    #[arg(long, default_value_t = 10_000)]
    pub bound_samples: usize,
    /// Values of M for the bound checks, on orders up to min(qmax, 10).
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.5, 0.9, 1.0])]
    pub m: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceMethod {
    Chaos,
    V1,
    Parseval,
    All,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VarianceArgs {
    /// Kernel spec as JSON, e.g. '{"catalog":"gaussian"}'.
    #[arg(long, value_parser = parse_json)]
    pub kernel: Value,
    /// Horizon T.
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t: f64,
    #[arg(long, value_enum, default_value = "chaos")]
    pub method: VarianceMethod,
    /// Fixed number of chaos orders (tolerance-driven when absent).
    #[arg(long = "Q")]
    #[serde(rename = "Q")]
    pub q: Option<u32>,
    /// Split point T0 of the tail bound (scanned for when absent).
    #[arg(long = "T0")]
    #[serde(rename = "T0")]
    pub t0: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Skip the closed-form sum of the discarded chaos orders.
    #[arg(long)]
    pub no_resum: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Series {
    /// I(T), V1, the lower bound and the mean zero count.
    Basic,
    /// The basic columns plus the chaos total.
    Chaos,
    /// Growth of T·I(T) against T²2^{−M_T} for a Bernoulli kernel.
    Cantor,
    /// I_θ(T)/I(T) for each θ.
    SpecialAtom,
    /// Truncated square integrals of the cancellation density over the cutoffs.
    Cancellation,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    /// Kernel spec as JSON (not needed for the cancellation series).
    #[arg(long, value_parser = parse_json)]
    pub kernel: Option<Value>,
    #[arg(long, value_enum, default_value = "basic")]
    pub series: Series,
    /// Explicit horizons.
    #[arg(long = "T", value_delimiter = ',')]
    #[serde(rename = "T", default)]
    pub t: Vec<f64>,
    /// Horizon grid `log:a:b:n` or `lin:a:b:n`; a bare `a:b:n` is log-spaced.
    #[arg(long, visible_alias = "T-grid")]
    pub grid: Option<String>,
    /// Special-atom weights.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.5, 0.9])]
    pub theta: Vec<f64>,
    /// Cancellation exponent.
    #[arg(long, default_value_t = 0.75)]
    pub alpha: f64,
    /// Cancellation support edge.
    #[arg(long = "M", default_value_t = 2.0)]
    #[serde(rename = "M")]
    pub m: f64,
    /// Singularity cutoffs for the cancellation series.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1e-4, 1e-5, 1e-6, 1e-7, 1e-8])]
    pub cutoffs: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, value_parser = parse_json)]
    pub kernel: Value,
    #[arg(long = "T", default_value_t = 50.0)]
    #[serde(rename = "T")]
    pub t: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 20_000)]
    pub paths: usize,
    #[arg(long, default_value = "spectral", value_parser = |s: &str| s.parse::<Method>().map_err(|e| e.to_string()))]
    pub method: Method,
    /// Count crossings of A·cos(σt + alpha) on [0, πJ/σ] instead of zeros.
    #[arg(long, value_delimiter = ',', value_name = "A,ALPHA,J")]
    pub cosine: Option<Vec<f64>>,
    /// Spectral nodes per continuous component.
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
    /// Refine grazing candidates on a subgrid (spectral method only).
    #[arg(long)]
    pub refine: bool,
    /// Filled from the global --seed.
    #[arg(skip)]
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ExploreArgs {
    /// Chaos orders to explore.
    #[arg(long = "q", value_delimiter = ',', default_values_t = vec![2, 3, 4, 5, 6])]
    pub q: Vec<u32>,
    /// Grid points per face before refinement.
    #[arg(long, default_value_t = 64)]
    pub resolution: usize,
}

fn kernel_of(v: &Value) -> Result<Kernel, Error> {
    Kernel::from_spec(&KernelSpec::from_value(v)?)
}

fn horizons(explicit: &[f64], grid: Option<&str>) -> Result<Vec<f64>, Error> {
    let mut ts = explicit.to_vec();
    if let Some(g) = grid {
        let mut parts: Vec<&str> = g.split(':').collect();
        let bad = || Error::MalformedSpec(format!("grid must look like a:b:n, log:a:b:n or lin:a:b:n, got `{g}`"));
        if parts.len() == 3 {
            parts.insert(0, "log");
        }
        if parts.len() != 4 {
            return Err(bad());
        }
        let a: f64 = parts[1].parse().map_err(|_| bad())?;
        let b: f64 = parts[2].parse().map_err(|_| bad())?;
        let n: usize = parts[3].parse().map_err(|_| bad())?;
        if n < 2 || !(a > 0.0 && b > a) {
            return Err(bad());
        }
        for i in 0..n {
            let u = i as f64 / (n - 1) as f64;
            ts.push(match parts[0] {
                "log" => a * (b / a).powf(u),
                "lin" => a + (b - a) * u,
                _ => return Err(bad()),
            });
        }
    }
    if ts.is_empty() {
        return Err(Error::MalformedSpec("give horizons with --T or --grid".into()));
    }
    Ok(ts)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed().as_secs_f64() * 1e3)
}

/// Outcome of a subcommand: the artifact and whether an identity failed.
struct Outcome {
    artifact: Artifact,
    identity_failed: bool,
}

fn ok(artifact: Artifact) -> Result<Outcome, Error> {
    Ok(Outcome {
        artifact,
        identity_failed: false,
    })
}

fn run_verify(a: &VerifyArgs) -> Result<Outcome, Error> {
    let mut art = Artifact::new(&["identity", "q_lo", "q_hi", "status", "checked", "first_failure"]);
    let (reports, ms) = timed(|| verify_all(a.qmax));
    let mut reports: Vec<IdentityReport> = reports?;
    art.wall("identities", ms);
    let mut failed = reports.iter().any(|r| !r.passed());
    if a.bound_samples > 0 {
        for &m in &a.m {
            let start = Instant::now();
            let mut checked = 0;
            let mut first = None;
            for q in 1..=a.qmax.min(10) {
                let b = bound_check_prop52(q, m, a.bound_samples)?;
                checked += b.samples;
                if b.status != Status::Pass && first.is_none() {
                    first = Some(q);
                }
            }
            let ms = start.elapsed().as_secs_f64() * 1e3;
            failed |= first.is_some();
            reports.push(IdentityReport {
                identity: format!("quotient_bound(M={m})"),
                q_range: [1, a.qmax.min(10)],
                status: if first.is_some() { Status::Fail } else { Status::Pass },
                checked,
                first_failure: first.map(|q| crate::chaos::verify::Failure {
                    q,
                    detail: format!("bound violated at order {q}"),
                    lhs: String::new(),
                    rhs: String::new(),
                }),
                wall_time_ms: ms,
            });
            art.wall(format!("bound M={m}"), ms);
        }
    }
    for r in &reports {
        art.row(vec![
            r.identity.clone().into(),
            r.q_range[0].into(),
            r.q_range[1].into(),
            if r.passed() { "pass" } else { "fail" }.into(),
            r.checked.into(),
            r.first_failure.as_ref().map_or(Cell::Empty, |f| Cell::Text(format!("q={}: {}", f.q, f.detail))),
        ]);
        art.result(r);
    }
    Ok(Outcome {
        artifact: art,
        identity_failed: failed,
    })
}

const VARIANCE_COLUMNS: &[&str] = &[
    "kernel_id",
    "T",
    "method",
    "q",
    "term_value",
    "total",
    "lower_bound",
    "truncation_bound",
    "wall_ms",
    "key_integral",
    "arccos_remainder",
    "resummed_tail",
    "near_origin_bound",
    "q_used",
    "t0",
    "phi_sup",
    "quadrature_error",
];

/// Rows: one per chaos order with its term, then a summary row per method with `q` empty
/// (or `q = 1` for the first-order method, whose total is its single term). The `wall_ms`
/// cells stay empty so bodies are reproducible; the times go to the trailing comment block.
fn run_variance(a: &VarianceArgs) -> Result<Outcome, Error> {
    let kernel = kernel_of(&a.kernel)?;
    let t = a.t;
    let scale = kernel.sigma2() / (std::f64::consts::PI * std::f64::consts::PI);
    let mut art = Artifact::new(VARIANCE_COLUMNS);
    let id = kernel.id().to_string();
    let row = |method: &str, q: Cell, term: Cell, rest: Vec<Cell>| -> Vec<Cell> {
        let mut r = vec![id.clone().into(), t.into(), method.into(), q, term];
        r.extend(rest);
        r.extend(std::iter::repeat(Cell::Empty).take(VARIANCE_COLUMNS.len() - r.len()));
        r
    };
    let wants = |m: VarianceMethod| a.method == m || a.method == VarianceMethod::All;
    if wants(VarianceMethod::Chaos) {
        let opts = ChaosOptions {
            truncation: a.q.map_or(Truncation::Tolerance, Truncation::Fixed),
            tol: a.tol,
            t0: a.t0,
            resum: !a.no_resum,
        };
        let rep = variance_chaos(&kernel, t, &opts)?;
        for (&(q, _), &term) in rep.v_terms.iter().zip(&rep.term_values) {
            art.row(row("chaos", q.into(), term.into(), vec![]));
        }
        art.row(row(
            "chaos",
            Cell::Empty,
            Cell::Empty,
            vec![
                rep.total.into(),
                rep.lower_bound.into(),
                rep.truncation_bound.into(),
                Cell::Empty,
                rep.key_integral.into(),
                rep.remainder_arccos.into(),
                rep.resummed_tail.into(),
                rep.near_origin_bound.into(),
                rep.q_used.into(),
                rep.t0.into(),
                rep.phi_sup.into(),
                rep.quadrature_error.into(),
            ],
        ));
        art.wall("chaos", rep.wall_ms);
        art.result(&json!({"method": "chaos", "report": rep}));
    }
    if wants(VarianceMethod::V1) {
        let (v, ms) = timed(|| v1(&kernel, t, a.tol));
        let v = v?;
        let var = scale * v / 4.0;
        art.row(row("v1", 1u32.into(), var.into(), vec![var.into(), var.into(), Cell::Empty, Cell::Empty, (v / (4.0 * t)).into()]));
        art.wall("v1", ms);
        art.result(&json!({"method": "v1", "kernel_id": id, "T": t, "v1": v, "key_integral": v / (4.0 * t), "variance": var}));
    }
    if wants(VarianceMethod::Parseval) {
        let measure = kernel.measure().ok_or_else(|| Error::Unsupported("kernel has no spectral measure".into()))?;
        let (key, ms) = timed(|| parseval_dual(measure, t, a.tol));
        let key = key?;
        let var = scale * t * key;
        art.row(row("parseval", Cell::Empty, Cell::Empty, vec![var.into(), var.into(), Cell::Empty, Cell::Empty, key.into()]));
        art.wall("parseval", ms);
        art.result(&json!({"method": "parseval", "kernel_id": id, "T": t, "key_integral": key, "variance": var}));
    }
    ok(art)
}

fn run_sweep(a: &SweepArgs) -> Result<Outcome, Error> {
    let kernel = || -> Result<Kernel, Error> {
        let v = a.kernel.as_ref().ok_or_else(|| Error::MalformedSpec("this series needs --kernel".into()))?;
        kernel_of(v)
    };
    let start = Instant::now();
    let art = match a.series {
        Series::Basic | Series::Chaos => {
            let k = kernel()?;
            let chaos = a.series == Series::Chaos;
            let mut art = Artifact::new(if chaos {
                &["kernel_id", "T", "key_integral", "v1", "lower_bound", "kac_rice_mean", "chaos_total"]
            } else {
                &["kernel_id", "T", "key_integral", "v1", "lower_bound", "kac_rice_mean"]
            });
            for t in horizons(&a.t, a.grid.as_deref())? {
                let i = key_integral(&k, t, a.tol)?;
                let lb = lower_bound_thm12(&k, t, a.tol)?;
                let mut row: Vec<Cell> = vec![k.id().into(), t.into(), i.into(), (4.0 * t * i).into(), lb.into(), kac_rice_mean(&k, t).into()];
                let mut res = json!({"T": t, "key_integral": i, "v1": 4.0 * t * i, "lower_bound": lb, "kac_rice_mean": kac_rice_mean(&k, t)});
                if chaos {
                    let rep = variance_chaos(&k, t, &ChaosOptions { tol: a.tol, ..ChaosOptions::default() })?;
                    row.push(rep.total.into());
                    res["chaos_total"] = json!(rep.total);
                }
                art.row(row);
                art.result(&res);
            }
            art
        }
        Series::Cantor => {
            let k = kernel()?;
            let rule = match k.spec() {
                Some(KernelSpec::Catalog(CatalogSpec::Bernoulli(rule))) => rule.clone(),
                _ => return Err(Error::MalformedSpec("the cantor series needs a bernoulli catalog kernel".into())),
            };
            let mut art = Artifact::new(&["kernel_id", "T", "m_t", "predicted_scale", "t_key_integral", "ratio"]);
            for t in horizons(&a.t, a.grid.as_deref())? {
                let g = cantor_growth(&rule, t, a.tol)?;
                art.row(vec![k.id().into(), t.into(), g.m_t.into(), g.predicted_scale.into(), g.t_key_integral.into(), g.ratio().into()]);
                art.result(&json!({"T": t, "m_t": g.m_t, "predicted_scale": g.predicted_scale, "t_key_integral": g.t_key_integral, "ratio": g.ratio()}));
            }
            art
        }
        Series::SpecialAtom => {
            let k = kernel()?;
            let mut art = Artifact::new(&["kernel_id", "T", "theta", "ratio", "expected", "theta0", "phi_sup"]);
            for t in horizons(&a.t, a.grid.as_deref())? {
                for &theta in &a.theta {
                    let s = special_atom_scaling(&k, theta, t, a.tol)?;
                    let expected = (1.0 - theta) * (1.0 - theta);
                    art.row(vec![k.id().into(), t.into(), theta.into(), s.ratio.into(), expected.into(), s.theta0.into(), s.phi_sup.into()]);
                    art.result(&json!({"T": t, "theta": theta, "ratio": s.ratio, "expected": expected, "theta0": s.theta0, "phi_sup": s.phi_sup}));
                }
            }
            art
        }
        Series::Cancellation => {
            let c = cancellation_check(a.alpha, a.m, &a.cutoffs)?;
            let mut art = Artifact::new(&["alpha", "M", "cutoff", "phi_sq", "lambda4_phi_sq", "mu_sq", "mu_sq_limit", "mass", "second_moment"]);
            for (i, &eps) in c.cutoffs.iter().enumerate() {
                art.row(vec![
                    c.alpha.into(),
                    c.m.into(),
                    eps.into(),
                    c.phi_sq[i].into(),
                    c.lambda4_phi_sq[i].into(),
                    c.mu_sq[i].into(),
                    c.mu_sq_limit.into(),
                    c.mass.into(),
                    c.second_moment.into(),
                ]);
            }
            art.result(&c);
            art
        }
    };
    let mut art = art;
    art.wall("sweep", start.elapsed().as_secs_f64() * 1e3);
    ok(art)
}

fn run_simulate(a: &SimulateArgs) -> Result<Outcome, Error> {
    let kernel = kernel_of(&a.kernel)?;
    let spec = PathSpec::new(kernel, a.t, a.dt, a.paths, a.seed).with_method(a.method).with_nodes(a.nodes).with_refine(a.refine);
    let (stats, ms) = match &a.cosine {
        Some(c) => {
            if c.len() != 3 {
                return Err(Error::MalformedSpec(format!("--cosine takes A,alpha,J, got {} values", c.len())));
            }
            let j = c[2];
            if !(j >= 1.0 && j.fract() == 0.0) {
                return Err(Error::MalformedSpec(format!("J in --cosine must be a positive integer, got {j}")));
            }
            let (s, ms) = timed(|| crossings_of_cosine(&spec, c[0], c[1], j as u32));
            (s?, ms)
        }
        None => {
            let (s, ms) = timed(|| estimate_moments(&spec));
            (s?, ms)
        }
    };
    let mut art = Artifact::new(&["kernel_id", "T", "dt", "paths", "seed", "mean", "mean_se", "var", "var_se", "grazing_events", "kernel_approx_error"]);
    art.row(vec![
        stats.kernel_id.clone().into(),
        stats.t.into(),
        stats.dt.into(),
        stats.paths.into(),
        stats.seed.into(),
        stats.mean.into(),
        stats.mean_se.into(),
        stats.var.into(),
        stats.var_se.into(),
        stats.grazing_events.into(),
        stats.kernel_approx_error.into(),
    ]);
    art.result(&json!({"stats": stats, "note": stats.bias_note()}));
    art.wall("simulate", ms);
    ok(art)
}

fn run_explore(a: &ExploreArgs) -> Result<Outcome, Error> {
    let mut art = Artifact::new(&["q", "resolution", "x", "y", "z", "value"]);
    for &q in &a.q {
        let (r, ms) = timed(|| explore_rq_max(q, a.resolution));
        let r = r?;
        art.row(vec![r.q.into(), r.resolution.into(), r.point[0].into(), r.point[1].into(), r.point[2].into(), r.value.into()]);
        art.result(&r);
        art.wall(format!("q={q}"), ms);
    }
    ok(art)
}

fn dispatch(cmd: &Command) -> Result<Outcome, Error> {
    match cmd {
        Command::Verify(a) => run_verify(a),
        Command::Variance(a) => run_variance(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Explore(a) => run_explore(a),
    }
}

/// Resolved configuration of one run, echoed into every output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    pub seed: u64,
    pub format: Format,
}

fn resolve(cli: Cli) -> Result<(RunConfig, Option<usize>, Option<PathBuf>), Error> {
    let loaded: Option<RunConfig> = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let v = config_from_text(&text).ok_or_else(|| Error::MalformedSpec(format!("no config found in {}", path.display())))?;
            Some(serde_json::from_value(v).map_err(|e| Error::MalformedSpec(format!("invalid config in {}: {e}", path.display())))?)
        }
        None => None,
    };
    let mut command = match (cli.command, &loaded) {
        (Some(c), _) => c,
        (None, Some(l)) => l.command.clone(),
        (None, None) => return Err(Error::MalformedSpec("a subcommand or --config is required".into())),
    };
    let seed = cli.seed.or(loaded.as_ref().map(|l| l.seed)).unwrap_or(42);
    if let Command::Simulate(s) = &mut command {
        s.seed = seed;
    }
    let default_format = if matches!(command, Command::Verify(_)) { Format::Json } else { Format::Csv };
    let format = cli.format.or(loaded.as_ref().map(|l| l.format)).unwrap_or(default_format);
    Ok((RunConfig { command, seed, format }, cli.threads, cli.out))
}

/// Parses `args` (including the program name), runs the subcommand and writes the
/// artifact to `--out` or to `stdout`. Diagnostics go to `stderr`. Returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let (config, threads, out) = match resolve(cli) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads.filter(|&n| n > 0) {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start worker pool: {e}");
            return EXIT_USAGE;
        }
    };
    let outcome = pool.install(|| dispatch(&config.command));
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let echo = serde_json::to_value(&config).unwrap_or(Value::Null);
    let text = outcome.artifact.render(config.format, &echo);
    let written = match &out {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => stdout.write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return EXIT_USAGE;
    }
    if outcome.identity_failed {
        let _ = writeln!(stderr, "identity violation: see the failing rows of the report");
        EXIT_IDENTITY
    } else {
        EXIT_OK
    }
}
