//! End-to-end checks of the command line through the in-process entry point.

use std::path::PathBuf;

use serde_json::Value;
use zerovar::cli::{exit_code, run, EXIT_BUDGET, EXIT_IDENTITY, EXIT_OK, EXIT_USAGE};
use zerovar::Error;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("zerovar").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// CSV without the wall-time trailer, which is the only nondeterministic part.
fn body(csv: &str) -> String {
    csv.lines().filter(|l| !l.starts_with("# wall_ms")).collect::<Vec<_>>().join("\n")
}

fn scratch_file(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("zerovar-cli-{}-{name}", std::process::id()))
}

#[test]
fn verify_reports_json_and_succeeds() {
    let (code, out, _) = call(&["verify", "--qmax", "4", "--bound-samples", "200"]);
    assert_eq!(code, EXIT_OK);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["tool"], "zerovar");
    assert_eq!(doc["config"]["command"], "verify");
    let results = doc["results"].as_array().unwrap();
    assert!(!results.is_empty());
    assert!(results.iter().all(|r| r["status"] == "pass"), "{out}");
}

#[test]
fn csv_starts_with_version_and_config() {
    let (code, out, _) = call(&["variance", "--kernel", r#"{"catalog":"gaussian"}"#, "--T", "5", "--method", "v1"]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("# zerovar "));
    let config: Value = serde_json::from_str(lines.next().unwrap().strip_prefix("# config: ").unwrap()).unwrap();
    assert_eq!(config["command"], "variance");
    assert_eq!(config["T"], 5.0);
    assert!(lines.next().unwrap().starts_with("kernel_id,T,method"));
    assert!(out.lines().any(|l| l.starts_with("# wall_ms")));
}

#[test]
fn config_echo_reproduces_the_run() {
    let args = ["sweep", "--kernel", r#"{"catalog":"sinc"}"#, "--T", "2,5", "--seed", "9"];
    let (code, first, _) = call(&args);
    assert_eq!(code, EXIT_OK);
    let path = scratch_file("echo.csv");
    std::fs::write(&path, &first).unwrap();
    let (code, second, _) = call(&["--config", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(code, EXIT_OK);
    assert_eq!(body(&first), body(&second));
}

#[test]
fn json_output_can_be_fed_back() {
    let (code, first, _) = call(&["--format", "json", "explore", "--q", "2", "--resolution", "16"]);
    assert_eq!(code, EXIT_OK);
    let path = scratch_file("echo.json");
    std::fs::write(&path, &first).unwrap();
    let (code, second, _) = call(&["--config", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(code, EXIT_OK);
    let (a, b): (Value, Value) = (serde_json::from_str(&first).unwrap(), serde_json::from_str(&second).unwrap());
    assert_eq!(a["config"], b["config"]);
    assert_eq!(a["results"], b["results"]);
}

#[test]
fn simulation_is_identical_across_thread_counts() {
    let sim = |threads: &str| {
        let (code, out, err) = call(&["simulate", "--kernel", r#"{"catalog":"sinc"}"#, "--T", "5", "--paths", "300", "--threads", threads]);
        assert_eq!(code, EXIT_OK, "{err}");
        body(&out)
    };
    assert_eq!(sim("1"), sim("3"));
}

#[test]
fn out_flag_writes_a_file() {
    let path = scratch_file("out.csv");
    let (code, stdout, _) = call(&["--out", path.to_str().unwrap(), "variance", "--kernel", r#"{"catalog":"bessel_j0"}"#, "--T", "3", "--method", "v1"]);
    let written = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(code, EXIT_OK);
    assert!(stdout.is_empty());
    assert!(written.contains("bessel_j0"));
}

#[test]
fn malformed_input_exits_with_usage_status() {
    let cases: [&[&str]; 5] = [
        &["variance", "--kernel", r#"{"catalog":"nonesuch"}"#, "--T", "5"],
        &["variance", "--kernel", "{not json", "--T", "5"],
        &["simulate", "--kernel", r#"{"catalog":"gaussian"}"#, "--cosine", "1,0.7"],
        &["frobnicate"],
        &[],
    ];
    for args in cases {
        let (code, _, err) = call(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}: {err}");
        assert!(!err.is_empty());
    }
}

#[test]
fn coarse_discretisation_exits_with_budget_status() {
    let (code, _, err) = call(&["simulate", "--kernel", r#"{"catalog":"gaussian"}"#, "--nodes", "256", "--paths", "100"]);
    assert_eq!(code, EXIT_BUDGET, "{err}");
    assert!(err.contains("discretization"));
}

#[test]
fn error_kinds_map_to_statuses() {
    assert_eq!(exit_code(&Error::IdentityViolation("x".into())), EXIT_IDENTITY);
    assert_eq!(exit_code(&Error::Embedding("x".into())), EXIT_BUDGET);
    assert_eq!(exit_code(&Error::UnknownCatalog("x".into())), EXIT_USAGE);
    assert_eq!(exit_code(&Error::MalformedSpec("x".into())), EXIT_USAGE);
}

#[test]
fn help_goes_to_stdout() {
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("simulate"));
}
