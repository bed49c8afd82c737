//! End-to-end tests of the command frontend: every command against the
//! shipped configurations, plus the determinism and error contracts.

use std::path::{Path, PathBuf};

use fevo::cli::{dispatch, Command};
use fevo::config::{parse_config, parse_config_str, SimConfig};

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples/configs")
        .join(name)
}

fn load(name: &str) -> SimConfig {
    parse_config(&config_path(name)).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn check_flags_discontinuity_and_exits_zero() {
    let cfg = load("piecewise_drift.toml");
    let dir = tempfile::tempdir().unwrap();
    let status = dispatch(Command::Check, &cfg, "deadbeef", dir.path()).unwrap();
    assert_eq!(status, 0, "check must pass on the piecewise scenario");
    let report = read(dir.path(), "report.txt");
    assert!(report.contains("# seed=42 config_sha256=deadbeef"));
    assert!(
        report.contains("check.symbol.time_discontinuity.measured = 1"),
        "discontinuity flag missing:\n{report}"
    );
    assert!(report.contains("check.piecewise.chain_terminal"));
    assert!(report.contains("check.verdict = PASS"));
    assert!(dir.path().join("report.csv").exists());
}

#[test]
fn simulate_same_seed_is_byte_identical() {
    let cfg = load("piecewise_drift.toml");
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    assert_eq!(dispatch(Command::Simulate, &cfg, "h", d1.path()).unwrap(), 0);
    assert_eq!(dispatch(Command::Simulate, &cfg, "h", d2.path()).unwrap(), 0);
    assert_eq!(read(d1.path(), "paths.csv"), read(d2.path(), "paths.csv"));
}

#[test]
fn simulate_header_and_golden_terminal() {
    let cfg = load("piecewise_drift.toml");
    let dir = tempfile::tempdir().unwrap();
    dispatch(Command::Simulate, &cfg, "cafe", dir.path()).unwrap();
    let text = read(dir.path(), "paths.csv");
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "# seed=42 config_sha256=cafe");
    assert_eq!(lines.next().unwrap(), "path,k,t,x1");
    // deterministic drift: every path ends at exactly 1.5
    for line in text.lines().filter(|l| l.ends_with(",1.5")) {
        assert!(line.contains(",10,"), "only the terminal row hits 1.5: {line}");
    }
    assert_eq!(text.lines().filter(|l| l.ends_with(",1.5")).count(), 4);
}

#[test]
fn spacetime_adds_time_column() {
    let cfg = load("piecewise_drift.toml");
    let dir = tempfile::tempdir().unwrap();
    dispatch(Command::Spacetime, &cfg, "h", dir.path()).unwrap();
    let text = read(dir.path(), "spacetime.csv");
    assert!(text.lines().nth(1).unwrap().starts_with("path,k,t,s,x1"));
    // row k of path 0: s coordinate equals the repeated-addition lattice
    let row: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(row[2], "0"); // t
    assert_eq!(row[3], "0"); // s = s0
}

#[test]
fn probe_symbol_report() {
    let cfg = load("brownian.toml");
    let dir = tempfile::tempdir().unwrap();
    let status = dispatch(Command::ProbeSymbol, &cfg, "h", dir.path()).unwrap();
    assert_eq!(status, 0);
    let txt = read(dir.path(), "cf_report.txt");
    assert!(txt.contains("empirical_cf.max_deviation"));
    assert!(txt.contains("verdict = PASS"));
    let csv = read(dir.path(), "cf_report.csv");
    assert!(csv.lines().nth(1).unwrap().starts_with("scenario,check,measured"));
}

#[test]
fn generator_apply_writes_grid() {
    let cfg = load("brownian.toml");
    let dir = tempfile::tempdir().unwrap();
    dispatch(Command::Generator, &cfg, "h", dir.path()).unwrap();
    let text = read(dir.path(), "generator.csv");
    assert!(text.lines().nth(1).unwrap().starts_with("x,f,Af"));
    // Af = f''/2 for Q = 1: at x = 0 the value is -1/2
    let center = text
        .lines()
        .find(|l| l.starts_with("0,"))
        .expect("x = 0 row");
    let af: f64 = center.split(',').nth(2).unwrap().parse().unwrap();
    assert!((af + 0.5).abs() <= 1e-6, "Af(0) = {af}");
}

#[test]
fn chernoff_meta_residuals() {
    let cfg = load("brownian.toml");
    let dir = tempfile::tempdir().unwrap();
    dispatch(Command::Chernoff, &cfg, "h", dir.path()).unwrap();
    let meta: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "chernoff_meta.json")).unwrap();
    let residual = meta["evolution_property_residual"].as_f64().unwrap();
    assert!(residual <= 1e-8, "property residual {residual}");
    assert!(meta["forward_equation_residual"].as_f64().unwrap() <= 0.01);
    assert!(meta["backward_equation_residual"].as_f64().unwrap() <= 0.01);
    let csv = read(dir.path(), "chernoff.csv");
    assert!(csv.lines().nth(1).unwrap().starts_with("x,g,Ug"));
    // U(0,1) of the standard Gaussian evaluates to 2^{-1/2} at 0
    let center = csv.lines().find(|l| l.starts_with("0,")).unwrap();
    let ug: f64 = center.split(',').nth(2).unwrap().parse().unwrap();
    assert!((ug - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-6);
}

#[test]
fn simulate_terminal_retention() {
    let cfg = load("jump_diffusion.toml");
    let dir = tempfile::tempdir().unwrap();
    dispatch(Command::Simulate, &cfg, "h", dir.path()).unwrap();
    let text = read(dir.path(), "terminal.csv");
    assert!(text.lines().nth(1).unwrap().starts_with("path,t,x1"));
    assert_eq!(text.lines().count(), 2 + 100);
}

#[test]
fn overrides_change_the_run() {
    let mut cfg = load("piecewise_drift.toml");
    cfg.run.paths = 2;
    cfg.run.seed = 9;
    let dir = tempfile::tempdir().unwrap();
    dispatch(Command::Simulate, &cfg, "h", dir.path()).unwrap();
    let text = read(dir.path(), "paths.csv");
    assert!(text.starts_with("# seed=9"));
    assert_eq!(text.lines().filter(|l| l.ends_with(",1.5")).count(), 2);
}

#[test]
fn strict_config_errors() {
    // unknown key is named
    let bad = r#"
[symbol]
dimension = 1
driftt = ["1"]

[run]
t0 = 0.0
T = 1.0
n = 10
x0 = [0.0]
paths = 1
seed = 1
"#;
    let err = parse_config_str(bad, "x").unwrap_err();
    assert!(err.to_string().contains("driftt"), "{err}");

    // alpha = 2 gets the redirect to Q
    let alpha2 = bad.replace("driftt = [\"1\"]", "stable = { alpha = 2.0, scale = \"1\" }");
    let err = parse_config_str(&alpha2, "x").unwrap_err();
    assert!(err.to_string().contains("diffusion matrix Q"), "{err}");
}

#[test]
fn binary_smoke_check() {
    let out = tempfile::tempdir().unwrap();
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_fevo"))
        .args([
            "check",
            "--config",
            config_path("piecewise_drift.toml").to_str().unwrap(),
            "--out",
            out.path().to_str().unwrap(),
        ])
        .status()
        .expect("binary runs");
    assert!(status.success(), "fevo check exited with {status}");
    assert!(out.path().join("report.txt").exists());
}

#[test]
fn binary_reports_machine_readable_errors() {
    let out = tempfile::tempdir().unwrap();
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_fevo"))
        .args([
            "simulate",
            "--config",
            "/nonexistent/config.toml",
            "--out",
            out.path().to_str().unwrap(),
        ])
        .output()
        .expect("binary runs");
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    let record: serde_json::Value =
        serde_json::from_str(stderr.lines().last().unwrap()).expect("stderr is JSON");
    assert_eq!(record["kind"], "io");
}
