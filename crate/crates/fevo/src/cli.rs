//! Command-line frontend: configuration loading, dispatch, deterministic
//! output writing.
//!
//! ```text
//! fevo <command> --config <file> --out <dir> [--seed <u64>] [--paths <M>] [--n <steps>] [--workers <W>]
//! ```
//!
//! Commands: `simulate`, `spacetime`, `probe-symbol`, `generator`,
//! `chernoff`, `check`. Flags override the corresponding config keys.
//! Every output file starts with a `# seed=.. config_sha256=..` comment
//! line; numbers are written in shortest round-trip decimal form, so
//! outputs are byte-identical across runs and worker counts for a fixed
//! (config, seed).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::calculus::{
    apply_generator, apply_spacetime_generator, check_positive_maximum, probe_generator,
    OperatorError, PmpOutcome, Side,
};
use crate::chain::{run_ensemble, ChainError, EnsembleData};
use crate::chernoff::{
    apply_step, compose_evolution, evolution_equation_residual, evolution_property_residual,
    ChernoffError, EquationSide,
};
use crate::config::{
    parse_config_str, ConfigError, GeneratorMode, SideName, SimConfig,
};
use crate::field::FieldExpr;
use crate::grid::{FunctionGrid, Grid2D};
use crate::rng::RngStream;
use crate::sampler::increment_cf;
use crate::symbol::SymbolError;
use crate::symbol_probe::{validate_symbol, SymbolProbe};
use crate::validate::{
    empirical_cf_test, generator_coincidence_test, piecewise_drift_oracle, pmp_bump_suite,
    CheckRecord, CoincidenceVerdict, ValidationReport,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Chernoff(#[from] ChernoffError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::Usage(_) => "config",
            CliError::Io { .. } => "io",
            _ => "run",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Run a path ensemble and write CSV trajectories.
    Simulate,
    /// Run the space-time lift of the ensemble.
    Spacetime,
    /// Empirical characteristic function test of the one-step law.
    ProbeSymbol,
    /// Apply or probe the generator on a function grid.
    Generator,
    /// Chernoff-product evolution with residual diagnostics.
    Chernoff,
    /// Full validation suite; exit 0 iff all gating checks pass.
    Check,
}

#[derive(Debug, Parser)]
#[command(name = "fevo", version, about = "Feller evolution simulator and operator calculus")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    Simulate(RunArgs),
    Spacetime(RunArgs),
    ProbeSymbol(RunArgs),
    Generator(RunArgs),
    Chernoff(RunArgs),
    Check(RunArgs),
}

#[derive(Debug, Parser)]
struct RunArgs {
    /// Configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override run.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override run.paths.
    #[arg(long)]
    paths: Option<u64>,
    /// Override run.n.
    #[arg(long)]
    n: Option<u64>,
    /// Override run.workers.
    #[arg(long)]
    workers: Option<usize>,
}

/// Entry point for the `fevo` binary: returns the process exit code.
pub fn main_entry() -> u8 {
    let args = Args::parse();
    let (command, run_args) = match args.command {
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Spacetime(a) => (Command::Spacetime, a),
        Cmd::ProbeSymbol(a) => (Command::ProbeSymbol, a),
        Cmd::Generator(a) => (Command::Generator, a),
        Cmd::Chernoff(a) => (Command::Chernoff, a),
        Cmd::Check(a) => (Command::Check, a),
    };
    match run_command(command, &run_args) {
        Ok(status) => status as u8,
        Err(e) => {
            let record = serde_json::json!({
                "error": e.to_string(),
                "kind": e.kind(),
            });
            eprintln!("{record}");
            2
        }
    }
}

fn run_command(command: Command, args: &RunArgs) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.display().to_string(),
        source,
    })?;
    let hash = hex_digest(text.as_bytes());
    let mut cfg = parse_config_str(&text, &args.config.display().to_string())?;
    if let Some(seed) = args.seed {
        cfg.run.seed = seed;
    }
    if let Some(paths) = args.paths {
        cfg.run.paths = paths;
    }
    if let Some(n) = args.n {
        cfg.run.n = n;
    }
    if let Some(w) = args.workers {
        cfg.run.workers = Some(w);
    }
    cfg.validate()?;
    dispatch(command, &cfg, &hash, &args.out)
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(16);
    for b in &digest[..8] {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Execute one command against a validated config. Returns the process
/// exit status (0 on success; `check` and `probe-symbol` return 1 when a
/// gating check fails).
pub fn dispatch(
    command: Command,
    cfg: &SimConfig,
    config_hash: &str,
    out_dir: &Path,
) -> Result<i32, CliError> {
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    match command {
        Command::Simulate => cmd_simulate(cfg, config_hash, out_dir, false),
        Command::Spacetime => cmd_simulate(cfg, config_hash, out_dir, true),
        Command::ProbeSymbol => cmd_probe_symbol(cfg, config_hash, out_dir),
        Command::Generator => cmd_generator(cfg, config_hash, out_dir),
        Command::Chernoff => cmd_chernoff(cfg, config_hash, out_dir),
        Command::Check => cmd_check(cfg, config_hash, out_dir),
    }
}

fn header(cfg: &SimConfig, hash: &str) -> String {
    format!("# seed={} config_sha256={hash}\n", cfg.run.seed)
}

fn write_out(out_dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    let path = out_dir.join(name);
    std::fs::write(&path, content).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn csv_row(fields: &mut dyn Iterator<Item = f64>) -> String {
    let mut row = String::new();
    for (i, v) in fields.enumerate() {
        if i > 0 {
            row.push(',');
        }
        let _ = write!(row, "{v}");
    }
    row
}

fn cmd_simulate(
    cfg: &SimConfig,
    hash: &str,
    out_dir: &Path,
    spacetime: bool,
) -> Result<i32, CliError> {
    let spec = cfg.ensemble_spec(spacetime)?;
    let ens = run_ensemble(&spec)?;
    let d = cfg.symbol.dimension;
    let mut body = header(cfg, hash);
    let xcols: String = (1..=d).map(|i| format!(",x{i}")).collect();
    match &ens.data {
        EnsembleData::Paths(paths) => {
            let _ = writeln!(body, "path,k,t{xcols}");
            for p in paths {
                let times = p.times();
                for (k, state) in p.states.iter().enumerate() {
                    let head = format!("{},{k},{}", p.stream_id, times[k]);
                    let rest = csv_row(&mut state.iter().copied());
                    let _ = writeln!(body, "{head},{rest}");
                }
            }
            write_out(out_dir, "paths.csv", &body)?;
        }
        EnsembleData::SpaceTimePaths(paths) => {
            let _ = writeln!(body, "path,k,t,s{xcols}");
            for p in paths {
                let mut t = 0.0f64;
                for (k, state) in p.states.iter().enumerate() {
                    let rest = csv_row(&mut state.iter().copied());
                    let _ = writeln!(body, "{},{k},{t},{rest}", p.stream_id);
                    t += p.h;
                }
            }
            write_out(out_dir, "spacetime.csv", &body)?;
        }
        EnsembleData::Terminals { steps, states } => {
            // realized horizon by the same repeated addition as the chain
            let mut t = cfg.run.t0;
            for _ in 0..*steps {
                t += ens.h;
            }
            if spacetime {
                let _ = writeln!(body, "path,t,s{xcols}");
            } else {
                let _ = writeln!(body, "path,t{xcols}");
            }
            for (i, row) in states.iter().enumerate() {
                let rest = csv_row(&mut row.iter().copied());
                let _ = writeln!(body, "{i},{t},{rest}");
            }
            write_out(out_dir, "terminal.csv", &body)?;
        }
    }
    Ok(0)
}

fn probe_xi_set(cfg: &SimConfig) -> Vec<Vec<f64>> {
    let d = cfg.symbol.dimension;
    let (xi_max, xi_points) = match &cfg.probe {
        Some(p) => (p.xi_max.unwrap_or(5.0), p.xi_points.unwrap_or(11)),
        None => (5.0, 11),
    };
    axis_xi_set(d, xi_max, xi_points)
}

/// ξ points along each coordinate axis: `points` values in
/// [-xi_max, xi_max] per axis, zeros elsewhere.
fn axis_xi_set(d: usize, xi_max: f64, points: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for axis in 0..d {
        for k in 0..points {
            let v = -xi_max + 2.0 * xi_max * k as f64 / (points.max(2) - 1) as f64;
            let mut xi = vec![0.0; d];
            xi[axis] = v;
            out.push(xi);
        }
    }
    out
}

fn cmd_probe_symbol(cfg: &SimConfig, hash: &str, out_dir: &Path) -> Result<i32, CliError> {
    let sym = cfg.build_symbol()?;
    let (s, x, h, samples) = match &cfg.probe {
        Some(p) => (
            p.s.unwrap_or(cfg.run.t0),
            p.x.clone().unwrap_or_else(|| cfg.run.x0.clone()),
            p.h.unwrap_or(1.0 / cfg.run.n as f64),
            p.samples.unwrap_or(100_000),
        ),
        None => (
            cfg.run.t0,
            cfg.run.x0.clone(),
            1.0 / cfg.run.n as f64,
            100_000,
        ),
    };
    let xi_set = probe_xi_set(cfg);
    let mut rng = RngStream::new(cfg.run.seed, 0);
    let report = empirical_cf_test(&sym, s, &x, h, &xi_set, samples, &mut rng)?;
    write_out(
        out_dir,
        "cf_report.txt",
        &format!("{}{}", header(cfg, hash), report.to_kv_text()),
    )?;
    write_out(
        out_dir,
        "cf_report.csv",
        &format!("{}{}", header(cfg, hash), report.to_csv()),
    )?;
    Ok(if report.verdict() { 0 } else { 1 })
}

fn parse_f1(text: &str) -> Result<FieldExpr, CliError> {
    FieldExpr::parse(text, 1).map_err(|e| CliError::Usage(format!("test function: {e}")))
}

fn cmd_generator(cfg: &SimConfig, hash: &str, out_dir: &Path) -> Result<i32, CliError> {
    let gen = cfg
        .generator
        .as_ref()
        .ok_or_else(|| CliError::Usage("generator command needs a [generator] section".into()))?;
    let sym = cfg.build_symbol()?;
    let (a, b, points) = cfg.grid_axis();
    let s = gen.s.unwrap_or(cfg.run.t0);
    let fexpr = parse_f1(&gen.f)?;
    match gen.mode {
        GeneratorMode::Apply => {
            let f = grid_from_expr(&fexpr, a, b, points)?;
            let af = apply_generator(&sym, s, &f)?;
            let mut body = format!("{}x,f,Af\n", header(cfg, hash));
            for j in 0..f.len() {
                let _ = writeln!(body, "{},{},{}", f.x(j), f.values[j], af.values[j]);
            }
            write_out(out_dir, "generator.csv", &body)?;
        }
        GeneratorMode::Spacetime => {
            let s_axis = cfg.s_axis();
            let f2 = grid2d_from_expr(&gen.f, s_axis, (a, b, points))?;
            let lf = apply_spacetime_generator(&sym, &f2, false)?;
            let mut body = format!("{}s,x,f,Lf\n", header(cfg, hash));
            for i in 0..f2.n_s() {
                for j in 0..f2.n_x() {
                    let _ = writeln!(
                        body,
                        "{},{},{},{}",
                        f2.s(i),
                        f2.x(j),
                        f2.value(i, j),
                        lf.value(i, j)
                    );
                }
            }
            write_out(out_dir, "generator2d.csv", &body)?;
        }
        GeneratorMode::Probe => {
            let f = grid_from_expr(&fexpr, a, b, points)?;
            let side = match gen.side.unwrap_or(SideName::Right) {
                SideName::Right => Side::Right,
                SideName::Left => Side::Left,
            };
            let h = gen.h.unwrap_or(1e-3);
            let m = gen.samples.unwrap_or(100_000);
            let mut rng = RngStream::new(cfg.run.seed, 0);
            let probe = probe_generator(&sym, side, s, &f, h, m, &mut rng)?;
            let mut body = header(cfg, hash);
            let _ = writeln!(body, "# escapes={} samples={}", probe.escaped, probe.samples);
            let _ = writeln!(body, "x,f,Df");
            for j in 0..f.len() {
                let _ = writeln!(body, "{},{},{}", f.x(j), f.values[j], probe.grid.values[j]);
            }
            write_out(out_dir, "probe.csv", &body)?;
        }
    }
    Ok(0)
}

fn grid_from_expr(
    expr: &FieldExpr,
    a: f64,
    b: f64,
    n: usize,
) -> Result<FunctionGrid, CliError> {
    let mut g = FunctionGrid::new(a, b, n);
    for j in 0..n {
        let x = g.x(j);
        g.values[j] = expr
            .eval(0.0, &[x])
            .map_err(|e| CliError::Usage(format!("test function at x={x}: {e}")))?;
    }
    Ok(g)
}

fn grid2d_from_expr(
    text: &str,
    s_axis: (f64, f64, usize),
    x_axis: (f64, f64, usize),
) -> Result<Grid2D, CliError> {
    let expr = FieldExpr::parse(text, 1)
        .map_err(|e| CliError::Usage(format!("test function: {e}")))?;
    let mut g = Grid2D::new(s_axis, x_axis);
    let n_x = g.n_x();
    for i in 0..g.n_s() {
        for j in 0..n_x {
            let (s, x) = (g.s(i), g.x(j));
            let v = expr
                .eval(s, &[x])
                .map_err(|e| CliError::Usage(format!("test function at (s={s}, x={x}): {e}")))?;
            g.values[i * n_x + j] = v;
        }
    }
    Ok(g)
}

fn cmd_chernoff(cfg: &SimConfig, hash: &str, out_dir: &Path) -> Result<i32, CliError> {
    let ch = cfg
        .chernoff
        .as_ref()
        .ok_or_else(|| CliError::Usage("chernoff command needs a [chernoff] section".into()))?;
    let sym = cfg.build_symbol()?;
    let (a, b, points) = cfg.grid_axis();
    let g = grid_from_expr(&parse_f1(&ch.g)?, a, b, points)?;
    let s = ch.s.unwrap_or(cfg.run.t0);
    let result = compose_evolution(&sym, s, ch.duration, ch.steps, &g)?;

    let mut body = format!("{}x,g,Ug\n", header(cfg, hash));
    for j in 0..g.len() {
        let _ = writeln!(body, "{},{},{}", g.x(j), g.values[j], result.grid.values[j]);
    }
    write_out(out_dir, "chernoff.csv", &body)?;

    let mut meta = serde_json::Map::new();
    meta.insert("seed".into(), cfg.run.seed.into());
    meta.insert("config_sha256".into(), config_json(hash));
    meta.insert("s".into(), json_f64(s));
    meta.insert("duration".into(), json_f64(ch.duration));
    meta.insert("n".into(), ch.steps.into());
    meta.insert("sup_g".into(), json_f64(g.sup_norm()));
    meta.insert("sup_Ug".into(), json_f64(result.grid.sup_norm()));
    let leak = result
        .boundary_leakage
        .iter()
        .fold(0.0f64, |m, &v| m.max(v));
    meta.insert("max_boundary_leakage".into(), json_f64(leak));
    if let Some(r) = ch.r {
        let res = evolution_property_residual(&sym, s, r, s + ch.duration, ch.steps, &g)?;
        meta.insert("evolution_property_residual".into(), json_f64(res));
        meta.insert("r".into(), json_f64(r));
    }
    if let Some(delta) = ch.delta {
        let fwd = evolution_equation_residual(
            &sym,
            EquationSide::Forward,
            s,
            s + ch.duration,
            ch.steps,
            delta,
            &g,
        )?;
        let bwd = evolution_equation_residual(
            &sym,
            EquationSide::Backward,
            s,
            s + ch.duration,
            ch.steps,
            delta,
            &g,
        )?;
        meta.insert("forward_equation_residual".into(), json_f64(fwd));
        meta.insert("backward_equation_residual".into(), json_f64(bwd));
        meta.insert("delta".into(), json_f64(delta));
    }
    meta.insert(
        "assumptions".into(),
        serde_json::Value::String(
            "dense definedness of the one-step derivative family is assumed, not checked".into(),
        ),
    );
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(meta))
        .expect("json serialization");
    write_out(out_dir, "chernoff_meta.json", &format!("{text}\n"))?;
    Ok(0)
}

fn json_f64(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

fn config_json(hash: &str) -> serde_json::Value {
    serde_json::Value::String(hash.to_string())
}

/// The `check` suite: symbol validation, empirical CF, propagator
/// contraction/positivity, a PMP sweep, and (when configured) the
/// piecewise-drift golden scenario.
fn cmd_check(cfg: &SimConfig, hash: &str, out_dir: &Path) -> Result<i32, CliError> {
    let sym = cfg.build_symbol()?;
    let d = cfg.symbol.dimension;
    let mut report = ValidationReport::new("check");

    // empirical probes of the symbol hypotheses
    let mut probe = SymbolProbe::new(d);
    probe.s_range = (cfg.run.t0, cfg.run.t_end);
    let sr = validate_symbol(&sym, &probe);
    report.push(CheckRecord::gate("symbol.origin", sr.origin_max_abs, 1e-12));
    report.push(CheckRecord::gate(
        "symbol.conjugate_symmetry",
        sr.conjugate_max_dev,
        1e-12,
    ));
    report.push(CheckRecord::gate(
        "symbol.nonnegative_real_part",
        -sr.min_real_part,
        1e-12,
    ));
    report.push(
        CheckRecord::info("symbol.bound_constant", sr.bound_constant).with_params(format!(
            "argmax s={}, x={:?}, xi={:?}",
            sr.bound_argmax.0, sr.bound_argmax.1, sr.bound_argmax.2
        )),
    );
    report.push(
        CheckRecord::info(
            "symbol.time_discontinuity",
            if sr.continuity.discontinuous { 1.0 } else { 0.0 },
        )
        .with_params(format!(
            "location_s={}, jump={}, xi={:?}",
            sr.continuity.location_s, sr.continuity.jump_magnitude, sr.continuity.probe_xi
        ))
        .with_note("informational: a time-discontinuous symbol is legitimate input"),
    );
    if !sr.eval_errors.is_empty() {
        report.push(
            CheckRecord::info("symbol.eval_errors", sr.eval_errors.len() as f64)
                .with_note(sr.eval_errors[0].clone()),
        );
    }

    // one-step law against the exact transform
    let (samples, xi_max, xi_points) = match &cfg.check {
        Some(c) => (
            c.samples.unwrap_or(100_000),
            c.xi_max.unwrap_or(5.0),
            c.xi_points.unwrap_or(11),
        ),
        None => (100_000, 5.0, 11),
    };
    let xi_set = axis_xi_set(d, xi_max, xi_points);
    let mut rng = RngStream::new(cfg.run.seed, 1000);
    let cf_report = empirical_cf_test(
        &sym,
        cfg.run.t0,
        &cfg.run.x0,
        1.0 / cfg.run.n as f64,
        &xi_set,
        samples,
        &mut rng,
    )?;
    report.merge(cf_report);

    // grid-based checks need a one-dimensional symbol
    if d == 1 {
        let (a, b, points) = cfg.grid_axis();
        let g = FunctionGrid::from_fn(a, b, points, |x| (-0.5 * x * x).exp());
        let evolved = compose_evolution(&sym, cfg.run.t0, 0.5, 16, &g)?;
        report.push(CheckRecord::gate(
            "chernoff.contraction",
            evolved.grid.sup_norm() - g.sup_norm(),
            1e-8,
        ));
        let min = evolved
            .grid
            .values
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v));
        report.push(CheckRecord::gate("chernoff.positivity", -min, 1e-8));
        let ones = FunctionGrid::from_fn(a, b, points, |_| 1.0).periodic();
        let v1 = apply_step(&sym, cfg.run.t0, 0.5 / 16.0, &ones)?;
        let dev = v1
            .values
            .iter()
            .fold(0.0f64, |m, &v| m.max((v - 1.0).abs()));
        report.push(CheckRecord::gate("chernoff.constant_preservation", dev, 1e-10));

        let bump_count = cfg.check.as_ref().and_then(|c| c.bumps).unwrap_or(10);
        let mut bump_rng = RngStream::new(cfg.run.seed, 1001);
        let mut violations = 0usize;
        for f in pmp_bump_suite(a, b, points, bump_count, &mut bump_rng) {
            let af = apply_generator(&sym, cfg.run.t0, &f)?;
            if let PmpOutcome::Fail { .. } = check_positive_maximum(&f, &af) {
                violations += 1;
            }
        }
        report.push(
            CheckRecord::gate("pmp.violations", violations as f64, 0.0)
                .with_params(format!("bumps={bump_count}")),
        );
    }

    // golden piecewise-drift scenario
    if let (Some(check), 1) = (&cfg.check, d) {
        if let Some(pw) = &check.piecewise {
            let mut chain_rng = RngStream::new(cfg.run.seed, 1002);
            let path = crate::chain::run_chain(
                &sym,
                &cfg.run.x0,
                cfg.run.t0,
                cfg.run.t_end,
                cfg.run.n,
                &mut chain_rng,
            )?;
            let t_real = *path.times().last().expect("nonempty");
            let oracle =
                piecewise_drift_oracle(pw.alpha, pw.beta, pw.s0, cfg.run.t0, cfg.run.x0[0], t_real);
            report.push(
                CheckRecord::gate(
                    "piecewise.chain_terminal",
                    (path.terminal()[0] - oracle).abs(),
                    1e-12,
                )
                .with_params(format!("oracle={oracle}, terminal={}", path.terminal()[0])),
            );

            let (a, b, points) = cfg.grid_axis();
            let f = FunctionGrid::from_fn(a, b, points, |x| x.sin() * (-x * x / 32.0).exp());
            let mut core_rng = RngStream::new(cfg.run.seed, 1003);
            let (co_report, verdict) =
                generator_coincidence_test(&sym, pw.s0, &f, &[4e-3, 2e-3], 10_000, &mut core_rng)?;
            report.merge(co_report);
            // sup|f'| = 1 for the test function above
            let expected = (pw.beta - pw.alpha).abs();
            let measured = match verdict {
                CoincidenceVerdict::Split { limit } => (limit - expected).abs(),
                CoincidenceVerdict::Coincide => f64::INFINITY,
            };
            report.push(
                CheckRecord::gate("piecewise.split_limit", measured, 0.1 * expected)
                    .with_params(format!("expected={expected}")),
            );
        }
    }

    write_out(
        out_dir,
        "report.txt",
        &format!("{}{}", header(cfg, hash), report.to_kv_text()),
    )?;
    write_out(
        out_dir,
        "report.csv",
        &format!("{}{}", header(cfg, hash), report.to_csv()),
    )?;
    Ok(if report.verdict() { 0 } else { 1 })
}

/// Library-level helper mirroring the binary: verify the empirical CF of
/// the one-step law at a point, used by integration tests.
pub fn one_step_cf_deviation(
    cfg: &SimConfig,
    xi: &[f64],
    m: u64,
) -> Result<f64, CliError> {
    let sym = cfg.build_symbol()?;
    let mut rng = RngStream::new(cfg.run.seed, 0);
    let h = 1.0 / cfg.run.n as f64;
    let mut delta = vec![0.0; sym.dim()];
    let mut scratch = crate::sampler::SampleScratch::new(sym.dim());
    let mut acc = num_complex::Complex64::new(0.0, 0.0);
    for _ in 0..m {
        crate::sampler::sample_increment_into(
            &sym,
            cfg.run.t0,
            &cfg.run.x0,
            h,
            &mut rng,
            &mut delta,
            &mut scratch,
        )?;
        let phase: f64 = cfg
            .run
            .x0
            .iter()
            .zip(delta.iter())
            .zip(xi.iter())
            .map(|((x, d), k)| (x + d) * k)
            .sum();
        acc += num_complex::Complex64::from_polar(1.0, phase);
    }
    let ecf = acc / m as f64;
    let exact = increment_cf(&sym, cfg.run.t0, &cfg.run.x0, h, xi)?;
    Ok((ecf - exact).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable() {
        assert_eq!(hex_digest(b"abc").len(), 16);
        assert_eq!(hex_digest(b"abc"), hex_digest(b"abc"));
        assert_ne!(hex_digest(b"abc"), hex_digest(b"abd"));
    }

    #[test]
    fn axis_xi_set_shape() {
        let set = axis_xi_set(2, 5.0, 3);
        assert_eq!(set.len(), 6);
        assert_eq!(set[0], vec![-5.0, 0.0]);
        assert_eq!(set[2], vec![5.0, 0.0]);
        assert_eq!(set[3], vec![0.0, -5.0]);
    }
}
