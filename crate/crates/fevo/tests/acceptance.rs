//! Acceptance suite: one test per shipped criterion, each printing a
//! PASS line with the measured quantities (run with `--nocapture` to see
//! them). Every tolerance is pinned here, not computed at run time.

use std::time::{Duration, Instant};

use fevo::calculus::{apply_generator, apply_spacetime_generator, check_positive_maximum, probe_generator, Side};
use fevo::chain::{run_chain, run_spacetime_chain};
use fevo::chernoff::{compose_evolution, evolution_property_residual};
use fevo::cli::{dispatch, Command};
use fevo::config::parse_config_str;
use fevo::field::{FieldExpr, ParseError};
use fevo::grid::{FunctionGrid, Grid2D};
use fevo::sampler::increment_cf;
use fevo::symbol::JumpDist;
use fevo::symbol_probe::{validate_symbol, SymbolProbe};
use fevo::validate::{empirical_cf_test, generator_coincidence_test, pmp_bump_suite, CoincidenceVerdict};
use fevo::{LevySymbol, RngStream};
use num_complex::Complex64;

fn pass(criterion: usize, elapsed: Duration, budget: Duration, details: &str) {
    println!(
        "ACCEPTANCE {criterion} PASS in {:.3}s (budget {budget:?}): {details}",
        elapsed.as_secs_f64(),
    );
    assert!(
        elapsed <= budget,
        "criterion {criterion} exceeded its runtime budget: {elapsed:?} > {budget:?}"
    );
}

/// Criterion 1: the piecewise-drift golden chain hits 1.5 bitwise.
#[test]
fn criterion_1_golden_chain() {
    let sym = LevySymbol::piecewise_drift_1d(1.0, 2.0, 0.5);
    let mut rng = RngStream::new(42, 0);
    let started = Instant::now();
    let path = run_chain(&sym, &[0.0], 0.0, 1.0, 10, &mut rng).unwrap();
    let elapsed = started.elapsed();
    assert_eq!(path.steps(), 10);
    assert_eq!(
        path.terminal()[0].to_bits(),
        1.5f64.to_bits(),
        "terminal {} is not bitwise 1.5",
        path.terminal()[0]
    );
    assert_eq!(rng.counter(), 0, "deterministic chain must not consume draws");
    pass(1, elapsed, Duration::from_millis(1), "terminal bitwise 1.5 in 10 steps");
}

fn split_test_function() -> (FunctionGrid, Vec<f64>, f64) {
    let f = FunctionGrid::from_fn(-16.0, 16.0, 1024, |x| x.sin() * (-x * x / 32.0).exp());
    // analytic derivative, the oracle for both probe sides
    let fprime: Vec<f64> = (0..f.len())
        .map(|j| {
            let x = f.x(j);
            (-x * x / 32.0).exp() * (x.cos() - x * x.sin() / 16.0)
        })
        .collect();
    let sup = fprime.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (f, fprime, sup)
}

/// Criterion 2: left/right generator split at the drift kink.
#[test]
fn criterion_2_generator_split() {
    let started = Instant::now();
    let (alpha, beta, s0) = (1.0, 2.0, 0.5);
    let sym = LevySymbol::piecewise_drift_1d(alpha, beta, s0);
    let (f, fprime, sup_fprime) = split_test_function();
    let (h, m) = (1e-3, 100_000);

    let mut rng = RngStream::new(7, 0);
    let right = probe_generator(&sym, Side::Right, s0, &f, h, m, &mut rng).unwrap();
    let left = probe_generator(&sym, Side::Left, s0, &f, h, m, &mut rng).unwrap();
    let mut right_err = 0.0f64;
    let mut left_err = 0.0f64;
    for j in 0..f.len() {
        right_err = right_err.max((right.grid.values[j] - beta * fprime[j]).abs());
        left_err = left_err.max((left.grid.values[j] - alpha * fprime[j]).abs());
    }
    assert!(right_err <= 0.05, "right probe sup-error {right_err}");
    assert!(left_err <= 0.05, "left probe sup-error {left_err}");

    let mut rng = RngStream::new(7, 1);
    let (_, verdict) =
        generator_coincidence_test(&sym, s0, &f, &[4e-3, 2e-3], 10_000, &mut rng).unwrap();
    let expected = (beta - alpha) * sup_fprime;
    let limit = match verdict {
        CoincidenceVerdict::Split { limit } => limit,
        CoincidenceVerdict::Coincide => panic!("expected a split verdict"),
    };
    assert!(
        (limit - expected).abs() <= 0.1 * expected,
        "split limit {limit} vs expected {expected}"
    );
    pass(
        2,
        started.elapsed(),
        Duration::from_secs(30),
        &format!("sup-errors right {right_err:.4} / left {left_err:.4}, split limit {limit:.4}"),
    );
}

/// Criterion 3: empirical CF of every increment family matches e^{-hq}.
#[test]
fn criterion_3_increment_law_exactness() {
    let started = Instant::now();
    let families: Vec<(&str, LevySymbol)> = vec![
        ("drift", LevySymbol::drift_1d("0.8").unwrap()),
        ("gaussian", LevySymbol::brownian_1d(1.0)),
        (
            "cpp-point",
            LevySymbol::builder(1)
                .compound_poisson("2", JumpDist::point(vec![0.7]))
                .unwrap()
                .build(),
        ),
        (
            "cpp-gaussian",
            LevySymbol::builder(1)
                .compound_poisson("1.5", JumpDist::gaussian(vec![0.1], vec![0.4]).unwrap())
                .unwrap()
                .build(),
        ),
        (
            "cpp-two-point",
            LevySymbol::builder(1)
                .compound_poisson("1", JumpDist::two_point(vec![0.9]))
                .unwrap()
                .build(),
        ),
        ("stable-0.7", LevySymbol::builder(1).stable(0.7, "0.6").unwrap().build()),
        ("stable-1.0", LevySymbol::builder(1).stable(1.0, "0.6").unwrap().build()),
        ("stable-1.5", LevySymbol::builder(1).stable(1.5, "0.6").unwrap().build()),
    ];
    let m = 100_000u64;
    let tol = 4.0 / (m as f64).sqrt(); // 0.0126.., the pinned CLT bound
    let xi_set: Vec<Vec<f64>> = (0..20)
        .map(|k| vec![-4.75 + 0.5 * k as f64])
        .collect();
    let mut worst = 0.0f64;
    for (stream, (name, sym)) in families.iter().enumerate() {
        let mut rng = RngStream::new(99, stream as u64);
        let report = empirical_cf_test(sym, 0.2, &[0.3], 0.1, &xi_set, m, &mut rng).unwrap();
        let max_dev = report
            .records
            .iter()
            .find(|r| r.name == "max_deviation")
            .unwrap()
            .measured;
        assert!(
            report.verdict() && max_dev <= tol,
            "{name}: max deviation {max_dev} vs {tol}"
        );
        worst = worst.max(max_dev);
    }
    pass(
        3,
        started.elapsed(),
        Duration::from_secs(60),
        &format!("8 families x 20 xi points, worst deviation {worst:.5} <= {tol:.5}"),
    );
}

/// Criterion 4: space-time factorization is bitwise.
#[test]
fn criterion_4_spacetime_factorization() {
    let started = Instant::now();
    let sym = LevySymbol::builder(1)
        .drift(&["1 + 1*step(s-0.5)"])
        .unwrap()
        .diffusion_upper(&["0.5"])
        .unwrap()
        .compound_poisson("1", JumpDist::two_point(vec![0.3]))
        .unwrap()
        .build();
    let n = 64u64;
    let mut rng_plain = RngStream::new(2024, 5);
    let mut rng_lift = RngStream::new(2024, 5);
    let plain = run_chain(&sym, &[0.1], 0.0, 1.0, n, &mut rng_plain).unwrap();
    let lift = run_spacetime_chain(&sym, &[0.1], 0.0, 1.0, n, &mut rng_lift).unwrap();
    assert_eq!(plain.states.len(), lift.states.len());
    let h = 1.0 / n as f64;
    let mut s = 0.0f64;
    for (k, (p, l)) in plain.states.iter().zip(lift.states.iter()).enumerate() {
        assert_eq!(
            l[0].to_bits(),
            s.to_bits(),
            "time coordinate at step {k} is not the 1/n accumulation"
        );
        for (a, b) in p.iter().zip(&l[1..]) {
            assert_eq!(a.to_bits(), b.to_bits(), "spatial mismatch at step {k}");
        }
        s += h;
    }
    pass(
        4,
        started.elapsed(),
        Duration::from_secs(1),
        "64 steps, spatial coordinates bitwise equal, time advances by 1/n",
    );
}

/// Criterion 5: Fourier generator against analytic derivatives.
#[test]
fn criterion_5_operator_calculus() {
    let started = Instant::now();
    // q = ξ² (Q = 2): A f = f'' for the standard Gaussian
    let sym = LevySymbol::brownian_1d(2.0);
    let f = FunctionGrid::from_fn(-16.0, 16.0, 1024, |x| (-0.5 * x * x).exp());
    let af = apply_generator(&sym, 0.0, &f).unwrap();
    let mut sup_err = 0.0f64;
    for j in 0..f.len() {
        let x = f.x(j);
        let exact = (x * x - 1.0) * (-0.5 * x * x).exp();
        sup_err = sup_err.max((af.values[j] - exact).abs());
    }
    assert!(sup_err <= 1e-6, "generator sup-error {sup_err}");

    // Lf(0,0) = ∂_s f + A f = 0 - 1 for the product Gaussian
    let f2 = Grid2D::from_fn((-8.0, 8.0, 64), (-16.0, 16.0, 1024), |s, x| {
        (-0.5 * s * s).exp() * (-0.5 * x * x).exp()
    });
    let lf = apply_spacetime_generator(&sym, &f2, false).unwrap();
    let v = lf.value(32, 512);
    assert!((v + 1.0).abs() <= 1e-5, "Lf(0,0) = {v}");
    pass(
        5,
        started.elapsed(),
        Duration::from_secs(5),
        &format!("A oracle sup-error {sup_err:.2e}, Lf(0,0) = {v:.8}"),
    );
}

/// Criterion 6: Chernoff propagator against the heat closed form.
#[test]
fn criterion_6_chernoff_propagator() {
    let started = Instant::now();
    let sym = LevySymbol::brownian_1d(1.0);
    let g = FunctionGrid::from_fn(-16.0, 16.0, 512, |x| (-0.5 * x * x).exp());
    let closed = |x: f64| (1.0f64 + 1.0).powf(-0.5) * (-x * x / (2.0 * (1.0 + 1.0))).exp();

    let mut errors = Vec::new();
    let mut n = 4u64;
    while n <= 64 {
        let out = compose_evolution(&sym, 0.0, 1.0, n, &g).unwrap();
        let mut sup = 0.0f64;
        for j in 0..g.len() {
            sup = sup.max((out.grid.values[j] - closed(g.x(j))).abs());
        }
        errors.push((n, sup));
        n *= 2;
    }
    let final_err = errors.last().unwrap().1;
    assert!(final_err <= 1e-3, "n=64 sup-error {final_err}");
    for w in errors.windows(2) {
        assert!(
            w[1].1 <= w[0].1 + 1e-9,
            "error increased when n doubled: {errors:?}"
        );
    }
    let residual = evolution_property_residual(&sym, 0.0, 0.5, 1.0, 64, &g).unwrap();
    assert!(residual <= 1e-8, "evolution property residual {residual}");
    pass(
        6,
        started.elapsed(),
        Duration::from_secs(30),
        &format!("n=64 sup-error {final_err:.2e}, property residual {residual:.2e}"),
    );
}

/// Criterion 7: the symbol validator measures the growth bound and flags
/// the time discontinuity with the right jump size.
#[test]
fn criterion_7_symbol_validator() {
    let started = Instant::now();
    let brownian = LevySymbol::brownian_1d(1.0);
    let brownian_report = validate_symbol(&brownian, &SymbolProbe::new(1));
    let brownian_c = brownian_report.bound_constant;
    assert!(brownian_c <= 0.5 + 1e-9, "Brownian bound constant {brownian_c}");
    assert!(!brownian_report.continuity.discontinuous);
    assert!(brownian_report.algebra_ok(1e-12));

    let (alpha, beta, s0) = (1.0, 2.0, 0.5);
    let piecewise = LevySymbol::piecewise_drift_1d(alpha, beta, s0);
    let report = validate_symbol(&piecewise, &SymbolProbe::new(1));
    let c = &report.continuity;
    assert!(c.discontinuous, "discontinuity not flagged");
    assert!((c.location_s - s0).abs() <= 1e-6, "located at {}", c.location_s);
    let expected = (beta - alpha).abs() * c.probe_xi[0].abs();
    assert!(
        (c.jump_magnitude - expected).abs() <= 0.1 * expected,
        "jump {} vs |β-α|·|ξ| = {expected}",
        c.jump_magnitude
    );
    pass(
        7,
        started.elapsed(),
        Duration::from_secs(5),
        &format!(
            "Brownian c = {brownian_c:.6}, discontinuity at s = {:.6} with jump {:.4}",
            c.location_s, c.jump_magnitude
        ),
    );
}

/// Criterion 8: positive maximum principle across 50 random bumps and
/// every built-in symbol family.
#[test]
fn criterion_8_pmp_suite() {
    let started = Instant::now();
    let families: Vec<(&str, LevySymbol)> = vec![
        ("drift", LevySymbol::drift_1d("1").unwrap()),
        ("gaussian", LevySymbol::brownian_1d(1.0)),
        (
            "cpp-point",
            LevySymbol::builder(1)
                .compound_poisson("2", JumpDist::point(vec![1.0]))
                .unwrap()
                .build(),
        ),
        (
            "cpp-gaussian",
            LevySymbol::builder(1)
                .compound_poisson("1", JumpDist::gaussian(vec![0.0], vec![0.5]).unwrap())
                .unwrap()
                .build(),
        ),
        (
            "cpp-two-point",
            LevySymbol::builder(1)
                .compound_poisson("1.5", JumpDist::two_point(vec![0.8]))
                .unwrap()
                .build(),
        ),
        ("stable-0.7", LevySymbol::builder(1).stable(0.7, "0.5").unwrap().build()),
        ("stable-1.0", LevySymbol::builder(1).stable(1.0, "0.5").unwrap().build()),
        ("stable-1.5", LevySymbol::builder(1).stable(1.5, "0.5").unwrap().build()),
    ];
    let mut rng = RngStream::new(321, 0);
    let bumps = pmp_bump_suite(-16.0, 16.0, 1024, 50, &mut rng);
    let mut checked = 0usize;
    for (name, sym) in &families {
        for f in &bumps {
            let af = apply_generator(sym, 0.25, f).unwrap();
            let outcome = check_positive_maximum(f, &af);
            assert!(outcome.passed(), "{name}: PMP violation {outcome:?}");
            checked += 1;
        }
    }
    pass(
        8,
        started.elapsed(),
        Duration::from_secs(60),
        &format!("{checked} bump/family pairs, zero violations"),
    );
}

/// Criterion 9: `simulate` output is byte-identical for 1 and 8 workers.
#[test]
fn criterion_9_worker_determinism() {
    let started = Instant::now();
    let config = r#"
[symbol]
dimension = 1
diffusion = ["1"]

[run]
t0 = 0.0
T = 1.0
n = 100
x0 = [0.0]
paths = 1000
seed = 31415
"#;
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for workers in [1usize, 8] {
        let mut cfg = parse_config_str(config, "inline").unwrap();
        cfg.run.workers = Some(workers);
        let out = dir.path().join(format!("w{workers}"));
        let status = dispatch(Command::Simulate, &cfg, "cafebabe", &out).unwrap();
        assert_eq!(status, 0);
        outputs.push(std::fs::read(out.join("paths.csv")).unwrap());
    }
    assert_eq!(outputs[0].len(), outputs[1].len());
    assert!(outputs[0] == outputs[1], "worker counts changed the output bytes");
    pass(
        9,
        started.elapsed(),
        Duration::from_secs(10),
        &format!("1000 paths, {} bytes identical across 1 and 8 workers", outputs[0].len()),
    );
}

/// Criterion 10: DSL golden expressions and parse-error offsets.
#[test]
fn criterion_10_dsl_goldens() {
    let started = Instant::now();
    // (expression, s, x1, expected), all hand-computed
    let goldens: Vec<(&str, f64, f64, f64)> = vec![
        ("2+3*4", 0.0, 0.0, 14.0),
        ("(2+3)*4", 0.0, 0.0, 20.0),
        ("2-3-4", 0.0, 0.0, -5.0),
        ("2-3+4", 0.0, 0.0, 3.0),
        ("12/4/3", 0.0, 0.0, 1.0),
        ("2^3^2", 0.0, 0.0, 512.0),
        ("-2^2", 0.0, 0.0, -4.0),
        ("(-2)^2", 0.0, 0.0, 4.0),
        ("2^-1", 0.0, 0.0, 0.5),
        ("-2*-3", 0.0, 0.0, 6.0),
        ("2*3^2", 0.0, 0.0, 18.0),
        ("2+3*4^2", 0.0, 0.0, 50.0),
        ("1e3", 0.0, 0.0, 1000.0),
        ("1.5e-2", 0.0, 0.0, 0.015),
        ("2.5E2", 0.0, 0.0, 250.0),
        ("0.5", 0.0, 0.0, 0.5),
        ("pi", 0.0, 0.0, std::f64::consts::PI),
        ("2*pi", 0.0, 0.0, std::f64::consts::TAU),
        ("sin(0)", 0.0, 0.0, 0.0),
        ("cos(0)", 0.0, 0.0, 1.0),
        ("exp(0)", 0.0, 0.0, 1.0),
        ("exp(1)", 0.0, 0.0, std::f64::consts::E),
        ("tanh(0)", 0.0, 0.0, 0.0),
        ("abs(-3)", 0.0, 0.0, 3.0),
        ("sqrt(4)", 0.0, 0.0, 2.0),
        ("min(2,3)", 0.0, 0.0, 2.0),
        ("max(2,3)", 0.0, 0.0, 3.0),
        ("min(2,-3)", 0.0, 0.0, -3.0),
        ("step(0)", 0.0, 0.0, 1.0),
        ("step(-1e-12)", 0.0, 0.0, 0.0),
        ("step(1)", 0.0, 0.0, 1.0),
        ("1+2*step(s)", -1.0, 0.0, 1.0),
        ("1+2*step(s)", 0.0, 0.0, 3.0),
        ("s^2", 3.0, 0.0, 9.0),
        ("2^2^0.5", 0.0, 0.0, 2f64.powf(2f64.powf(0.5))),
        ("-sin(pi/2)", 0.0, 0.0, -1.0),
        ("1 - -1", 0.0, 0.0, 2.0),
        ("3 * -2", 0.0, 0.0, -6.0),
        ("--2", 0.0, 0.0, 2.0),
        ("sqrt(x1^2)", 0.0, -2.0, 2.0),
        ("1/2+1/2", 0.0, 0.0, 1.0),
        ("min(1+1, 2*2)", 0.0, 0.0, 2.0),
        ("s*x1", 2.0, 3.0, 6.0),
    ];
    assert!(goldens.len() >= 30);
    for (text, s, x, expected) in &goldens {
        let e = FieldExpr::parse(text, 1).unwrap();
        let got = e.eval(*s, &[*x]).unwrap();
        assert_eq!(
            got.to_bits(),
            expected.to_bits(),
            "{text} at (s={s}, x1={x}): {got} != {expected}"
        );
    }

    // (malformed input, 1-based offset of the reported error)
    let malformed: Vec<(&str, usize)> = vec![
        ("2+", 3),
        ("2*", 3),
        ("(2+3", 5),
        ("2++3", 3),
        ("sin()", 5),
        ("sin(1,2)", 1),
        ("min(1)", 1),
        ("foo(1)", 1),
        ("x3", 1),
        ("2 $ 3", 3),
        ("step(0", 7),
        ("1e", 3),
    ];
    assert!(malformed.len() >= 10);
    for (text, offset) in &malformed {
        let err = FieldExpr::parse(text, 2).unwrap_err();
        let got = match &err {
            ParseError::Syntax { offset, .. } => *offset,
            ParseError::UnknownIdentifier { offset, .. } => *offset,
            ParseError::UnknownFunction { offset, .. } => *offset,
            ParseError::WrongArity { offset, .. } => *offset,
            ParseError::VariableOutOfRange { offset, .. } => *offset,
            other => panic!("{text}: unexpected error {other:?}"),
        };
        assert_eq!(got, *offset, "{text}: reported offset {got}, expected {offset} ({err})");
    }
    pass(
        10,
        started.elapsed(),
        Duration::from_secs(1),
        &format!(
            "{} golden expressions exact, {} malformed inputs at verified offsets",
            goldens.len(),
            malformed.len()
        ),
    );
}

/// The one-step law of the chain matches e^{-hq} pointwise in ξ
/// (supporting check for criteria 3 and 4: the chain uses the same
/// sampler the CF test exercises).
#[test]
fn chain_one_step_cf_spot_check() {
    let sym = LevySymbol::builder(1)
        .drift(&["0.5"])
        .unwrap()
        .diffusion_upper(&["1"])
        .unwrap()
        .build();
    let (s, x, h) = (0.25, 0.4, 0.125);
    let m = 20_000usize;
    let mut rng = RngStream::new(17, 0);
    let mut acc = vec![Complex64::new(0.0, 0.0); 20];
    let xis: Vec<f64> = (0..20).map(|k| -4.75 + 0.5 * k as f64).collect();
    for _ in 0..m {
        let path = run_chain(&sym, &[x], s, s + h, 8, &mut rng).unwrap();
        let y = path.states[1][0];
        for (a, xi) in acc.iter_mut().zip(&xis) {
            *a += Complex64::from_polar(1.0, y * xi);
        }
    }
    for (a, xi) in acc.iter().zip(&xis) {
        let ecf = *a / m as f64;
        let exact = increment_cf(&sym, s, &[x], h, &[*xi]).unwrap();
        assert!(
            (ecf - exact).norm() <= 4.0 / (m as f64).sqrt(),
            "xi={xi}: {ecf} vs {exact}"
        );
    }
}
