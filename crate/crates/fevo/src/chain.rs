//! The approximating Markov chain with Lévy increments and its
//! space-time lift.
//!
//! One step of the chain draws an increment from the law with
//! characteristic function e^{-q(s,x,ξ)/n}, the symbol frozen at the left
//! endpoint of the step. The space-time lift prepends a time coordinate
//! that advances deterministically by 1/n per step (the point-mass factor
//! of the lifted transition kernel), so its last d coordinates coincide
//! with the plain chain under a shared stream — bitwise, which the tests
//! assert.
//!
//! Numerical conventions, fixed so that bitwise claims are well-defined:
//! the time coordinate is accumulated by left-to-right repeated addition
//! of 1/n (not computed as t0 + k·h); the spatial state is accumulated
//! with per-coordinate compensated (Kahan) addition, which keeps
//! piecewise-deterministic golden paths exact on the step lattice.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::rng::RngStream;
use crate::sampler::{sample_increment_into, SampleScratch};
use crate::symbol::{LevySymbol, SymbolError};

#[derive(Debug, Error)]
pub enum ChainError {
    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: SymbolError,
    },
    #[error("horizon T={t_end} must exceed the start time t0={t0}")]
    EmptyHorizon { t0: f64, t_end: f64 },
    #[error("initial state has dimension {got}, symbol has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{failed} of {total} paths failed; first failure on path {path}: {source}")]
    Ensemble {
        failed: usize,
        total: usize,
        path: u64,
        #[source]
        source: Box<ChainError>,
    },
}

/// A realized trajectory of the chain: state k sits at time
/// t0 + k·(1/n) on the step lattice.
#[derive(Debug, Clone)]
pub struct ChainPath {
    pub t0: f64,
    /// Step size 1/n.
    pub h: f64,
    /// K+1 states of dimension d; `states[0]` is the initial state.
    pub states: Vec<Vec<f64>>,
    pub seed: u64,
    pub stream_id: u64,
}

impl ChainPath {
    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn terminal(&self) -> &[f64] {
        self.states.last().expect("nonempty path")
    }

    /// Lattice times by left-to-right repeated addition, matching the
    /// simulation loop bit for bit.
    pub fn times(&self) -> Vec<f64> {
        accumulate_times(self.t0, self.h, self.steps())
    }
}

/// Trajectory of the (d+1)-dimensional space-time chain; the first
/// coordinate of each state is the time component.
#[derive(Debug, Clone)]
pub struct SpaceTimePath {
    pub s0: f64,
    pub h: f64,
    /// K+1 states of dimension d+1, time coordinate first.
    pub states: Vec<Vec<f64>>,
    pub seed: u64,
    pub stream_id: u64,
}

impl SpaceTimePath {
    pub fn spatial_dim(&self) -> usize {
        self.states[0].len() - 1
    }

    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }
}

fn accumulate_times(t0: f64, h: f64, steps: usize) -> Vec<f64> {
    let mut times = Vec::with_capacity(steps + 1);
    let mut t = t0;
    times.push(t);
    for _ in 0..steps {
        t += h;
        times.push(t);
    }
    times
}

fn step_count(t0: f64, t_end: f64, n: u64) -> usize {
    ((t_end - t0) * n as f64).round() as usize
}

// (lattice times, states) of one simulated path
type RawPath = (Vec<f64>, Vec<Vec<f64>>);

fn simulate(
    sym: &LevySymbol,
    x0: &[f64],
    t0: f64,
    steps: usize,
    h: f64,
    rng: &mut RngStream,
) -> Result<RawPath, ChainError> {
    let d = sym.dim();
    if x0.len() != d {
        return Err(ChainError::DimensionMismatch {
            expected: d,
            got: x0.len(),
        });
    }
    let mut states = Vec::with_capacity(steps + 1);
    let mut times = Vec::with_capacity(steps + 1);
    let mut x = x0.to_vec();
    let mut comp = vec![0.0; d];
    let mut delta = vec![0.0; d];
    let mut scratch = SampleScratch::new(d);
    let mut t = t0;
    states.push(x.clone());
    times.push(t);
    for k in 0..steps {
        sample_increment_into(sym, t, &x, h, rng, &mut delta, &mut scratch)
            .map_err(|source| ChainError::Step { step: k, source })?;
        for i in 0..d {
            let y = delta[i] - comp[i];
            let sum = x[i] + y;
            comp[i] = (sum - x[i]) - y;
            x[i] = sum;
        }
        t += h;
        states.push(x.clone());
        times.push(t);
    }
    Ok((times, states))
}

/// Run the chain from `x0` at `t0` to (approximately) `t_end` with step
/// 1/n; the realized horizon is K/n with K = round((t_end - t0)·n).
pub fn run_chain(
    sym: &LevySymbol,
    x0: &[f64],
    t0: f64,
    t_end: f64,
    n: u64,
    rng: &mut RngStream,
) -> Result<ChainPath, ChainError> {
    assert!(n >= 1, "n must be >= 1");
    if t_end <= t0 {
        return Err(ChainError::EmptyHorizon { t0, t_end });
    }
    let h = 1.0 / n as f64;
    let steps = step_count(t0, t_end, n);
    let (_, states) = simulate(sym, x0, t0, steps, h, rng)?;
    Ok(ChainPath {
        t0,
        h,
        states,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
    })
}

/// Run the space-time lift started at (s0, x0). With the same stream the
/// spatial coordinates equal [`run_chain`]'s states bitwise.
pub fn run_spacetime_chain(
    sym: &LevySymbol,
    x0: &[f64],
    s0: f64,
    t_end: f64,
    n: u64,
    rng: &mut RngStream,
) -> Result<SpaceTimePath, ChainError> {
    assert!(n >= 1, "n must be >= 1");
    if t_end <= s0 {
        return Err(ChainError::EmptyHorizon { t0: s0, t_end });
    }
    let h = 1.0 / n as f64;
    let steps = step_count(s0, t_end, n);
    let (times, spatial) = simulate(sym, x0, s0, steps, h, rng)?;
    let states = times
        .into_iter()
        .zip(spatial)
        .map(|(s, x)| {
            let mut st = Vec::with_capacity(x.len() + 1);
            st.push(s);
            st.extend_from_slice(&x);
            st
        })
        .collect();
    Ok(SpaceTimePath {
        s0,
        h,
        states,
        seed: rng.seed(),
        stream_id: rng.stream_id(),
    })
}

/// What an ensemble keeps per path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Retention {
    #[default]
    FullPaths,
    TerminalOnly,
}

/// Everything needed to run a reproducible ensemble: path i draws from
/// stream id i over the master seed.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub symbol: LevySymbol,
    pub x0: Vec<f64>,
    pub t0: f64,
    pub t_end: f64,
    pub n: u64,
    pub paths: u64,
    pub seed: u64,
    pub retention: Retention,
    /// Worker threads; `None` uses the global rayon pool. The output is
    /// identical for any worker count.
    pub workers: Option<usize>,
    /// Lift each path to the space-time chain.
    pub spacetime: bool,
}

#[derive(Debug, Clone)]
pub enum EnsembleData {
    Paths(Vec<ChainPath>),
    SpaceTimePaths(Vec<SpaceTimePath>),
    /// Terminal states only; rows include the time coordinate first when
    /// the ensemble is a space-time run.
    Terminals { steps: usize, states: Vec<Vec<f64>> },
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    pub t0: f64,
    pub h: f64,
    pub seed: u64,
    pub spacetime: bool,
    pub data: EnsembleData,
    /// Wall-clock metadata; never written into data files.
    pub elapsed: Duration,
}

impl Ensemble {
    pub fn paths_run(&self) -> usize {
        match &self.data {
            EnsembleData::Paths(p) => p.len(),
            EnsembleData::SpaceTimePaths(p) => p.len(),
            EnsembleData::Terminals { states, .. } => states.len(),
        }
    }

    /// Terminal spatial states (time coordinate stripped for space-time
    /// runs).
    pub fn terminals(&self) -> Vec<Vec<f64>> {
        match &self.data {
            EnsembleData::Paths(p) => p.iter().map(|p| p.terminal().to_vec()).collect(),
            EnsembleData::SpaceTimePaths(p) => p
                .iter()
                .map(|p| p.states.last().expect("nonempty")[1..].to_vec())
                .collect(),
            EnsembleData::Terminals { states, .. } => states
                .iter()
                .map(|row| {
                    if self.spacetime {
                        row[1..].to_vec()
                    } else {
                        row.clone()
                    }
                })
                .collect(),
        }
    }
}

/// Run `spec.paths` independent paths. Path i uses stream id i, so the
/// result is a pure function of (spec, seed) for any worker count.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<Ensemble, ChainError> {
    assert!(spec.paths >= 1, "need at least one path");
    if spec.t_end <= spec.t0 {
        return Err(ChainError::EmptyHorizon {
            t0: spec.t0,
            t_end: spec.t_end,
        });
    }
    let started = Instant::now();
    let h = 1.0 / spec.n as f64;
    let steps = step_count(spec.t0, spec.t_end, spec.n);
    let run = |i: u64| -> Result<RawPath, ChainError> {
        let mut rng = RngStream::new(spec.seed, i);
        simulate(&spec.symbol, &spec.x0, spec.t0, steps, h, &mut rng)
    };
    let results: Vec<Result<RawPath, ChainError>> = match spec.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .expect("thread pool")
            .install(|| (0..spec.paths).into_par_iter().map(run).collect()),
        None => (0..spec.paths).into_par_iter().map(run).collect(),
    };

    let total = results.len();
    let mut failed = 0usize;
    let mut first: Option<(u64, ChainError)> = None;
    let mut ok = Vec::with_capacity(total);
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => {
                failed += 1;
                if first.is_none() {
                    first = Some((i as u64, e));
                }
            }
        }
    }
    if let Some((path, source)) = first {
        return Err(ChainError::Ensemble {
            failed,
            total,
            path,
            source: Box::new(source),
        });
    }

    let data = match (spec.retention, spec.spacetime) {
        (Retention::FullPaths, false) => EnsembleData::Paths(
            ok.into_iter()
                .enumerate()
                .map(|(i, (_, states))| ChainPath {
                    t0: spec.t0,
                    h,
                    states,
                    seed: spec.seed,
                    stream_id: i as u64,
                })
                .collect(),
        ),
        (Retention::FullPaths, true) => EnsembleData::SpaceTimePaths(
            ok.into_iter()
                .enumerate()
                .map(|(i, (times, spatial))| SpaceTimePath {
                    s0: spec.t0,
                    h,
                    states: times
                        .into_iter()
                        .zip(spatial)
                        .map(|(s, x)| {
                            let mut st = Vec::with_capacity(x.len() + 1);
                            st.push(s);
                            st.extend_from_slice(&x);
                            st
                        })
                        .collect(),
                    seed: spec.seed,
                    stream_id: i as u64,
                })
                .collect(),
        ),
        (Retention::TerminalOnly, spacetime) => EnsembleData::Terminals {
            steps,
            states: ok
                .into_iter()
                .map(|(times, mut spatial)| {
                    let x = spatial.pop().expect("nonempty");
                    if spacetime {
                        let mut row = Vec::with_capacity(x.len() + 1);
                        row.push(*times.last().expect("nonempty"));
                        row.extend_from_slice(&x);
                        row
                    } else {
                        x
                    }
                })
                .collect(),
        },
    };
    Ok(Ensemble {
        t0: spec.t0,
        h,
        seed: spec.seed,
        spacetime: spec.spacetime,
        data,
        elapsed: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::increment_cf;
    use num_complex::Complex64;

    #[test]
    fn example_piecewise_drift_golden_path() {
        // drift 1 below s=0.5 and 2 from s=0.5 on: five steps of 0.1 then
        // five of 0.2, terminal exactly 1.5
        let sym = LevySymbol::piecewise_drift_1d(1.0, 2.0, 0.5);
        let mut rng = RngStream::new(1, 0);
        let path = run_chain(&sym, &[0.0], 0.0, 1.0, 10, &mut rng).unwrap();
        assert_eq!(path.steps(), 10);
        assert_eq!(path.terminal()[0].to_bits(), 1.5f64.to_bits());
        assert_eq!(rng.counter(), 0, "deterministic path must not draw");
        assert_eq!(path.states[5][0].to_bits(), 0.5f64.to_bits());
    }

    #[test]
    fn zero_symbol_stays_put() {
        let sym = LevySymbol::zero(2);
        let mut rng = RngStream::new(2, 0);
        let path = run_chain(&sym, &[1.0, -2.0], 0.0, 1.0, 16, &mut rng).unwrap();
        for st in &path.states {
            assert_eq!(st, &vec![1.0, -2.0]);
        }
    }

    #[test]
    fn state_dependent_drift_tracks_ode() {
        // drift switches when the STATE crosses 0.5; the ODE solution
        // reaches 0.5 at t = 0.5 and then moves with slope 2
        let sym = LevySymbol::drift_1d("1 + 1*step(x1 - 0.5)").unwrap();
        let n = 1000u64;
        let mut rng = RngStream::new(3, 0);
        let path = run_chain(&sym, &[0.0], 0.0, 1.0, n, &mut rng).unwrap();
        let expected = 1.5;
        let tol = 5.0 * (1.0 / n as f64) * 2.0;
        assert!(
            (path.terminal()[0] - expected).abs() <= tol,
            "terminal {} vs {expected}",
            path.terminal()[0]
        );
    }

    #[test]
    fn spacetime_lift_matches_chain_bitwise() {
        let sym = LevySymbol::builder(1)
            .drift(&["1 + 1*step(s-0.5)"])
            .unwrap()
            .diffusion_upper(&["0.5 + s"])
            .unwrap()
            .build();
        let mut rng_a = RngStream::new(7, 3);
        let mut rng_b = RngStream::new(7, 3);
        let plain = run_chain(&sym, &[0.2], 0.0, 1.0, 10, &mut rng_a).unwrap();
        let lifted = run_spacetime_chain(&sym, &[0.2], 0.0, 1.0, 10, &mut rng_b).unwrap();
        assert_eq!(plain.states.len(), lifted.states.len());
        let times = plain.times();
        for (k, (p, l)) in plain.states.iter().zip(lifted.states.iter()).enumerate() {
            assert_eq!(l[0].to_bits(), times[k].to_bits(), "time coordinate at k={k}");
            for (a, b) in p.iter().zip(&l[1..]) {
                assert_eq!(a.to_bits(), b.to_bits(), "spatial coordinate at k={k}");
            }
        }
    }

    #[test]
    fn spacetime_time_coordinate_is_plain_accumulation() {
        let sym = LevySymbol::zero(1);
        let mut rng = RngStream::new(4, 0);
        let path = run_spacetime_chain(&sym, &[0.0], 0.25, 1.25, 3, &mut rng).unwrap();
        let mut t: f64 = 0.25;
        for st in &path.states {
            assert_eq!(st[0].to_bits(), t.to_bits());
            t += 1.0 / 3.0;
        }
    }

    #[test]
    fn rounded_step_count() {
        let sym = LevySymbol::zero(1);
        let mut rng = RngStream::new(5, 0);
        // (T - t0)·n = 0.97·10 rounds to 10 steps
        let path = run_chain(&sym, &[0.0], 0.0, 0.97, 10, &mut rng).unwrap();
        assert_eq!(path.steps(), 10);
        assert!(run_chain(&sym, &[0.0], 1.0, 1.0, 10, &mut rng).is_err());
    }

    #[test]
    fn one_step_law_matches_symbol_cf() {
        let sym = LevySymbol::builder(1)
            .drift(&["0.3"])
            .unwrap()
            .diffusion_upper(&["1"])
            .unwrap()
            .build();
        let n = 16u64;
        let h = 1.0 / n as f64;
        let (s, x) = (0.5, 0.8);
        let m = 20_000usize;
        let mut rng = RngStream::new(6, 0);
        let mut increments = Vec::with_capacity(m);
        for _ in 0..m {
            let path = run_chain(&sym, &[x], s, s + h, n, &mut rng).unwrap();
            assert_eq!(path.steps(), 1);
            increments.push(path.states[1][0] - path.states[0][0]);
        }
        let tol = 4.0 / (m as f64).sqrt();
        for k in 0..20 {
            let xi = -4.75 + 0.5 * k as f64;
            let ecf: Complex64 = increments
                .iter()
                .map(|&d| Complex64::from_polar(1.0, d * xi))
                .sum::<Complex64>()
                / m as f64;
            let expected = increment_cf(&sym, s, &[x], h, &[xi]).unwrap()
                * Complex64::from_polar(1.0, -x * xi);
            assert!((ecf - expected).norm() <= tol, "xi={xi}");
        }
    }

    #[test]
    fn ensemble_deterministic_drift_identical_paths() {
        let spec = EnsembleSpec {
            symbol: LevySymbol::drift_1d("2").unwrap(),
            x0: vec![0.0],
            t0: 0.0,
            t_end: 1.0,
            n: 4,
            paths: 4,
            seed: 11,
            retention: Retention::FullPaths,
            workers: None,
            spacetime: false,
        };
        let ens = run_ensemble(&spec).unwrap();
        let EnsembleData::Paths(paths) = &ens.data else {
            panic!("expected full paths")
        };
        for p in paths {
            assert_eq!(p.states, paths[0].states);
        }
    }

    #[test]
    fn ensemble_worker_count_does_not_change_output() {
        let mk = |workers| EnsembleSpec {
            symbol: LevySymbol::brownian_1d(1.0),
            x0: vec![0.0],
            t0: 0.0,
            t_end: 1.0,
            n: 8,
            paths: 64,
            seed: 12,
            retention: Retention::FullPaths,
            workers,
            spacetime: false,
        };
        let a = run_ensemble(&mk(Some(1))).unwrap();
        let b = run_ensemble(&mk(Some(8))).unwrap();
        let (EnsembleData::Paths(pa), EnsembleData::Paths(pb)) = (&a.data, &b.data) else {
            panic!("expected full paths")
        };
        for (x, y) in pa.iter().zip(pb.iter()) {
            for (sx, sy) in x.states.iter().zip(y.states.iter()) {
                for (u, v) in sx.iter().zip(sy.iter()) {
                    assert_eq!(u.to_bits(), v.to_bits());
                }
            }
        }
    }

    #[test]
    fn ensemble_reports_path_failures() {
        // the drift field divides by zero at the s = 0.05 lattice point
        let spec = EnsembleSpec {
            symbol: LevySymbol::builder(1)
                .drift(&["1/(s - 0.05)"])
                .unwrap()
                .build(),
            x0: vec![0.0],
            t0: 0.0,
            t_end: 1.0,
            n: 20,
            paths: 3,
            seed: 13,
            retention: Retention::FullPaths,
            workers: Some(2),
            spacetime: false,
        };
        match run_ensemble(&spec) {
            Err(ChainError::Ensemble { failed: 3, total: 3, .. }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn terminal_only_retention() {
        let spec = EnsembleSpec {
            symbol: LevySymbol::drift_1d("1").unwrap(),
            x0: vec![0.5],
            t0: 0.0,
            t_end: 1.0,
            n: 4,
            paths: 3,
            seed: 14,
            retention: Retention::TerminalOnly,
            workers: None,
            spacetime: true,
        };
        let ens = run_ensemble(&spec).unwrap();
        let EnsembleData::Terminals { steps, states } = &ens.data else {
            panic!("expected terminals")
        };
        assert_eq!(*steps, 4);
        for row in states {
            assert_eq!(row.len(), 2); // (s, x1)
            assert!((row[1] - 1.5).abs() < 1e-12);
        }
    }
}
