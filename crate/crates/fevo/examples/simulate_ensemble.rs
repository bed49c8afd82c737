//! Reproducible path ensembles: 100k Brownian paths, terminal statistics
//! against the exact Normal(0,1) law, including a Kolmogorov-Smirnov
//! distance. Path i draws from stream id i over one master seed, so the
//! ensemble is identical for any worker count.
//!
//! Run with: cargo run --release --example simulate_ensemble

use fevo::chain::{run_ensemble, EnsembleSpec, Retention};
use fevo::validate::{ks_statistic, normal_cdf};
use fevo::LevySymbol;

fn main() {
    let paths = 100_000u64;
    let spec = EnsembleSpec {
        symbol: LevySymbol::brownian_1d(1.0),
        x0: vec![0.0],
        t0: 0.0,
        t_end: 1.0,
        n: 16,
        paths,
        seed: 2718,
        retention: Retention::TerminalOnly,
        workers: None,
        spacetime: false,
    };
    let ens = run_ensemble(&spec).expect("ensemble");
    let mut terminals: Vec<f64> = ens.terminals().iter().map(|row| row[0]).collect();
    terminals.sort_by(f64::total_cmp);

    let m = terminals.len() as f64;
    let mean = terminals.iter().sum::<f64>() / m;
    let var = terminals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / m;
    let ks = ks_statistic(&terminals, normal_cdf);
    let ks_crit = 1.9494746035204051 / m.sqrt(); // 99.9% critical value

    println!("{} Brownian paths to T = 1 in {:.2?}", paths, ens.elapsed);
    println!("terminal mean     {mean:+.5}   (exact 0)");
    println!("terminal variance {var:.5}    (exact 1)");
    println!("KS distance vs Normal(0,1): {ks:.5} (99.9% critical value {ks_crit:.5})");
    assert!(ks < ks_crit, "KS test failed");
    println!("KS test passed");
}
