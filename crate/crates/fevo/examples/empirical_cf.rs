//! Distributional validation of the increment sampler: for every jump
//! family the empirical characteristic function of M sampled increments
//! must match e^{i x ξ - h q(s,x,ξ)} within the CLT bound 4/sqrt(M).
//!
//! Run with: cargo run --release --example empirical_cf

use fevo::validate::empirical_cf_test;
use fevo::{JumpDist, LevySymbol, RngStream};

fn main() {
    let families: Vec<(&str, LevySymbol)> = vec![
        ("drift", LevySymbol::drift_1d("0.8").expect("drift")),
        ("gaussian", LevySymbol::brownian_1d(1.0)),
        (
            "cpp point jump",
            LevySymbol::builder(1)
                .compound_poisson("2", JumpDist::point(vec![0.7]))
                .expect("cpp")
                .build(),
        ),
        (
            "cpp gaussian jump",
            LevySymbol::builder(1)
                .compound_poisson("1.5", JumpDist::gaussian(vec![0.1], vec![0.4]).expect("psd"))
                .expect("cpp")
                .build(),
        ),
        (
            "cpp two-point jump",
            LevySymbol::builder(1)
                .compound_poisson("1", JumpDist::two_point(vec![0.9]))
                .expect("cpp")
                .build(),
        ),
        ("stable a=0.7", LevySymbol::builder(1).stable(0.7, "0.6").expect("st").build()),
        ("stable a=1.0", LevySymbol::builder(1).stable(1.0, "0.6").expect("st").build()),
        ("stable a=1.5", LevySymbol::builder(1).stable(1.5, "0.6").expect("st").build()),
    ];

    let m = 100_000u64;
    let xi_set: Vec<Vec<f64>> = (0..20).map(|k| vec![-4.75 + 0.5 * k as f64]).collect();
    let tol = 4.0 / (m as f64).sqrt();
    println!("M = {m} samples, 20 ξ points in [-4.75, 4.75], tolerance 4/sqrt(M) = {tol:.5}");
    println!();
    for (stream, (name, sym)) in families.iter().enumerate() {
        let mut rng = RngStream::new(99, stream as u64);
        let report =
            empirical_cf_test(sym, 0.2, &[0.3], 0.1, &xi_set, m, &mut rng).expect("cf test");
        let max_dev = report
            .records
            .iter()
            .find(|r| r.name == "max_deviation")
            .expect("summary record")
            .measured;
        println!(
            "{name:<20} max |ECF - exact| = {max_dev:.5}  {}",
            if report.verdict() { "PASS" } else { "FAIL" }
        );
    }
}
