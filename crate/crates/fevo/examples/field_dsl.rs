//! The coefficient expression language: parsing, evaluation, bounds
//! estimation, and the error reporting callers see for malformed input.
//!
//! Run with: cargo run --release --example field_dsl

use fevo::FieldExpr;

fn main() {
    // symbols coefficients are fields over (s, x1..xd)
    let drift = FieldExpr::parse("1 + 1*step(s - 0.5)", 1).expect("parse");
    println!("field: {}", drift.source());
    println!("  canonical form : {drift}");
    for s in [0.0, 0.499999, 0.5, 1.0] {
        println!("  at s = {s:<8}: {}", drift.eval(s, &[0.0]).expect("eval"));
    }

    let wavy = FieldExpr::parse("sin(s) * exp(-x1^2/8) + 0.1", 2).expect("parse");
    let (lo, hi) = wavy
        .bounds((0.0, 10.0), &[(-2.0, 2.0), (-1.0, 1.0)], 2000)
        .expect("bounds");
    println!();
    println!("field: {}", wavy.source());
    println!("  sampled bounds over the box: [{lo:.4}, {hi:.4}]");

    println!();
    println!("malformed inputs report 1-based offsets:");
    for text in ["2 +* 3", "sin()", "min(1)", "x3", "(1 + 2", "2 $ 3"] {
        let err = FieldExpr::parse(text, 2).unwrap_err();
        println!("  {text:<8} -> {err}");
    }
}
