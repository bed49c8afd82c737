//! Chernoff products against the heat semigroup: composing n one-step
//! averaging operators over [0, 1] reproduces the closed-form Gaussian
//! convolution, and the composition satisfies the evolution identity
//! U(0,1) = U(0,r) U(r,1) on its own step lattice.
//!
//! Run with: cargo run --release --example chernoff_heat

use fevo::chernoff::{compose_evolution, evolution_equation_residual, evolution_property_residual, EquationSide};
use fevo::grid::FunctionGrid;
use fevo::LevySymbol;

fn main() {
    let sym = LevySymbol::brownian_1d(1.0);
    let g = FunctionGrid::from_fn(-16.0, 16.0, 512, |x| (-0.5 * x * x).exp());
    // e^{-x²/2} convolved with N(0, t): (1+t)^{-1/2} e^{-x²/(2(1+t))}
    let closed = |x: f64| 0.5f64.sqrt() * (-x * x / 4.0).exp();

    println!("   n   sup-error vs closed form");
    let mut n = 4u64;
    while n <= 64 {
        let out = compose_evolution(&sym, 0.0, 1.0, n, &g).expect("compose");
        let err = (0..g.len()).fold(0.0f64, |m, j| {
            m.max((out.grid.values[j] - closed(g.x(j))).abs())
        });
        println!("{n:4}   {err:.3e}");
        n *= 2;
    }

    let prop = evolution_property_residual(&sym, 0.0, 0.5, 1.0, 64, &g).expect("property");
    println!("evolution property |U(0,1) - U(0,.5)U(.5,1)|  = {prop:.3e}");
    let fwd = evolution_equation_residual(&sym, EquationSide::Forward, 0.0, 1.0, 16, 1e-3, &g)
        .expect("forward");
    let bwd = evolution_equation_residual(&sym, EquationSide::Backward, 0.0, 1.0, 16, 1e-3, &g)
        .expect("backward");
    println!("forward equation residual  (δ = 1e-3)         = {fwd:.3e}");
    println!("backward equation residual (δ = 1e-3)         = {bwd:.3e}");
}
