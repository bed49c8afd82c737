//! The space-time lift: a d-dimensional time-inhomogeneous chain becomes
//! a (d+1)-dimensional time-homogeneous one whose first coordinate moves
//! deterministically by 1/n per step. Under a shared random stream the
//! remaining coordinates reproduce the plain chain bit for bit.
//!
//! Run with: cargo run --release --example spacetime_lift

use fevo::chain::{run_chain, run_spacetime_chain};
use fevo::{LevySymbol, RngStream};

fn main() {
    let sym = LevySymbol::builder(1)
        .drift(&["1 + 1*step(s - 0.5)"])
        .expect("drift")
        .diffusion_upper(&["0.25 + 0.1*s"])
        .expect("diffusion")
        .build();

    let n = 8;
    let plain = {
        let mut rng = RngStream::new(99, 0);
        run_chain(&sym, &[0.0], 0.0, 1.0, n, &mut rng).expect("chain")
    };
    let lifted = {
        let mut rng = RngStream::new(99, 0);
        run_spacetime_chain(&sym, &[0.0], 0.0, 1.0, n, &mut rng).expect("lift")
    };

    println!("step   s-coordinate   lifted x        plain x         bitwise");
    let mut all_equal = true;
    for (k, (p, l)) in plain.states.iter().zip(lifted.states.iter()).enumerate() {
        let eq = p[0].to_bits() == l[1].to_bits();
        all_equal &= eq;
        println!("{k:4}   {:<12}   {:<14.8}  {:<14.8}  {eq}", l[0], l[1], p[0]);
    }
    println!();
    println!("spatial coordinates bitwise equal: {all_equal}");
    println!("time coordinate advances by exactly 1/n = {} per step", lifted.h);
}
