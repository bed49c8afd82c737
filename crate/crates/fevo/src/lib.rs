//! Simulation and numerical operator calculus for time-inhomogeneous
//! Feller evolution processes specified by a Lévy-Khintchine symbol
//! q(s,x,ξ).
//!
//! The crate provides, in rough dependency order:
//!
//! - [`field`]: the expression language for coefficient fields over (s, x);
//! - [`symbol`]: Lévy-Khintchine symbols, the space-time symbol
//!   -iσ + q(s,x,ξ), and an empirical symbol validator;
//! - [`rng`] / [`sampler`]: counter-based random streams and exact
//!   sampling of the frozen-symbol increment law with characteristic
//!   function e^{-h q};
//! - [`chain`]: the approximating Markov chain with steps 1/n, its
//!   (d+1)-dimensional space-time lift, and reproducible path ensembles;
//! - [`grid`] / [`calculus`]: function grids and the pseudo-differential
//!   generator A_s⁺ applied by Fourier quadrature, Monte Carlo generator
//!   probes, the space-time generator L = ∂_s + A_s⁺, and the positive
//!   maximum principle check;
//! - [`chernoff`]: evolution operators built as products of one-step
//!   averaging operators, with evolution-identity residuals;
//! - [`validate`]: statistical validation suites (empirical
//!   characteristic functions, strong continuity, left/right generator
//!   coincidence) and structured reports;
//! - [`config`] / [`cli`]: TOML run configuration and the `fevo`
//!   command-line frontend.
//!
//! See the crate examples for one runnable program per capability.

pub mod calculus;
pub mod chain;
pub mod chernoff;
pub mod cli;
pub mod config;
pub mod field;
pub mod grid;
mod linalg;
pub mod rng;
pub mod sampler;
pub mod symbol;
pub mod symbol_probe;
pub mod validate;

pub use field::FieldExpr;
pub use rng::RngStream;
pub use symbol::{JumpDist, LevySymbol, NegativeTimeMode, SpaceTimeSymbol};
