//! Evolution operators built from one-step averaging operators.
//!
//! The one-step operator averages against the frozen-symbol increment
//! law,
//!
//! ```text
//! V(s,h) g(x) = ∫ g(y) ν_{s,x,h}(dy)
//!             = (2π)^{-1/2} Σ_j ĝ(ξ_j) e^{ixξ_j - h q(s,x,ξ_j)} Δξ,
//! ```
//!
//! and the evolution operator over `[s, s+t]` is the n-fold product
//! `V(s,t/n) V(s+t/n,t/n) ··· V(s+(n-1)t/n,t/n)` applied to `g` with the
//! RIGHTMOST factor first: operators act on functions of the terminal
//! variable, so the factor at the latest time touches `g` first and the
//! leftmost factor `V(s,·)` is applied last (backward-propagator
//! composition `U(s,t) = U(s,r) U(r,t)`).
//!
//! The quadrature is the one from [`crate::calculus`]; for constant
//! coefficients each step is exact, so compositions are exact too.

use thiserror::Error;

use crate::calculus::{
    apply_generator, boundary_check, synthesize, OperatorError,
};
use crate::grid::FunctionGrid;
use crate::symbol::LevySymbol;

#[derive(Debug, Error)]
pub enum ChernoffError {
    #[error("composition step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: OperatorError,
    },
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// The function U(s, s+t)g on its grid plus the composition diagnostics.
#[derive(Debug, Clone)]
pub struct PropagatorResult {
    pub grid: FunctionGrid,
    /// Start time of the evolution window.
    pub s: f64,
    /// Duration of the window.
    pub duration: f64,
    /// Number of Chernoff steps.
    pub n: u64,
    /// Largest boundary value after each step (mass leakage indicator).
    pub boundary_leakage: Vec<f64>,
}

/// One averaging step V(s,h)g. `h = 0` is the identity, exactly.
pub fn apply_step(
    sym: &LevySymbol,
    s: f64,
    h: f64,
    g: &FunctionGrid,
) -> Result<FunctionGrid, ChernoffError> {
    assert!(h >= 0.0, "step must be nonnegative");
    boundary_check(g).map_err(ChernoffError::Operator)?;
    if h == 0.0 {
        return Ok(g.clone());
    }
    let (out, _imag) = synthesize(sym, s, g, |q| (-h * q).exp())?;
    Ok(out)
}

/// Compose steps k ∈ `range` of the lattice `{base + k·h}` onto `g`,
/// highest k first. Sharing the lattice start keeps step kernels bitwise
/// identical across differently-split compositions.
fn compose_indexed(
    sym: &LevySymbol,
    base: f64,
    h: f64,
    range: std::ops::Range<u64>,
    g: &FunctionGrid,
) -> Result<(FunctionGrid, Vec<f64>), ChernoffError> {
    let mut out = g.clone();
    let mut leakage = Vec::with_capacity((range.end - range.start) as usize);
    for k in range.rev() {
        let s_k = base + k as f64 * h;
        out = apply_step(sym, s_k, h, &out).map_err(|e| match e {
            ChernoffError::Operator(source) => ChernoffError::Step {
                step: k as usize,
                source,
            },
            other => other,
        })?;
        let n = out.len();
        leakage.push(out.values[0].abs().max(out.values[n - 1].abs()));
    }
    leakage.reverse();
    Ok((out, leakage))
}

/// The n-step Chernoff evolution over the window `[s, s + duration]`.
pub fn compose_evolution(
    sym: &LevySymbol,
    s: f64,
    duration: f64,
    n: u64,
    g: &FunctionGrid,
) -> Result<PropagatorResult, ChernoffError> {
    assert!(n >= 1, "n must be >= 1");
    assert!(duration >= 0.0, "duration must be nonnegative");
    let h = duration / n as f64;
    let (grid, boundary_leakage) = compose_indexed(sym, s, h, 0..n, g)?;
    Ok(PropagatorResult {
        grid,
        s,
        duration,
        n,
        boundary_leakage,
    })
}

/// Absolute-time wrapper: U(s,t)g for s ≤ t.
pub fn propagate(
    sym: &LevySymbol,
    s: f64,
    t: f64,
    n: u64,
    g: &FunctionGrid,
) -> Result<PropagatorResult, ChernoffError> {
    assert!(t >= s, "need s <= t");
    compose_evolution(sym, s, t - s, n, g)
}

/// Sup-norm of U(s,t)g - U(s,r)U(r,t)g with all three propagators built
/// from the same n-step lattice over [s,t]; r must sit on that lattice.
pub fn evolution_property_residual(
    sym: &LevySymbol,
    s: f64,
    r: f64,
    t: f64,
    n: u64,
    g: &FunctionGrid,
) -> Result<f64, ChernoffError> {
    assert!(s <= r && r <= t, "need s <= r <= t");
    assert!(n >= 1);
    let h = (t - s) / n as f64;
    let j = ((r - s) / h).round();
    if (s + j * h - r).abs() > 1e-9 * (1.0 + r.abs()) {
        return Err(ChernoffError::Operator(OperatorError::OffLattice { r, h }));
    }
    let j = j as u64;
    let (full, _) = compose_indexed(sym, s, h, 0..n, g)?;
    let (inner, _) = compose_indexed(sym, s, h, j..n, g)?;
    let (outer, _) = compose_indexed(sym, s, h, 0..j, &inner)?;
    Ok(full.max_abs_diff(&outer))
}

/// Which evolution equation to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquationSide {
    /// d/dt U(s,t) = U(s,t) A_t: residual of
    /// [U(s,t+δ)g - U(s,t)g]/δ - U(s,t)(A_t g).
    Forward,
    /// d/ds U(s,t) = -A_s U(s,t): residual of
    /// [U(s,t)g - U(s+δ,t)g]/δ - A_s U(s+δ,t)g.
    Backward,
}

/// Finite-difference residual of the forward/backward evolution equation;
/// O(δ) plus quadrature error for smooth symbols.
pub fn evolution_equation_residual(
    sym: &LevySymbol,
    which: EquationSide,
    s: f64,
    t: f64,
    n: u64,
    delta: f64,
    g: &FunctionGrid,
) -> Result<f64, ChernoffError> {
    assert!(t >= s, "need s <= t");
    assert!(delta > 0.0, "delta must be positive");
    match which {
        EquationSide::Forward => {
            let plus = propagate(sym, s, t + delta, n, g)?.grid;
            let base = propagate(sym, s, t, n, g)?.grid;
            let ag = apply_generator(sym, t, g)?;
            let transported = propagate(sym, s, t, n, &ag)?.grid;
            let quotient = plus.axpy(1.0 / delta, &base, -1.0 / delta);
            Ok(quotient.max_abs_diff(&transported))
        }
        EquationSide::Backward => {
            let base = propagate(sym, s, t, n, g)?.grid;
            let shifted = propagate(sym, s + delta, t, n, g)?.grid;
            let a_shifted = apply_generator(sym, s, &shifted)?;
            let quotient = base.axpy(1.0 / delta, &shifted, -1.0 / delta);
            Ok(quotient.max_abs_diff(&a_shifted))
        }
    }
}
