//! Exact sampling from the frozen-symbol increment law.
//!
//! For a symbol frozen at `(s, x)` and a step `h > 0`, the increment
//!
//! ```text
//! Δ = h b(s,x) + G + J + S
//! ```
//!
//! has characteristic function `E e^{iΔ·ξ} = e^{-h q(s,x,ξ)}` exactly,
//! with independent parts: `G ~ Normal(0, h Q(s,x))` through the PSD
//! factor of `Q`; `J` a sum of `N ~ Poisson(h λ(s,x))` jumps from the
//! jump distribution; `S` per-coordinate symmetric α-stable variates
//! scaled by `c(s,x) h^{1/α}`. The new chain state is `x + Δ`.
//!
//! Draw discipline (per sampled increment, in order): `rank(Q)` normals
//! (two uniforms each), one uniform for the Poisson count when
//! `hλ <= 30` (two per attempt for the rejection sampler above), the
//! jumps in order (point: none; two-point: one uniform; Gaussian: rank
//! normals), then `d` stable variates (one uniform for α = 1, two
//! otherwise). All draws come from the caller's stream in this fixed
//! order, so sequences are reproducible for any thread layout.

use num_complex::Complex64;

use crate::linalg::dot;
use crate::rng::RngStream;
use crate::symbol::{JumpDist, LevySymbol, SymbolError};

/// Reusable buffers for allocation-free sampling in hot loops.
#[derive(Debug, Clone)]
pub struct SampleScratch {
    drift: Vec<f64>,
    mat: Vec<f64>,
    cols: Vec<f64>,
}

impl SampleScratch {
    pub fn new(dim: usize) -> SampleScratch {
        SampleScratch {
            drift: vec![0.0; dim],
            mat: vec![0.0; dim * dim],
            cols: Vec::with_capacity(dim * dim),
        }
    }
}

/// Draw one increment Δ of the chain from `(s, x)` over step `h`.
pub fn sample_increment(
    sym: &LevySymbol,
    s: f64,
    x: &[f64],
    h: f64,
    rng: &mut RngStream,
) -> Result<Vec<f64>, SymbolError> {
    let mut out = vec![0.0; sym.dim()];
    let mut scratch = SampleScratch::new(sym.dim());
    sample_increment_into(sym, s, x, h, rng, &mut out, &mut scratch)?;
    Ok(out)
}

/// Allocation-free variant of [`sample_increment`].
pub fn sample_increment_into(
    sym: &LevySymbol,
    s: f64,
    x: &[f64],
    h: f64,
    rng: &mut RngStream,
    out: &mut [f64],
    scratch: &mut SampleScratch,
) -> Result<(), SymbolError> {
    assert!(h > 0.0, "step must be positive");
    let d = sym.dim();
    debug_assert_eq!(out.len(), d);

    sym.drift_into(s, x, &mut scratch.drift)?;
    for (o, b) in out.iter_mut().zip(scratch.drift.iter()) {
        *o = h * b;
    }

    if sym.has_diffusion() {
        let rank = sym.diffusion_factor_into(s, x, &mut scratch.mat, &mut scratch.cols)?;
        let sqrt_h = h.sqrt();
        for k in 0..rank {
            let z = sqrt_h * rng.normal();
            for (i, o) in out.iter_mut().enumerate() {
                *o += scratch.cols[k * d + i] * z;
            }
        }
    }

    if let Some(lambda) = sym.intensity_at(s, x)? {
        let count = poisson(h * lambda, rng);
        let jump = &sym.compound_poisson().expect("cpp present").jump;
        for _ in 0..count {
            add_jump(jump, rng, out);
        }
    }

    if let Some((alpha, c)) = sym.stable_scale_at(s, x)? {
        if c > 0.0 {
            let scale = c * h.powf(1.0 / alpha);
            for o in out.iter_mut() {
                *o += scale * stable_standard(alpha, rng);
            }
        }
    }
    Ok(())
}

fn add_jump(jump: &JumpDist, rng: &mut RngStream, out: &mut [f64]) {
    match jump {
        JumpDist::Point { a } => {
            for (o, v) in out.iter_mut().zip(a.iter()) {
                *o += v;
            }
        }
        JumpDist::TwoPointSymmetric { a } => {
            let sign = if rng.uniform() < 0.5 { 1.0 } else { -1.0 };
            for (o, v) in out.iter_mut().zip(a.iter()) {
                *o += sign * v;
            }
        }
        JumpDist::Gaussian(g) => {
            let d = g.mean.len();
            for (o, m) in out.iter_mut().zip(g.mean.iter()) {
                *o += m;
            }
            for k in 0..g.rank {
                let z = rng.normal();
                for (i, o) in out.iter_mut().enumerate() {
                    *o += g.factor[k * d + i] * z;
                }
            }
        }
    }
}

/// Standard symmetric α-stable variate with characteristic function
/// `e^{-|ξ|^α}`, via the Chambers-Mallows-Stuck transform. α = 1 takes
/// the Cauchy special case `tan(V)`.
pub fn sample_symmetric_stable(alpha: f64, rng: &mut RngStream) -> Result<f64, SymbolError> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(SymbolError::BadAlpha(alpha));
    }
    Ok(stable_standard(alpha, rng))
}

fn stable_standard(alpha: f64, rng: &mut RngStream) -> f64 {
    let v = std::f64::consts::PI * (rng.uniform() - 0.5);
    if alpha == 1.0 {
        return v.tan();
    }
    let w = rng.exponential();
    let num = (alpha * v).sin();
    let den = v.cos().powf(1.0 / alpha);
    let tail = (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha);
    num / den * tail
}

/// Poisson count: sequential inversion for `mean <= 30` (one uniform per
/// value), PTRS transformed rejection above (two uniforms per attempt).
pub fn poisson(mean: f64, rng: &mut RngStream) -> u64 {
    assert!(mean >= 0.0 && mean.is_finite(), "mean must be finite and >= 0");
    if mean <= 30.0 {
        let u = rng.uniform();
        let mut p = (-mean).exp();
        let mut cum = p;
        let mut k = 0u64;
        while u > cum && k < 1100 {
            k += 1;
            p *= mean / k as f64;
            cum += p;
        }
        k
    } else {
        poisson_ptrs(mean, rng)
    }
}

/// Hörmann's PTRS transformed-rejection Poisson sampler.
fn poisson_ptrs(mean: f64, rng: &mut RngStream) -> u64 {
    let b = 0.931 + 2.53 * mean.sqrt();
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = rng.uniform() - 0.5;
        let v = rng.uniform();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln()
            <= k * mean.ln() - mean - ln_factorial(k as u64)
        {
            return k as u64;
        }
    }
}

/// ln(k!): exact table for k <= 20, Stirling series beyond.
fn ln_factorial(k: u64) -> f64 {
    const TABLE: [f64; 21] = [
        1.0,
        1.0,
        2.0,
        6.0,
        24.0,
        120.0,
        720.0,
        5040.0,
        40320.0,
        362880.0,
        3628800.0,
        39916800.0,
        479001600.0,
        6227020800.0,
        87178291200.0,
        1307674368000.0,
        20922789888000.0,
        355687428096000.0,
        6402373705728000.0,
        121645100408832000.0,
        2432902008176640000.0,
    ];
    if k <= 20 {
        TABLE[k as usize].ln()
    } else {
        let x = k as f64;
        (x + 0.5) * x.ln() - x + 0.5 * (std::f64::consts::TAU).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x * x * x)
            + 1.0 / (1260.0 * x.powi(5))
    }
}

/// Exact characteristic function of the post-step state `x + Δ`:
/// `E e^{i(x+Δ)·ξ} = e^{i x·ξ - h q(s,x,ξ)}`.
pub fn increment_cf(
    sym: &LevySymbol,
    s: f64,
    x: &[f64],
    h: f64,
    xi: &[f64],
) -> Result<Complex64, SymbolError> {
    assert!(h >= 0.0, "step must be nonnegative");
    let q = sym.eval(s, x, xi)?;
    Ok(Complex64::new(-h * q.re, dot(x, xi) - h * q.im).exp())
}
