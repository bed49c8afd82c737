//! Empirical probes of the symbol hypotheses.
//!
//! The growth bound |q(s,x,ξ)| ≤ c(1+|ξ|²) and continuity of s ↦ q(s,x,ξ)
//! are assumptions on user input; this module measures both over a probe
//! box instead of certifying them. The continuity probe scans a time grid
//! for the largest adjacent-sample jump and then bisects the worst
//! interval: for a symbol Lipschitz in s the bracketed difference decays
//! with the interval width, while a genuine discontinuity leaves it
//! pinned at the jump magnitude.

use crate::symbol::LevySymbol;

/// Probe box and sampling budget for [`validate_symbol`].
#[derive(Debug, Clone)]
pub struct SymbolProbe {
    pub s_range: (f64, f64),
    pub x_ranges: Vec<(f64, f64)>,
    pub xi_ranges: Vec<(f64, f64)>,
    /// Time-grid resolution of the continuity scan (inclusive endpoints).
    pub s_points: usize,
    /// Number of low-discrepancy (x, ξ) sample pairs.
    pub point_samples: usize,
    /// Bisection depth of the discontinuity locator.
    pub refinements: usize,
}

impl SymbolProbe {
    pub fn new(dim: usize) -> SymbolProbe {
        SymbolProbe {
            s_range: (0.0, 1.0),
            x_ranges: vec![(-2.0, 2.0); dim],
            xi_ranges: vec![(-5.0, 5.0); dim],
            s_points: 101,
            point_samples: 64,
            refinements: 40,
        }
    }
}

/// Result of the time-continuity scan.
#[derive(Debug, Clone)]
pub struct ContinuityReport {
    pub discontinuous: bool,
    /// |q| jump across the final bracket (the fitted jump magnitude when
    /// flagged, a vanishing residual otherwise).
    pub jump_magnitude: f64,
    /// Midpoint of the final bracket.
    pub location_s: f64,
    pub probe_x: Vec<f64>,
    pub probe_xi: Vec<f64>,
    /// (bracket width, |Δq| across it) per refinement level.
    pub trace: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct SymbolReport {
    /// Smallest empirical c with |q| ≤ c(1+|ξ|²) over the sampled box.
    pub bound_constant: f64,
    pub bound_argmax: (f64, Vec<f64>, Vec<f64>),
    /// max |q(s,x,0)| over samples; zero for a well-formed symbol.
    pub origin_max_abs: f64,
    /// max |q(s,x,-ξ) - conj q(s,x,ξ)| over samples.
    pub conjugate_max_dev: f64,
    pub min_real_part: f64,
    pub continuity: ContinuityReport,
    /// Per-point evaluation failures (recorded, not fatal).
    pub eval_errors: Vec<String>,
    pub points_probed: usize,
}

impl SymbolReport {
    /// Algebraic spot checks at tolerance `tol` (origin, conjugate
    /// symmetry, nonnegative real part).
    pub fn algebra_ok(&self, tol: f64) -> bool {
        self.origin_max_abs <= tol && self.conjugate_max_dev <= tol && self.min_real_part >= -tol
    }
}

const MAX_RECORDED_ERRORS: usize = 32;

const PRIMES: [usize; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Probe the symbol over the box: growth constant, continuity in s, and
/// algebraic spot checks. Evaluation errors are recorded per point.
pub fn validate_symbol(sym: &LevySymbol, probe: &SymbolProbe) -> SymbolReport {
    let d = sym.dim();
    assert_eq!(probe.x_ranges.len(), d, "x_ranges dimension mismatch");
    assert_eq!(probe.xi_ranges.len(), d, "xi_ranges dimension mismatch");
    assert!(probe.s_points >= 2 && probe.point_samples >= 1);
    assert!(2 * d <= PRIMES.len(), "probe supports dimensions up to {}", PRIMES.len() / 2);

    let points: Vec<(Vec<f64>, Vec<f64>)> = (1..=probe.point_samples)
        .map(|k| {
            let x: Vec<f64> = (0..d)
                .map(|i| lerp(probe.x_ranges[i], halton(k, PRIMES[i])))
                .collect();
            let xi: Vec<f64> = (0..d)
                .map(|i| lerp(probe.xi_ranges[i], halton(k, PRIMES[d + i])))
                .collect();
            (x, xi)
        })
        .collect();

    let (s_lo, s_hi) = probe.s_range;
    let ds = (s_hi - s_lo) / (probe.s_points - 1) as f64;

    let mut errors = Vec::new();
    let mut error_count = 0usize;
    let mut bound_c = 0.0f64;
    let mut bound_argmax = (s_lo, vec![0.0; d], vec![0.0; d]);
    let mut origin_max = 0.0f64;
    let mut conj_max = 0.0f64;
    let mut min_re = f64::INFINITY;
    let mut q_scale = 0.0f64;
    // worst adjacent-sample jump of the continuity scan
    let mut worst = None::<(usize, f64, f64, f64)>; // (point idx, s_left, s_right, diff)
    let mut probed = 0usize;

    for (pi, (x, xi)) in points.iter().enumerate() {
        let nxi: Vec<f64> = xi.iter().map(|v| -v).collect();
        let mut prev: Option<(f64, num_complex::Complex64)> = None;
        for i in 0..probe.s_points {
            let s = if i + 1 == probe.s_points { s_hi } else { s_lo + i as f64 * ds };
            let q = match sym.eval(s, x, xi) {
                Ok(q) => q,
                Err(e) => {
                    error_count += 1;
                    if errors.len() < MAX_RECORDED_ERRORS {
                        errors.push(format!("s={s}, x={x:?}, xi={xi:?}: {e}"));
                    }
                    prev = None;
                    continue;
                }
            };
            probed += 1;
            q_scale = q_scale.max(q.norm());
            let xi_sq: f64 = xi.iter().map(|v| v * v).sum();
            let ratio = q.norm() / (1.0 + xi_sq);
            if ratio > bound_c {
                bound_c = ratio;
                bound_argmax = (s, x.clone(), xi.clone());
            }
            min_re = min_re.min(q.re);
            if let Ok(qm) = sym.eval(s, x, &nxi) {
                conj_max = conj_max.max((qm - q.conj()).norm());
            }
            if let Ok(q0) = sym.eval(s, x, &vec![0.0; d]) {
                origin_max = origin_max.max(q0.norm());
            }
            if let Some((ps, pq)) = prev {
                let d_adj = (q - pq).norm();
                if worst.is_none_or(|w| d_adj > w.3) {
                    worst = Some((pi, ps, s, d_adj));
                }
            }
            prev = Some((s, q));
        }
    }
    if error_count > errors.len() {
        errors.push(format!(
            "... and {} more evaluation errors",
            error_count - errors.len()
        ));
    }

    let floor = 1e-12 * (1.0 + q_scale);
    let continuity = match worst {
        Some((pi, lo, hi, coarse)) if coarse > floor => {
            refine_discontinuity(sym, &points[pi], lo, hi, coarse, probe.refinements, q_scale)
        }
        Some((pi, lo, hi, coarse)) => ContinuityReport {
            discontinuous: false,
            jump_magnitude: coarse,
            location_s: 0.5 * (lo + hi),
            probe_x: points[pi].0.clone(),
            probe_xi: points[pi].1.clone(),
            trace: vec![(hi - lo, coarse)],
        },
        None => ContinuityReport {
            discontinuous: false,
            jump_magnitude: 0.0,
            location_s: s_lo,
            probe_x: vec![0.0; d],
            probe_xi: vec![0.0; d],
            trace: Vec::new(),
        },
    };

    SymbolReport {
        bound_constant: bound_c,
        bound_argmax,
        origin_max_abs: origin_max,
        conjugate_max_dev: conj_max,
        min_real_part: if min_re.is_finite() { min_re } else { 0.0 },
        continuity,
        eval_errors: errors,
        points_probed: probed,
    }
}

fn refine_discontinuity(
    sym: &LevySymbol,
    point: &(Vec<f64>, Vec<f64>),
    mut lo: f64,
    mut hi: f64,
    coarse: f64,
    refinements: usize,
    q_scale: f64,
) -> ContinuityReport {
    let (x, xi) = point;
    let eval = |s: f64| sym.eval(s, x, xi).ok();
    let mut q_lo = eval(lo);
    let mut q_hi = eval(hi);
    let mut trace = vec![(hi - lo, coarse)];
    for _ in 0..refinements {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let q_mid = eval(mid);
        let dl = diff(&q_lo, &q_mid);
        let dr = diff(&q_mid, &q_hi);
        if dl >= dr {
            hi = mid;
            q_hi = q_mid;
        } else {
            lo = mid;
            q_lo = q_mid;
        }
        trace.push((hi - lo, diff(&q_lo, &q_hi)));
    }
    let final_jump = diff(&q_lo, &q_hi);
    let floor = 1e-7 * (1.0 + q_scale);
    // a Lipschitz symbol shrinks the bracketed difference with the width;
    // a jump keeps it at the coarse level
    let discontinuous = final_jump > floor && final_jump > 0.5 * coarse;
    ContinuityReport {
        discontinuous,
        jump_magnitude: final_jump,
        location_s: 0.5 * (lo + hi),
        probe_x: x.clone(),
        probe_xi: xi.clone(),
        trace,
    }
}

fn diff(a: &Option<num_complex::Complex64>, b: &Option<num_complex::Complex64>) -> f64 {
    match (a, b) {
        (Some(a), Some(b)) => (a - b).norm(),
        _ => 0.0,
    }
}

fn lerp(range: (f64, f64), t: f64) -> f64 {
    range.0 + (range.1 - range.0) * t
}

fn halton(index: usize, base: usize) -> f64 {
    let mut n = index;
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while n > 0 {
        out += (n % base) as f64 * inv;
        n /= base;
        inv /= base as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_bound_constant() {
        // |ξ²/2| ≤ ½(1+ξ²) analytically, so the empirical c stays below ½
        let sym = LevySymbol::brownian_1d(1.0);
        let report = validate_symbol(&sym, &SymbolProbe::new(1));
        assert!(report.bound_constant <= 0.5 + 1e-9, "c = {}", report.bound_constant);
        assert!(!report.continuity.discontinuous);
        assert!(report.algebra_ok(1e-12));
        assert_eq!(report.origin_max_abs, 0.0);
    }

    #[test]
    fn piecewise_drift_flags_discontinuity() {
        let sym = LevySymbol::piecewise_drift_1d(1.0, 2.0, 0.5);
        let report = validate_symbol(&sym, &SymbolProbe::new(1));
        let c = &report.continuity;
        assert!(c.discontinuous);
        assert!((c.location_s - 0.5).abs() < 1e-6, "located at {}", c.location_s);
        // jump is |β-α|·|ξ| at the probed ξ
        let expected = 1.0 * c.probe_xi[0].abs();
        assert!(
            (c.jump_magnitude - expected).abs() <= 0.1 * expected,
            "jump {} vs expected {}",
            c.jump_magnitude,
            expected
        );
        assert!(report.algebra_ok(1e-12));
    }

    #[test]
    fn smooth_time_dependence_passes() {
        let sym = LevySymbol::drift_1d("1 + s^2/4").unwrap();
        let report = validate_symbol(&sym, &SymbolProbe::new(1));
        assert!(!report.continuity.discontinuous);
        assert!(report.continuity.jump_magnitude < 1e-6);
    }

    #[test]
    fn eval_errors_recorded_not_fatal() {
        // drift 1/s blows up at the s = 0 grid point
        let sym = LevySymbol::drift_1d("1/s").unwrap();
        let report = validate_symbol(&sym, &SymbolProbe::new(1));
        assert!(!report.eval_errors.is_empty());
        assert!(report.points_probed > 0);
    }
}
