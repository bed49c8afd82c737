//! Minimal dense symmetric PSD factorization for small matrices.

use thiserror::Error;

/// Pivot tolerance for the PSD factorization, relative to the largest
/// initial diagonal entry.
pub const PSD_PIVOT_TOL: f64 = 1e-10;

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("matrix is not positive semi-definite (worst residual {worst})")]
pub struct NotPsd {
    pub worst: f64,
}

/// Pivoted outer-product Cholesky of a symmetric `d x d` matrix `a`
/// (row-major). On success appends `rank` columns of length `d` to `cols`
/// (column-major) such that the factor `B` satisfies `B Bᵀ ≈ a`, and
/// returns the rank.
///
/// `a` is destroyed. Fails if a diagonal pivot drops below `-tol` or the
/// residual after rank exhaustion is not negligible.
pub fn psd_factor(a: &mut [f64], d: usize, cols: &mut Vec<f64>) -> Result<usize, NotPsd> {
    debug_assert_eq!(a.len(), d * d);
    cols.clear();
    let max_diag = (0..d).map(|i| a[i * d + i]).fold(0.0f64, f64::max);
    let tol = PSD_PIVOT_TOL * max_diag.max(1.0);
    let mut rank = 0;
    for _ in 0..d {
        let (pivot, pval) = (0..d)
            .map(|i| (i, a[i * d + i]))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pval <= tol {
            break;
        }
        let alpha = pval.sqrt();
        let base = cols.len();
        for i in 0..d {
            cols.push(a[i * d + pivot] / alpha);
        }
        for i in 0..d {
            for j in 0..d {
                a[i * d + j] -= cols[base + i] * cols[base + j];
            }
        }
        rank += 1;
    }
    // remaining entries of a genuinely PSD matrix are below the pivot tolerance
    let worst = a.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let worst_diag_neg = (0..d).map(|i| a[i * d + i]).fold(0.0f64, f64::min);
    if worst_diag_neg < -tol || worst > 10.0 * tol {
        cols.clear();
        return Err(NotPsd {
            worst: if worst_diag_neg < -tol { worst_diag_neg } else { worst },
        });
    }
    Ok(rank)
}
