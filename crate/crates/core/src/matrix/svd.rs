//! Singular values by one-sided (Hestenes) Jacobi orthogonalization.
//!
//! Columns are rotated pairwise until every pair is orthogonal to working
//! precision; the column norms are then the singular values. This never
//! forms `m^† m`, so small singular values keep their relative accuracy.

use super::eigen::PlaneRotation;
use super::{ComplexMatrix, C64};
use crate::error::Result;

const MAX_SWEEPS: usize = 80;

fn column_norm_sqr(data: &[C64], rows: usize, cols: usize, c: usize) -> f64 {
    (0..rows).map(|r| data[r * cols + c].norm_sqr()).sum()
}

/// Singular values in descending order, `min(rows, cols)` of them.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    // orthogonalize the shorter side: wide matrices are handled via m^†
    let work = if m.cols() > m.rows() {
        m.adjoint()
    } else {
        m.clone()
    };
    let (rows, cols) = work.shape();
    let mut a = work.into_entries();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = column_norm_sqr(&a, rows, cols, p);
                let beta = column_norm_sqr(&a, rows, cols, q);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma: C64 = (0..rows)
                    .map(|r| a[r * cols + p].conj() * a[r * cols + q])
                    .sum();
                if gamma.norm() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                if let Some(rot) = PlaneRotation::annihilating(alpha, beta, gamma) {
                    rot.apply_right(&mut a, rows, cols, p, q);
                    rotated = true;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut values: Vec<f64> = (0..cols)
        .map(|c| column_norm_sqr(&a, rows, cols, c).sqrt())
        .collect();
    values.sort_by(|x, y| y.total_cmp(x));
    Ok(values)
}

/// Trace (nuclear) norm: the sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(singular_values(m)?.iter().sum())
}
