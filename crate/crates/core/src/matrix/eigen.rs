//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use super::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

pub const DEFAULT_HERMITICITY_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Unitary plane rotation acting on coordinates `(p, q)` that zeroes the
/// off-diagonal entry of a Hermitian 2x2 block under `J^† A J`.
#[derive(Debug, Clone, Copy)]
pub(super) struct PlaneRotation {
    pub pp: C64,
    pub pq: C64,
    pub qp: C64,
    pub qq: C64,
    /// `tan` of the rotation angle; diagonal shifts by `∓ t·|a_pq|`.
    pub t: f64,
}

impl PlaneRotation {
    /// `a_pp`, `a_qq` real diagonal entries, `a_pq` the upper off-diagonal entry.
    /// Returns `None` when `a_pq` is exactly zero.
    pub fn annihilating(a_pp: f64, a_qq: f64, a_pq: C64) -> Option<Self> {
        let b = a_pq.norm();
        if b == 0.0 {
            return None;
        }
        // phase removal: diag(1, e^{-iφ}) makes the block real symmetric
        let phase_conj = a_pq.conj() / b;
        let theta = (a_qq - a_pp) / (2.0 * b);
        let t = if theta.is_infinite() {
            0.0
        } else {
            let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
            sign / (theta.abs() + theta.hypot(1.0))
        };
        let c = 1.0 / t.hypot(1.0);
        let s = t * c;
        Some(Self {
            pp: C64::new(c, 0.0),
            pq: C64::new(s, 0.0),
            qp: phase_conj * (-s),
            qq: phase_conj * c,
            t,
        })
    }

    /// `cols[.., p], cols[.., q] <- [col_p, col_q] · J` on a row-major buffer.
    pub fn apply_right(&self, data: &mut [C64], rows: usize, cols: usize, p: usize, q: usize) {
        for r in 0..rows {
            let xp = data[r * cols + p];
            let xq = data[r * cols + q];
            data[r * cols + p] = xp * self.pp + xq * self.qp;
            data[r * cols + q] = xp * self.pq + xq * self.qq;
        }
    }

    /// `rows p, q <- J^† · [row_p; row_q]`.
    fn apply_left_adjoint(&self, data: &mut [C64], cols: usize, p: usize, q: usize) {
        for c in 0..cols {
            let xp = data[p * cols + c];
            let xq = data[q * cols + c];
            data[p * cols + c] = self.pp.conj() * xp + self.qp.conj() * xq;
            data[q * cols + c] = self.pq.conj() * xp + self.qq.conj() * xq;
        }
    }
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors stored as
/// the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

fn check_hermitian(m: &ComplexMatrix, hermiticity_tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let dev = m.hermitian_deviation();
    if dev > hermiticity_tol {
        return Err(Error::NotHermitian { max_deviation: dev });
    }
    Ok(())
}

fn off_diagonal_norm(data: &[C64], n: usize) -> f64 {
    let mut acc = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                acc += data[r * n + c].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn jacobi(m: &ComplexMatrix, want_vectors: bool) -> (Vec<f64>, Option<ComplexMatrix>) {
    let n = m.rows();
    // work on the exactly Hermitian part
    let mut a: Vec<C64> = ComplexMatrix::from_fn(n, n, |r, c| {
        if r == c {
            C64::new(m[(r, r)].re, 0.0)
        } else {
            (m[(r, c)] + m[(c, r)].conj()) * 0.5
        }
    })
    .into_entries();
    let mut v = want_vectors.then(|| ComplexMatrix::identity(n).into_entries());

    let scale = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = scale * f64::EPSILON;

    for sweep in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a, n) <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let a_pq = a[p * n + q];
                let g = 100.0 * a_pq.norm();
                // negligible against both diagonal entries: drop it
                if sweep > 3
                    && a[p * n + p].re.abs() + g == a[p * n + p].re.abs()
                    && a[q * n + q].re.abs() + g == a[q * n + q].re.abs()
                {
                    a[p * n + q] = ZERO;
                    a[q * n + p] = ZERO;
                    continue;
                }
                let Some(rot) = PlaneRotation::annihilating(a[p * n + p].re, a[q * n + q].re, a_pq)
                else {
                    continue;
                };
                let b = a_pq.norm();
                let new_pp = a[p * n + p].re - rot.t * b;
                let new_qq = a[q * n + q].re + rot.t * b;
                rot.apply_right(&mut a, n, n, p, q);
                rot.apply_left_adjoint(&mut a, n, p, q);
                a[p * n + p] = C64::new(new_pp, 0.0);
                a[q * n + q] = C64::new(new_qq, 0.0);
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                if let Some(v) = v.as_mut() {
                    rot.apply_right(v, n, n, p, q);
                }
            }
        }
    }

    let values = (0..n).map(|i| a[i * n + i].re).collect();
    let vectors = v.map(|data| ComplexMatrix::new(n, n, data).expect("finite rotation output"));
    (values, vectors)
}

/// All eigenvalues of a Hermitian matrix, ascending.
///
/// `hermiticity_tol` bounds the largest entry of `|m - m^†|`; the solver
/// then works on the Hermitian part `(m + m^†)/2`.
pub fn eigvals_hermitian(m: &ComplexMatrix, hermiticity_tol: f64) -> Result<Vec<f64>> {
    check_hermitian(m, hermiticity_tol)?;
    let (mut values, _) = jacobi(m, false);
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Full eigendecomposition, eigenvalues ascending.
pub fn eigh(m: &ComplexMatrix, hermiticity_tol: f64) -> Result<HermitianEigen> {
    check_hermitian(m, hermiticity_tol)?;
    let (values, vectors) = jacobi(m, true);
    let vectors = vectors.expect("vectors requested");
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    Ok(HermitianEigen {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: ComplexMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]),
    })
}
