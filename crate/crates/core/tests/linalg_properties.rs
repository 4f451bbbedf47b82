use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sepcrit::matrix::{
    eigh, eigvals_hermitian, singular_values, trace_norm, ComplexMatrix, C64,
    DEFAULT_HERMITICITY_TOL,
};
use sepcrit::states::random_unitary;

fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(&mut rng))
}

/// Hermitian with spectral radius of order one.
fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
    let g = random_matrix(n, n, seed);
    g.add(&g.adjoint())
        .unwrap()
        .scale_real(0.5 / (n as f64).sqrt())
}

/// Determinant by Gaussian elimination with partial pivoting.
fn determinant(m: &ComplexMatrix) -> C64 {
    let n = m.rows();
    let mut a: Vec<Vec<C64>> = (0..n)
        .map(|r| (0..n).map(|c| m[(r, c)]).collect())
        .collect();
    let mut det = C64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm()))
            .unwrap();
        if a[pivot][col].norm() == 0.0 {
            return C64::new(0.0, 0.0);
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        let (upper, lower) = a.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower {
            let f = row[col] / pivot_row[col];
            for (x, v) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * v;
            }
        }
    }
    det
}

#[test]
fn characteristic_polynomial_vanishes_at_eigenvalues() {
    for n in 1..=9 {
        for seed in 0..5 {
            let m = random_hermitian(n, 100 * n as u64 + seed);
            for lambda in eigvals_hermitian(&m, DEFAULT_HERMITICITY_TOL).unwrap() {
                let shifted = m
                    .sub(&ComplexMatrix::identity(n).scale_real(lambda))
                    .unwrap();
                let residual = determinant(&shifted).norm();
                assert!(
                    residual < 1e-8,
                    "n={n} seed={seed} λ={lambda}: |det| = {residual:e}"
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), n in 1usize..=9) {
        let m = random_hermitian(n, seed);
        let eig = eigh(&m, DEFAULT_HERMITICITY_TOL).unwrap();
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let v = &eig.vectors;
        let vd = v.matmul(&ComplexMatrix::diag(&eig.values)).unwrap();
        let back = vd.matmul(&v.adjoint()).unwrap();
        prop_assert!(back.max_abs_diff(&m).unwrap() < 1e-12);
        let vv = v.adjoint().matmul(v).unwrap();
        prop_assert!(vv.max_abs_diff(&ComplexMatrix::identity(n)).unwrap() < 1e-12);
        let sum: f64 = eig.values.iter().sum();
        prop_assert!((sum - m.trace().re).abs() <= 1e-10 * n as f64);
    }

    #[test]
    fn singular_values_are_root_eigenvalues_of_gram(seed in any::<u64>(), rows in 1usize..=9, cols in 1usize..=9) {
        let m = random_matrix(rows, cols, seed);
        let sv = singular_values(&m).unwrap();
        prop_assert_eq!(sv.len(), rows.min(cols));
        prop_assert!(sv.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(sv.iter().all(|&s| s >= 0.0));

        let gram = if rows <= cols {
            m.matmul(&m.adjoint()).unwrap()
        } else {
            m.adjoint().matmul(&m).unwrap()
        };
        let mut eig = eigvals_hermitian(&gram, 1e-9).unwrap();
        eig.reverse();
        for (s, e) in sv.iter().zip(&eig) {
            prop_assert!((s - e.max(0.0).sqrt()).abs() < 1e-9, "{} vs {}", s, e);
        }
        let sq: f64 = sv.iter().map(|s| s * s).sum();
        let fro = m.frobenius_norm().powi(2);
        prop_assert!((sq - fro).abs() <= 1e-10 * rows.max(cols) as f64 * fro.max(1.0));
    }

    #[test]
    fn trace_norm_is_unitarily_invariant(seed in any::<u64>(), rows in 1usize..=9, cols in 1usize..=9) {
        let m = random_matrix(rows, cols, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let u = random_unitary(rows, &mut rng);
        let v = random_unitary(cols, &mut rng);
        let rotated = u.matmul(&m).unwrap().matmul(&v).unwrap();
        let (a, b) = (trace_norm(&m).unwrap(), trace_norm(&rotated).unwrap());
        prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn trace_norm_triangle_inequality(seed in any::<u64>(), rows in 1usize..=9, cols in 1usize..=9) {
        let a = random_matrix(rows, cols, seed);
        let b = random_matrix(rows, cols, seed.wrapping_add(1));
        let sum = trace_norm(&a.add(&b).unwrap()).unwrap();
        prop_assert!(sum <= trace_norm(&a).unwrap() + trace_norm(&b).unwrap() + 1e-9);
    }

    #[test]
    fn trace_norm_zero_only_for_zero(seed in any::<u64>(), rows in 1usize..=6, cols in 1usize..=6) {
        let m = random_matrix(rows, cols, seed);
        prop_assert!(trace_norm(&m).unwrap() > 0.0);
    }
}

#[test]
fn ill_conditioned_singular_values_keep_relative_accuracy() {
    // u diag(1, 1e-8, 1e-12) v with random unitaries
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u = random_unitary(3, &mut rng);
    let v = random_unitary(3, &mut rng);
    let m = u
        .matmul(&ComplexMatrix::diag(&[1.0, 1e-8, 1e-12]))
        .unwrap()
        .matmul(&v)
        .unwrap();
    let sv = singular_values(&m).unwrap();
    assert!((sv[0] - 1.0).abs() < 1e-14);
    assert!((sv[1] - 1e-8).abs() < 1e-15);
    assert!((sv[2] - 1e-12).abs() < 1e-15);
}
