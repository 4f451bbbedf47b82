//! Bipartite density matrices: Bell-decomposable 2x3 states, maximally mixed
//! states and seeded random ensembles (generic, separable, local unitaries).
//!
//! Composite basis: `|i j⟩` with `i` on side A and `j` on side B maps to the
//! flat index `i * dim_b + j` (0-based throughout).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{eigvals_hermitian, ComplexMatrix, Ket, C64, ZERO};

/// Tolerance used when validating a density matrix (hermiticity, unit
/// trace, positivity).
pub const DENSITY_TOL: f64 = 1e-10;

pub const BELL_DIM_A: usize = 2;
pub const BELL_DIM_B: usize = 3;

/// A density matrix on `C^dim_a ⊗ C^dim_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteDensity {
    dim_a: usize,
    dim_b: usize,
    matrix: ComplexMatrix,
}

impl BipartiteDensity {
    /// Validates with [`DENSITY_TOL`].
    pub fn new(dim_a: usize, dim_b: usize, matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(dim_a, dim_b, matrix, DENSITY_TOL)
    }

    pub fn with_tolerance(
        dim_a: usize,
        dim_b: usize,
        matrix: ComplexMatrix,
        tol: f64,
    ) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::Dimension(format!(
                "subsystem dimensions must be positive, got ({dim_a}, {dim_b})"
            )));
        }
        let n = dim_a * dim_b;
        if matrix.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "dims ({dim_a}, {dim_b}) need a {n}x{n} matrix, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let dev = matrix.hermitian_deviation();
        if dev > tol {
            return Err(Error::InvalidState(format!(
                "not Hermitian: max |m - m^†| entry {dev:e} exceeds {tol:e}"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!(
                "trace is {}{:+}i, expected 1 within {tol:e}",
                tr.re, tr.im
            )));
        }
        let min_eig = eigvals_hermitian(&matrix, tol)?[0];
        if min_eig < -tol {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite: minimum eigenvalue {min_eig:e} below -{tol:e}"
            )));
        }
        Ok(Self {
            dim_a,
            dim_b,
            matrix,
        })
    }

    /// For constructions that are valid by design.
    pub(crate) fn from_parts(dim_a: usize, dim_b: usize, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(matrix.shape(), (dim_a * dim_b, dim_a * dim_b));
        Self {
            dim_a,
            dim_b,
            matrix,
        }
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `⟨i j| ρ |k l⟩`, 0-based.
    #[inline]
    pub fn entry(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.matrix[(i * self.dim_b + j, k * self.dim_b + l)]
    }

    /// Reduced state on A (traces out B).
    pub fn partial_trace_b(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim_a, self.dim_a, |i, k| {
            (0..self.dim_b).map(|j| self.entry(i, j, k, j)).sum()
        })
    }

    /// Reduced state on B (traces out A).
    pub fn partial_trace_a(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim_b, self.dim_b, |j, l| {
            (0..self.dim_a).map(|i| self.entry(i, j, i, l)).sum()
        })
    }

    /// `(u_a ⊗ u_b) ρ (u_a ⊗ u_b)^†`.
    pub fn conjugate_local(&self, u_a: &ComplexMatrix, u_b: &ComplexMatrix) -> Result<Self> {
        if u_a.shape() != (self.dim_a, self.dim_a) || u_b.shape() != (self.dim_b, self.dim_b) {
            return Err(Error::Dimension(format!(
                "local unitaries must be {}x{} and {}x{}",
                self.dim_a, self.dim_a, self.dim_b, self.dim_b
            )));
        }
        let u = u_a.kron(u_b);
        let matrix = u.matmul(&self.matrix)?.matmul(&u.adjoint())?;
        Ok(Self::from_parts(self.dim_a, self.dim_b, matrix))
    }
}

/// Mixing probabilities `p1..p6` of a Bell-decomposable 2x3 state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 6]", into = "[f64; 6]")]
pub struct BDParams([f64; 6]);

impl BDParams {
    /// Allowed deviation of `Σ p_i` from 1.
    pub const SUM_TOL: f64 = 1e-12;

    pub fn new(p: [f64; 6]) -> Result<Self> {
        if let Some((i, x)) = p
            .iter()
            .enumerate()
            .find(|(_, x)| !x.is_finite() || **x < 0.0 || **x > 1.0)
        {
            return Err(Error::Domain(format!("p{} = {x} is outside [0, 1]", i + 1)));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOL {
            return Err(Error::Domain(format!(
                "probabilities sum to {sum}, expected 1 within {:e}",
                Self::SUM_TOL
            )));
        }
        Ok(Self(p))
    }

    /// Accepts a point within `tol` of the simplex (each component and the
    /// sum) and projects it back by clamping and renormalizing.
    pub fn renormalized(p: [f64; 6], tol: f64) -> Result<Self> {
        if let Some((i, x)) = p
            .iter()
            .enumerate()
            .find(|(_, x)| !x.is_finite() || **x < -tol || **x > 1.0 + tol)
        {
            return Err(Error::Domain(format!("p{} = {x} is outside [0, 1]", i + 1)));
        }
        let clamped = p.map(|x| x.clamp(0.0, 1.0));
        let sum: f64 = clamped.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::Domain(format!(
                "probabilities sum to {sum}, expected 1 within {tol:e}"
            )));
        }
        Self::new(clamped.map(|x| x / sum))
    }

    pub fn uniform() -> Self {
        Self([1.0 / 6.0; 6])
    }

    /// Point mass on Bell state `k` (1-based).
    pub fn vertex(k: usize) -> Result<Self> {
        if !(1..=6).contains(&k) {
            return Err(Error::Domain(format!("Bell index {k} is outside 1..=6")));
        }
        let mut p = [0.0; 6];
        p[k - 1] = 1.0;
        Ok(Self(p))
    }

    /// The grid point `parts / n` for a composition of `n` into six parts.
    pub fn from_composition(parts: [u32; 6], n: u32) -> Result<Self> {
        let total: u32 = parts.iter().sum();
        if n == 0 || total != n {
            return Err(Error::Domain(format!(
                "{parts:?} is not a composition of {n}"
            )));
        }
        Self::new(parts.map(|k| f64::from(k) / f64::from(n)))
    }

    /// Uniform (Dirichlet(1,...,1)) sample via normalized exponential draws.
    pub fn random(rng: &mut impl Rng) -> Self {
        let draws: [f64; 6] = std::array::from_fn(|_| rng.sample::<f64, _>(Exp1));
        let sum: f64 = draws.iter().sum();
        let mut p = draws.map(|x| x / sum);
        // push the rounding residue into the largest component
        let residue = 1.0 - p.iter().sum::<f64>();
        let largest = (0..6).max_by(|&i, &j| p[i].total_cmp(&p[j])).unwrap_or(0);
        p[largest] += residue;
        Self(p)
    }

    pub fn probabilities(&self) -> &[f64; 6] {
        &self.0
    }

    /// `(p1 + p2, p3 + p4, p5 + p6)`.
    pub fn pair_sums(&self) -> [f64; 3] {
        let p = &self.0;
        [p[0] + p[1], p[2] + p[3], p[4] + p[5]]
    }

    /// `(p1 - p2, p3 - p4, p5 - p6)`.
    pub fn pair_differences(&self) -> [f64; 3] {
        let p = &self.0;
        [p[0] - p[1], p[2] - p[3], p[4] - p[5]]
    }
}

impl TryFrom<[f64; 6]> for BDParams {
    type Error = Error;

    fn try_from(p: [f64; 6]) -> Result<Self> {
        Self::new(p)
    }
}

impl From<BDParams> for [f64; 6] {
    fn from(p: BDParams) -> Self {
        p.0
    }
}

/// Flat index pairs `(first, second)` and relative sign of the six 2x3 Bell
/// states `(|first⟩ ± |second⟩)/√2`.
const BELL_TERMS: [(usize, usize, f64); 6] = [
    (0, 4, 1.0),  // |11> + |22>
    (0, 4, -1.0), // |11> - |22>
    (1, 5, 1.0),  // |12> + |23>
    (1, 5, -1.0), // |12> - |23>
    (2, 3, 1.0),  // |13> + |21>
    (2, 3, -1.0), // |13> - |21>
];

/// Bell state `|ψ_k⟩` on 2x3, `k` in `1..=6`.
pub fn bell_state(k: usize) -> Result<Ket> {
    if !(1..=6).contains(&k) {
        return Err(Error::Domain(format!("Bell index {k} is outside 1..=6")));
    }
    let (first, second, sign) = BELL_TERMS[k - 1];
    let mut amplitudes = vec![ZERO; BELL_DIM_A * BELL_DIM_B];
    amplitudes[first] = C64::new(1.0, 0.0);
    amplitudes[second] = C64::new(sign, 0.0);
    Ket::normalized(amplitudes)
}

/// `ρ = Σ p_k |ψ_k⟩⟨ψ_k|`.
pub fn bell_decomposable(params: &BDParams) -> BipartiteDensity {
    let n = BELL_DIM_A * BELL_DIM_B;
    let mut matrix = ComplexMatrix::zeros(n, n);
    for (k, &p) in params.probabilities().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let (first, second, sign) = BELL_TERMS[k];
        let half = 0.5 * p;
        matrix[(first, first)] += half;
        matrix[(second, second)] += half;
        matrix[(first, second)] += sign * half;
        matrix[(second, first)] += sign * half;
    }
    BipartiteDensity::from_parts(BELL_DIM_A, BELL_DIM_B, matrix)
}

/// `I / (dim_a·dim_b)`.
pub fn maximally_mixed(dim_a: usize, dim_b: usize) -> Result<BipartiteDensity> {
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::Dimension(format!(
            "subsystem dimensions must be positive, got ({dim_a}, {dim_b})"
        )));
    }
    let n = dim_a * dim_b;
    let matrix = ComplexMatrix::identity(n).scale_real(1.0 / n as f64);
    Ok(BipartiteDensity::from_parts(dim_a, dim_b, matrix))
}

fn complex_gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `G G^† / tr(G G^†)` for a square Ginibre matrix `G`.
pub fn random_density_matrix(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let gg = g.matmul(&g.adjoint()).expect("square");
    let tr = gg.trace().re;
    let mut out = gg.scale_real(1.0 / tr);
    // exact Hermitian diagonal
    for i in 0..dim {
        out[(i, i)].im = 0.0;
    }
    out
}

pub fn random_pure_state(dim: usize, rng: &mut impl Rng) -> Ket {
    loop {
        let amps = (0..dim).map(|_| complex_gaussian(rng)).collect();
        if let Ok(k) = Ket::normalized(amps) {
            return k;
        }
    }
}

/// Haar-random unitary: Gram-Schmidt on the columns of a Ginibre matrix.
pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for u in &cols {
                let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, a) in v.iter_mut().zip(u) {
                    *x -= proj * a;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    ComplexMatrix::from_fn(dim, dim, |r, c| cols[c][r])
}

/// Seeded full-rank random state `G G^† / tr(G G^†)` on `dim_a ⊗ dim_b`.
pub fn random_density(dim_a: usize, dim_b: usize, seed: u64) -> Result<BipartiteDensity> {
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::Dimension(format!(
            "subsystem dimensions must be positive, got ({dim_a}, {dim_b})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let matrix = random_density_matrix(dim_a * dim_b, &mut rng);
    Ok(BipartiteDensity::from_parts(dim_a, dim_b, matrix))
}

/// Seeded separable state `Σ w_i ρ_i^A ⊗ ρ_i^B` with uniform simplex
/// weights and random mixed local factors.
pub fn random_separable(
    dim_a: usize,
    dim_b: usize,
    terms: usize,
    seed: u64,
) -> Result<BipartiteDensity> {
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::Dimension(format!(
            "subsystem dimensions must be positive, got ({dim_a}, {dim_b})"
        )));
    }
    if terms == 0 {
        return Err(Error::Domain(
            "a separable mixture needs at least one term".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<f64> = (0..terms).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();

    let n = dim_a * dim_b;
    let mut matrix = ComplexMatrix::zeros(n, n);
    for w in draws {
        let rho_a = random_density_matrix(dim_a, &mut rng);
        let rho_b = random_density_matrix(dim_b, &mut rng);
        matrix = matrix.add(&rho_a.kron(&rho_b).scale_real(w / total))?;
    }
    Ok(BipartiteDensity::from_parts(dim_a, dim_b, matrix))
}

/// Product of two pure states.
pub fn product_pure(a: &Ket, b: &Ket) -> BipartiteDensity {
    BipartiteDensity::from_parts(a.dim(), b.dim(), a.tensor(b).projector())
}
