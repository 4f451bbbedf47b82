//! Separability tests: positive partial transpose (PPT) and the realignment
//! (computable cross norm, CCNR) criterion.
//!
//! Each test has a generic numeric route working on any bipartite density
//! matrix and, for Bell-decomposable 2x3 states, a closed form in the
//! mixing probabilities. The two routes are kept independent so one can be
//! checked against the other.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{eigvals_hermitian, singular_values, ComplexMatrix, DEFAULT_HERMITICITY_TOL};
use crate::states::{bell_decomposable, BDParams, BipartiteDensity};

/// Default decision tolerance for both criteria.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Allowed negative slack of `B - C` before the closed form is declared
/// inconsistent.
pub const ABC_CONSISTENCY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Criterion {
    #[serde(rename = "PPT")]
    Ppt,
    #[serde(rename = "CCNR")]
    Ccnr,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

impl NamedValue {
    fn new(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            value,
        }
    }
}

/// Outcome of one criterion.
///
/// PPT: `value` is the minimum eigenvalue of the partial transpose and the
/// test passes when `value >= -tolerance`. CCNR: `value` is the trace norm
/// of the realigned matrix and the test passes when `value <= 1 + tolerance`.
/// `boundary` marks values within `tolerance` of the threshold; those count
/// as satisfied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub criterion: Criterion,
    pub value: f64,
    pub threshold: f64,
    pub satisfied: bool,
    pub boundary: bool,
    pub tolerance: f64,
    pub witness: Vec<NamedValue>,
}

impl CriterionReport {
    fn ppt(value: f64, tolerance: f64, witness: Vec<NamedValue>) -> Self {
        Self {
            criterion: Criterion::Ppt,
            value,
            threshold: 0.0,
            satisfied: value >= -tolerance,
            boundary: value.abs() <= tolerance,
            tolerance,
            witness,
        }
    }

    fn ccnr(value: f64, tolerance: f64, witness: Vec<NamedValue>) -> Self {
        Self {
            criterion: Criterion::Ccnr,
            value,
            threshold: 1.0,
            satisfied: value <= 1.0 + tolerance,
            boundary: (value - 1.0).abs() <= tolerance,
            tolerance,
            witness,
        }
    }
}

/// Partial transpose on one subsystem.
///
/// Side A: `⟨ij|ρ^{T_A}|kl⟩ = ⟨kj|ρ|il⟩`; side B: `⟨ij|ρ^{T_B}|kl⟩ = ⟨il|ρ|kj⟩`.
pub fn partial_transpose(rho: &BipartiteDensity, side: Side) -> ComplexMatrix {
    partial_transpose_matrix(rho.matrix(), rho.dim_a(), rho.dim_b(), side)
}

/// Partial transpose of a raw `(dim_a·dim_b)`-square matrix.
pub fn partial_transpose_matrix(
    m: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    side: Side,
) -> ComplexMatrix {
    let n = dim_a * dim_b;
    ComplexMatrix::from_fn(n, n, |row, col| {
        let (i, j) = (row / dim_b, row % dim_b);
        let (k, l) = (col / dim_b, col % dim_b);
        match side {
            Side::A => m[(k * dim_b + j, i * dim_b + l)],
            Side::B => m[(i * dim_b + l, k * dim_b + j)],
        }
    })
}

/// Spectrum of `ρ^{T_side}`, ascending.
pub fn partial_transpose_spectrum(rho: &BipartiteDensity, side: Side) -> Result<Vec<f64>> {
    eigvals_hermitian(&partial_transpose(rho, side), DEFAULT_HERMITICITY_TOL)
}

/// Generic PPT test on the A-side partial transpose; witness is the full
/// partial-transpose spectrum.
pub fn ppt_report(rho: &BipartiteDensity, tol: f64) -> Result<CriterionReport> {
    let spectrum = partial_transpose_spectrum(rho, Side::A)?;
    let witness = spectrum
        .iter()
        .enumerate()
        .map(|(i, &x)| NamedValue::new(format!("pt_eig_{}", i + 1), x))
        .collect();
    Ok(CriterionReport::ppt(spectrum[0], tol, witness))
}

/// PPT test for a Bell-decomposable state: the value is still the numeric
/// minimum partial-transpose eigenvalue, the witness carries the three
/// closed-form residuals.
pub fn ppt_report_bd(params: &BDParams, tol: f64) -> Result<CriterionReport> {
    let spectrum = partial_transpose_spectrum(&bell_decomposable(params), Side::A)?;
    let r = bd_ppt_residuals(params);
    let witness = vec![
        NamedValue::new("r1", r.r1),
        NamedValue::new("r2", r.r2),
        NamedValue::new("r3", r.r3),
    ];
    Ok(CriterionReport::ppt(spectrum[0], tol, witness))
}

/// The three PPT inequalities of a Bell-decomposable 2x3 state, written as
/// `lhs - rhs`; the state is PPT iff all are non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PptResiduals {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl PptResiduals {
    pub fn min(&self) -> f64 {
        self.r1.min(self.r2).min(self.r3)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.r1, self.r2, self.r3]
    }

    pub fn all_satisfied(&self, tol: f64) -> bool {
        self.min() >= -tol
    }
}

pub fn bd_ppt_residuals(params: &BDParams) -> PptResiduals {
    let [s12, s34, s56] = params.pair_sums();
    let [d12, d34, d56] = params.pair_differences();
    PptResiduals {
        r1: s12 * s34 - d56 * d56,
        r2: s34 * s56 - d12 * d12,
        r3: s56 * s12 - d34 * d34,
    }
}

/// Closed-form spectrum of `ρ^{T_A}` for a Bell-decomposable state.
///
/// The partial transpose splits into three 2x2 blocks, one per residual,
/// each `[[x, c], [c, y]]` with half pair sums on the diagonal and a half
/// pair difference off it.
pub fn bd_pt_spectrum(params: &BDParams) -> [f64; 6] {
    let [s12, s34, s56] = params.pair_sums().map(|x| 0.5 * x);
    let [d12, d34, d56] = params.pair_differences().map(|x| 0.5 * x);
    let blocks = [(s34, s12, d56), (s34, s56, d12), (s12, s56, d34)];
    let mut out = [0.0; 6];
    for (b, &(x, y, c)) in blocks.iter().enumerate() {
        let mid = 0.5 * (x + y);
        let radius = (0.5 * (x - y)).hypot(c);
        out[2 * b] = mid - radius;
        out[2 * b + 1] = mid + radius;
    }
    out.sort_by(f64::total_cmp);
    out
}

pub fn bd_pt_min_eigenvalue(params: &BDParams) -> f64 {
    bd_pt_spectrum(params)[0]
}

/// Realigned matrix, `dim_a² x dim_b²`: row `i·dim_a + k`, column
/// `j·dim_b + l` holds `⟨ij|ρ|kl⟩`.
pub fn realign(rho: &BipartiteDensity) -> ComplexMatrix {
    let (da, db) = rho.dims();
    ComplexMatrix::from_fn(da * da, db * db, |row, col| {
        let (i, k) = (row / da, row % da);
        let (j, l) = (col / db, col % db);
        rho.entry(i, j, k, l)
    })
}

/// CCNR test: trace norm of the realigned matrix against 1; witness is the
/// singular values, descending.
pub fn ccnr_report(rho: &BipartiteDensity, tol: f64) -> Result<CriterionReport> {
    let sv = singular_values(&realign(rho))?;
    let value = sv.iter().sum();
    let witness = sv
        .iter()
        .enumerate()
        .map(|(i, &s)| NamedValue::new(format!("sv_{}", i + 1), s))
        .collect();
    Ok(CriterionReport::ccnr(value, tol, witness))
}

/// Closed-form quantities whose combinations `A, A, B + C, B - C` are the
/// eigenvalues of `R R^†` for the realigned Bell-decomposable state `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ABCTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ABCTriple {
    /// `{√(B+C), √A, √A, √(B−C)}` sorted descending; `B - C` is clamped at 0.
    pub fn singular_values(&self) -> [f64; 4] {
        let mut sv = [
            (self.b + self.c).sqrt(),
            self.a.sqrt(),
            self.a.sqrt(),
            (self.b - self.c).max(0.0).sqrt(),
        ];
        sv.sort_by(|x, y| y.total_cmp(x));
        sv
    }
}

pub fn bd_abc(params: &BDParams) -> ABCTriple {
    let [s12, s34, s56] = params.pair_sums();
    let [d12, d34, d56] = params.pair_differences();
    ABCTriple {
        a: 0.25 * (d12 * d12 + d34 * d34 + d56 * d56),
        b: 0.25 * (s12 * s12 + s34 * s34 + s56 * s56),
        c: 0.25 * (s12 * s34 + s34 * s56 + s56 * s12),
    }
}

/// `2√A + √(B+C) + √(B−C)`.
pub fn bd_ccnr_closed_form(params: &BDParams) -> Result<f64> {
    let abc = bd_abc(params);
    let gap = abc.b - abc.c;
    if gap < -ABC_CONSISTENCY_TOL {
        return Err(Error::Internal(format!(
            "B - C = {gap:e} is negative for {:?}",
            params.probabilities()
        )));
    }
    Ok(2.0 * abc.a.sqrt() + (abc.b + abc.c).sqrt() + gap.max(0.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparabilityClass {
    Separable,
    EntangledCcnrDetected,
    EntangledCcnrBlind,
}

impl SeparabilityClass {
    /// Valid where PPT is equivalent to separability.
    pub fn from_verdicts(ppt_satisfied: bool, ccnr_satisfied: bool) -> Self {
        match (ppt_satisfied, ccnr_satisfied) {
            (true, _) => Self::Separable,
            (false, false) => Self::EntangledCcnrDetected,
            (false, true) => Self::EntangledCcnrBlind,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Separable => "separable",
            Self::EntangledCcnrDetected => "entangled_ccnr_detected",
            Self::EntangledCcnrBlind => "entangled_ccnr_blind",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub separable: bool,
    pub class: SeparabilityClass,
    pub ppt: CriterionReport,
    pub ccnr: CriterionReport,
    /// Entangled, yet the realignment criterion is satisfied.
    pub ccnr_blind: bool,
}

/// Whether PPT decides separability for these subsystem dimensions.
pub fn ppt_is_sufficient(dim_a: usize, dim_b: usize) -> bool {
    matches!((dim_a, dim_b), (2, 2) | (2, 3) | (3, 2))
}

/// Separability verdict for 2x2, 2x3 and 3x2 states, where PPT is both
/// necessary and sufficient. Other dimensions are refused.
pub fn classify_2x3(rho: &BipartiteDensity, tol: f64) -> Result<Classification> {
    let (da, db) = rho.dims();
    if !ppt_is_sufficient(da, db) {
        return Err(Error::Dimension(format!(
            "separability verdict is only available for 2x2, 2x3 and 3x2 systems, got {da}x{db}"
        )));
    }
    let ppt = ppt_report(rho, tol)?;
    let ccnr = ccnr_report(rho, tol)?;
    Ok(classification_from(ppt, ccnr))
}

pub(crate) fn classification_from(ppt: CriterionReport, ccnr: CriterionReport) -> Classification {
    let class = SeparabilityClass::from_verdicts(ppt.satisfied, ccnr.satisfied);
    Classification {
        separable: ppt.satisfied,
        class,
        ccnr_blind: class == SeparabilityClass::EntangledCcnrBlind,
        ppt,
        ccnr,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{maximally_mixed, product_pure, random_density_matrix, random_pure_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const EQ14: [f64; 6] = [0.3, 0.0, 0.2, 0.1, 0.4, 0.0];

    fn eq14() -> BDParams {
        BDParams::new(EQ14).unwrap()
    }

    #[test]
    fn residual_examples() {
        let r = bd_ppt_residuals(&eq14());
        assert!((r.r1 + 0.07).abs() < 1e-12);
        assert!((r.r2 - 0.03).abs() < 1e-12);
        assert!((r.r3 - 0.11).abs() < 1e-12);

        let r = bd_ppt_residuals(&BDParams::uniform());
        for x in r.as_array() {
            assert!((x - 1.0 / 9.0).abs() < 1e-15);
        }

        let r = bd_ppt_residuals(&BDParams::vertex(1).unwrap());
        assert_eq!(r.r2, -1.0);
    }

    #[test]
    fn abc_examples() {
        let abc = bd_abc(&BDParams::uniform());
        assert!(abc.a.abs() < 1e-16);
        assert!((abc.b - 1.0 / 12.0).abs() < 1e-15 && (abc.c - 1.0 / 12.0).abs() < 1e-15);

        let abc = bd_abc(&BDParams::vertex(1).unwrap());
        assert_eq!((abc.a, abc.b, abc.c), (0.25, 0.25, 0.0));

        let abc = bd_abc(&eq14());
        assert!((abc.a - 0.065).abs() < 1e-15);
        assert!((abc.b - 0.085).abs() < 1e-15);
        assert!((abc.c - 0.0825).abs() < 1e-15);
    }

    #[test]
    fn closed_form_ccnr_examples() {
        let v = bd_ccnr_closed_form(&BDParams::uniform()).unwrap();
        assert!((v - (1.0f64 / 6.0).sqrt()).abs() < 1e-12);
        assert!((bd_ccnr_closed_form(&BDParams::vertex(4).unwrap()).unwrap() - 2.0).abs() < 1e-15);
        let expect = 2.0 * 0.065f64.sqrt() + 0.1675f64.sqrt() + 0.0025f64.sqrt();
        let v = bd_ccnr_closed_form(&eq14()).unwrap();
        assert!((v - expect).abs() < 1e-12);
        assert!((v - 0.969170).abs() < 5e-7);
    }

    #[test]
    fn partial_transpose_is_an_involution() {
        let rho = crate::states::random_density(2, 3, 5).unwrap();
        for side in [Side::A, Side::B] {
            let once = partial_transpose(&rho, side);
            let twice = partial_transpose_matrix(&once, 2, 3, side);
            assert_eq!(&twice, rho.matrix());
        }
    }

    #[test]
    fn partial_transpose_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sigma = random_density_matrix(2, &mut rng);
        let tau = random_density_matrix(3, &mut rng);
        let rho = BipartiteDensity::new(2, 3, sigma.kron(&tau)).unwrap();
        let pt = partial_transpose(&rho, Side::A);
        assert!(pt.max_abs_diff(&sigma.transpose().kron(&tau)).unwrap() < 1e-16);
        assert!(ppt_report(&rho, DEFAULT_TOL).unwrap().satisfied);
    }

    #[test]
    fn counterexample_pt_minimum() {
        let rho = bell_decomposable(&eq14());
        for side in [Side::A, Side::B] {
            let ev = partial_transpose_spectrum(&rho, side).unwrap();
            assert!((ev[0] + 0.05).abs() < 1e-12, "side {side:?}: {}", ev[0]);
        }
        let report = ppt_report(&rho, DEFAULT_TOL).unwrap();
        assert!(!report.satisfied);
        assert!((report.value + 0.05).abs() < 1e-12);
        assert!((bd_pt_min_eigenvalue(&eq14()) + 0.05).abs() < 1e-15);
    }

    #[test]
    fn ppt_report_maximally_mixed() {
        let r = ppt_report(&maximally_mixed(2, 3).unwrap(), DEFAULT_TOL).unwrap();
        assert!(r.satisfied && !r.boundary);
        assert!((r.value - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(r.witness.len(), 6);
    }

    #[test]
    fn ppt_report_bd_carries_residuals() {
        let r = ppt_report_bd(&eq14(), DEFAULT_TOL).unwrap();
        assert!(!r.satisfied);
        assert_eq!(r.witness[0].name, "r1");
        assert!((r.witness[0].value + 0.07).abs() < 1e-12);
    }

    #[test]
    fn realign_basis_state_and_product() {
        let e0 = crate::matrix::Ket::normalized(vec![
            crate::matrix::C64::new(1.0, 0.0),
            crate::matrix::C64::new(0.0, 0.0),
            crate::matrix::C64::new(0.0, 0.0),
        ])
        .unwrap();
        let e0a = crate::matrix::Ket::normalized(vec![
            crate::matrix::C64::new(1.0, 0.0),
            crate::matrix::C64::new(0.0, 0.0),
        ])
        .unwrap();
        let rho = product_pure(&e0a, &e0);
        let r = realign(&rho);
        assert_eq!(r.shape(), (4, 9));
        let nonzero: Vec<_> = r.entries().iter().filter(|z| z.norm() > 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].re, 1.0);
        assert!((ccnr_report(&rho, DEFAULT_TOL).unwrap().value - 1.0).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = product_pure(
            &random_pure_state(2, &mut rng),
            &random_pure_state(3, &mut rng),
        );
        let sv = singular_values(&realign(&rho)).unwrap();
        assert!(
            sv[1] < 1e-12,
            "product state realignment should be rank one: {sv:?}"
        );
    }

    #[test]
    fn realign_preserves_frobenius_norm() {
        for seed in 0..10 {
            let rho = crate::states::random_density(2, 3, seed).unwrap();
            let r = realign(&rho);
            assert!((r.frobenius_norm() - rho.matrix().frobenius_norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn realigned_bd_pattern() {
        let p = BDParams::new([0.05, 0.1, 0.15, 0.2, 0.25, 0.25]).unwrap();
        let s = p.pair_sums().map(|x| x / 2.0);
        let d = p.pair_differences().map(|x| x / 2.0);
        let r = realign(&bell_decomposable(&p));
        // rows (1,1),(1,2),(2,1),(2,2) → 0..4; columns (j,l) → 3j + l
        let mut expect = ComplexMatrix::zeros(4, 9);
        expect[(0, 0)] = s[0].into();
        expect[(0, 4)] = s[1].into();
        expect[(0, 8)] = s[2].into();
        expect[(3, 0)] = s[2].into();
        expect[(3, 4)] = s[0].into();
        expect[(3, 8)] = s[1].into();
        expect[(1, 1)] = d[0].into();
        expect[(1, 5)] = d[1].into();
        expect[(1, 6)] = d[2].into();
        expect[(2, 3)] = d[0].into();
        expect[(2, 7)] = d[1].into();
        expect[(2, 2)] = d[2].into();
        assert!(r.max_abs_diff(&expect).unwrap() < 1e-16);
    }

    #[test]
    fn ccnr_examples() {
        let r = ccnr_report(&maximally_mixed(2, 3).unwrap(), DEFAULT_TOL).unwrap();
        assert!(r.satisfied);
        assert!((r.value - 1.0 / 6f64.sqrt()).abs() < 1e-12);

        let r = ccnr_report(
            &bell_decomposable(&BDParams::vertex(1).unwrap()),
            DEFAULT_TOL,
        )
        .unwrap();
        assert!(!r.satisfied);
        assert!((r.value - 2.0).abs() < 1e-12);

        let r = ccnr_report(&bell_decomposable(&eq14()), DEFAULT_TOL).unwrap();
        assert!(r.satisfied);
        assert!((r.value - bd_ccnr_closed_form(&eq14()).unwrap()).abs() < 1e-12);
        let expect = [0.1675f64.sqrt(), 0.065f64.sqrt(), 0.065f64.sqrt(), 0.05];
        for (w, e) in r.witness.iter().zip(expect) {
            assert!(
                (w.value - e).abs() < 1e-12,
                "{} = {} vs {e}",
                w.name,
                w.value
            );
        }
    }

    #[test]
    fn boundary_flag() {
        let r = CriterionReport::ccnr(1.0 + 5e-10, DEFAULT_TOL, vec![]);
        assert!(r.satisfied && r.boundary);
        let r = CriterionReport::ppt(-5e-10, DEFAULT_TOL, vec![]);
        assert!(r.satisfied && r.boundary);
        let r = CriterionReport::ppt(-2e-9, DEFAULT_TOL, vec![]);
        assert!(!r.satisfied && !r.boundary);
    }

    #[test]
    fn classification_examples() {
        let c = classify_2x3(&maximally_mixed(2, 3).unwrap(), DEFAULT_TOL).unwrap();
        assert!(c.separable && !c.ccnr_blind);
        assert_eq!(c.class, SeparabilityClass::Separable);

        let c = classify_2x3(&bell_decomposable(&eq14()), DEFAULT_TOL).unwrap();
        assert!(!c.separable && c.ccnr.satisfied && c.ccnr_blind);
        assert_eq!(c.class, SeparabilityClass::EntangledCcnrBlind);

        let c = classify_2x3(
            &bell_decomposable(&BDParams::vertex(1).unwrap()),
            DEFAULT_TOL,
        )
        .unwrap();
        assert!(!c.separable && !c.ccnr.satisfied && !c.ccnr_blind);
        assert_eq!(c.class, SeparabilityClass::EntangledCcnrDetected);

        let c = classify_2x3(&maximally_mixed(3, 2).unwrap(), DEFAULT_TOL).unwrap();
        assert!(c.separable);

        let err = classify_2x3(&maximally_mixed(3, 3).unwrap(), DEFAULT_TOL).unwrap_err();
        assert!(err.to_string().contains("2x2, 2x3 and 3x2"));
    }

    #[test]
    fn closed_form_pt_spectrum_matches_numeric() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let p = BDParams::random(&mut rng);
            let numeric = partial_transpose_spectrum(&bell_decomposable(&p), Side::A).unwrap();
            for (a, b) in numeric.iter().zip(bd_pt_spectrum(&p)) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }
}
