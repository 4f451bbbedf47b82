//! Exhaustive census of the Bell-decomposable simplex on an exact rational
//! grid, the counterexample reproduction and a small local refiner.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::criteria::{
    bd_ccnr_closed_form, bd_ppt_residuals, bd_pt_min_eigenvalue, ccnr_report, ppt_report,
    PptResiduals, SeparabilityClass, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::numfmt::fmt_num;
use crate::states::{bell_decomposable, BDParams};

/// Closed form and numeric oracle must agree this closely.
pub const ORACLE_AGREEMENT_TOL: f64 = 1e-9;

/// The counterexample mixture `(0.3, 0, 0.2, 0.1, 0.4, 0)`.
pub const COUNTEREXAMPLE: [f64; 6] = [0.3, 0.0, 0.2, 0.1, 0.4, 0.0];

const PARTS: usize = 6;
const CHUNK: usize = 8192;

/// Lexicographically ordered compositions of `n` into six non-negative parts.
#[derive(Debug, Clone)]
pub struct Compositions {
    next: Option<[u32; PARTS]>,
}

impl Compositions {
    pub fn new(n: u32) -> Self {
        let mut first = [0; PARTS];
        first[PARTS - 1] = n;
        Self { next: Some(first) }
    }
}

impl Iterator for Compositions {
    type Item = [u32; PARTS];

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.next?;
        // move one unit into the rightmost slot that still has mass after it
        let mut suffix = current[PARTS - 1];
        let mut successor = None;
        for i in (0..PARTS - 1).rev() {
            if suffix > 0 {
                let mut c = current;
                c[i] += 1;
                for x in &mut c[i + 1..] {
                    *x = 0;
                }
                c[PARTS - 1] = suffix - 1;
                successor = Some(c);
                break;
            }
            suffix += current[i];
        }
        self.next = successor;
        Some(current)
    }
}

/// Number of compositions of `n` into six parts, `C(n + 5, 5)`.
pub fn composition_count(n: u32) -> u64 {
    let n = u64::from(n);
    (1..=5).fold(1u64, |acc, k| acc * (n + k) / k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanConfig {
    /// Grid spacing is `1 / denominator`.
    pub denominator: u32,
    pub tol: f64,
    /// Skip the numeric partial-transpose / realignment cross-check.
    pub closed_form_only: bool,
    /// Keep one record per grid point.
    pub keep_records: bool,
}

impl ScanConfig {
    pub fn new(denominator: u32) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::Config("step denominator must be positive".into()));
        }
        Ok(Self {
            denominator,
            tol: DEFAULT_TOL,
            closed_form_only: false,
            keep_records: false,
        })
    }

    /// From a real step; `1/step` must be a positive integer.
    pub fn from_step(step: f64) -> Result<Self> {
        Self::new(step_denominator(step)?)
    }

    pub fn step(&self) -> f64 {
        1.0 / f64::from(self.denominator)
    }
}

fn step_denominator(step: f64) -> Result<u32> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::Config(format!("step {step} is not in (0, 1]")));
    }
    let inv = 1.0 / step;
    let n = inv.round();
    if (inv - n).abs() > 1e-9 * n || n > f64::from(u32::MAX) {
        return Err(Error::Config(format!("step {step} is not of the form 1/N")));
    }
    Ok(n as u32)
}

/// Parses `1/N`, or a decimal whose reciprocal is an integer.
pub fn parse_step(text: &str) -> Result<u32> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let bad = || Error::Config(format!("step '{text}' is not of the form 1/N"));
        let num: u32 = num.trim().parse().map_err(|_| bad())?;
        let den: u32 = den.trim().parse().map_err(|_| bad())?;
        if num != 1 || den == 0 {
            return Err(bad());
        }
        return Ok(den);
    }
    let step: f64 = text
        .parse()
        .map_err(|_| Error::Config(format!("step '{text}' is not a number")))?;
    step_denominator(step)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub p: [f64; 6],
    pub residuals: PptResiduals,
    pub min_pt_eig: f64,
    pub ccnr: f64,
    pub class: SeparabilityClass,
    #[serde(skip)]
    composition: [u32; 6],
}

impl PointRecord {
    pub fn composition(&self) -> [u32; 6] {
        self.composition
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ClassCounts {
    pub separable: u64,
    pub entangled_ccnr_detected: u64,
    pub entangled_ccnr_blind: u64,
}

impl ClassCounts {
    fn bump(&mut self, class: SeparabilityClass) {
        match class {
            SeparabilityClass::Separable => self.separable += 1,
            SeparabilityClass::EntangledCcnrDetected => self.entangled_ccnr_detected += 1,
            SeparabilityClass::EntangledCcnrBlind => self.entangled_ccnr_blind += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.separable + self.entangled_ccnr_detected + self.entangled_ccnr_blind
    }
}

/// Extreme points within one class; ties resolve to the earliest grid point.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ClassExtremes {
    pub max_ccnr: Option<PointRecord>,
    pub min_ccnr: Option<PointRecord>,
    pub min_pt_eig: Option<PointRecord>,
    pub min_residual: Option<PointRecord>,
}

impl ClassExtremes {
    fn update(&mut self, rec: &PointRecord) {
        fn keep(
            slot: &mut Option<PointRecord>,
            rec: &PointRecord,
            better: impl Fn(&PointRecord, &PointRecord) -> bool,
        ) {
            if slot.as_ref().is_none_or(|cur| better(rec, cur)) {
                *slot = Some(rec.clone());
            }
        }
        keep(&mut self.max_ccnr, rec, |a, b| a.ccnr > b.ccnr);
        keep(&mut self.min_ccnr, rec, |a, b| a.ccnr < b.ccnr);
        keep(&mut self.min_pt_eig, rec, |a, b| {
            a.min_pt_eig < b.min_pt_eig
        });
        keep(&mut self.min_residual, rec, |a, b| {
            a.residuals.min() < b.residuals.min()
        });
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Extremes {
    pub separable: ClassExtremes,
    pub entangled_ccnr_detected: ClassExtremes,
    pub entangled_ccnr_blind: ClassExtremes,
}

impl Extremes {
    fn slot(&mut self, class: SeparabilityClass) -> &mut ClassExtremes {
        match class {
            SeparabilityClass::Separable => &mut self.separable,
            SeparabilityClass::EntangledCcnrDetected => &mut self.entangled_ccnr_detected,
            SeparabilityClass::EntangledCcnrBlind => &mut self.entangled_ccnr_blind,
        }
    }
}

/// Agreement between the closed forms and the numeric routes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct OracleSummary {
    pub max_ccnr_deviation: f64,
    pub max_pt_eig_deviation: f64,
    /// Points where either deviation exceeds [`ORACLE_AGREEMENT_TOL`].
    pub disagreements: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub step: String,
    pub tol: f64,
    pub total_points: u64,
    pub counts: ClassCounts,
    /// PPT satisfied while CCNR is violated; must stay zero in 2x3.
    pub ccnr_violated_while_ppt: u64,
    pub oracle: Option<OracleSummary>,
    pub extremes: Extremes,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<PointRecord>>,
}

struct Evaluated {
    record: PointRecord,
    ccnr_deviation: f64,
    pt_deviation: f64,
}

fn evaluate(composition: [u32; 6], config: &ScanConfig) -> Result<Evaluated> {
    let params = BDParams::from_composition(composition, config.denominator)?;
    let residuals = bd_ppt_residuals(&params);
    let min_pt_eig = bd_pt_min_eigenvalue(&params);
    let ccnr = bd_ccnr_closed_form(&params)?;
    let (ccnr_deviation, pt_deviation) = if config.closed_form_only {
        (0.0, 0.0)
    } else {
        let rho = bell_decomposable(&params);
        let ppt = ppt_report(&rho, config.tol)?;
        let numeric_ccnr = ccnr_report(&rho, config.tol)?;
        (
            (numeric_ccnr.value - ccnr).abs(),
            (ppt.value - min_pt_eig).abs(),
        )
    };
    let class =
        SeparabilityClass::from_verdicts(min_pt_eig >= -config.tol, ccnr <= 1.0 + config.tol);
    Ok(Evaluated {
        record: PointRecord {
            p: *params.probabilities(),
            residuals,
            min_pt_eig,
            ccnr,
            class,
            composition,
        },
        ccnr_deviation,
        pt_deviation,
    })
}

/// Classifies every point of the `1/denominator` grid on the simplex.
///
/// Points are evaluated in parallel, but aggregation and records follow the
/// lexicographic composition order, so the result does not depend on
/// scheduling.
pub fn scan_bd_simplex(config: &ScanConfig) -> Result<ScanResult> {
    if config.denominator == 0 {
        return Err(Error::Config("step denominator must be positive".into()));
    }
    if !(config.tol >= 0.0 && config.tol.is_finite()) {
        return Err(Error::Config(format!(
            "tolerance {} must be finite and >= 0",
            config.tol
        )));
    }

    let mut counts = ClassCounts::default();
    let mut extremes = Extremes::default();
    let mut oracle = OracleSummary::default();
    let mut ccnr_violated_while_ppt = 0;
    let mut records = config.keep_records.then(Vec::new);

    let mut grid = Compositions::new(config.denominator).peekable();
    let mut chunk = Vec::with_capacity(CHUNK);
    while grid.peek().is_some() {
        chunk.clear();
        chunk.extend(grid.by_ref().take(CHUNK));
        let evaluated: Vec<Evaluated> = chunk
            .par_iter()
            .map(|&c| evaluate(c, config))
            .collect::<Result<_>>()?;
        for e in evaluated {
            let rec = e.record;
            counts.bump(rec.class);
            extremes.slot(rec.class).update(&rec);
            if rec.class == SeparabilityClass::Separable && rec.ccnr > 1.0 + config.tol {
                ccnr_violated_while_ppt += 1;
            }
            oracle.max_ccnr_deviation = oracle.max_ccnr_deviation.max(e.ccnr_deviation);
            oracle.max_pt_eig_deviation = oracle.max_pt_eig_deviation.max(e.pt_deviation);
            if e.ccnr_deviation > ORACLE_AGREEMENT_TOL || e.pt_deviation > ORACLE_AGREEMENT_TOL {
                oracle.disagreements += 1;
            }
            if let Some(r) = records.as_mut() {
                r.push(rec);
            }
        }
    }

    Ok(ScanResult {
        step: format!("1/{}", config.denominator),
        tol: config.tol,
        total_points: counts.total(),
        counts,
        ccnr_violated_while_ppt,
        oracle: (!config.closed_form_only).then_some(oracle),
        extremes,
        records,
    })
}

pub const CSV_HEADER: [&str; 12] = [
    "p1",
    "p2",
    "p3",
    "p4",
    "p5",
    "p6",
    "r1",
    "r2",
    "r3",
    "min_pt_eig",
    "ccnr",
    "class",
];

/// One CSV row per record, numbers at twelve significant digits.
pub fn write_records_csv<W: Write>(records: &[PointRecord], out: W) -> Result<()> {
    let io_err = |e: csv::Error| Error::Internal(format!("writing CSV: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io_err)?;
    for rec in records {
        let mut row: Vec<String> = rec.p.iter().map(|&x| fmt_num(x)).collect();
        row.extend(rec.residuals.as_array().iter().map(|&x| fmt_num(x)));
        row.push(fmt_num(rec.min_pt_eig));
        row.push(fmt_num(rec.ccnr));
        row.push(rec.class.as_str().to_string());
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| Error::Internal(format!("writing CSV: {e}")))
}

/// Everything needed to judge one Bell-decomposable point as a PPT-entangled,
/// CCNR-undetected state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reproduction {
    pub params: BDParams,
    pub ppt_residuals: PptResiduals,
    pub min_pt_eigenvalue: f64,
    pub ccnr_closed_form: f64,
    pub ccnr_numeric: f64,
    pub tol: f64,
    /// Some residual below `-tol`, both CCNR values at most `1 + tol`, and
    /// closed form within [`ORACLE_AGREEMENT_TOL`] of the numeric value.
    pub reproduced: bool,
}

pub fn evaluate_ccnr_blindness(params: &BDParams, tol: f64) -> Result<Reproduction> {
    let rho = bell_decomposable(params);
    let ppt_residuals = bd_ppt_residuals(params);
    let min_pt_eigenvalue = ppt_report(&rho, tol)?.value;
    let ccnr_closed_form = bd_ccnr_closed_form(params)?;
    let ccnr_numeric = ccnr_report(&rho, tol)?.value;
    let reproduced = ppt_residuals.min() < -tol
        && ccnr_closed_form <= 1.0 + tol
        && ccnr_numeric <= 1.0 + tol
        && (ccnr_closed_form - ccnr_numeric).abs() <= ORACLE_AGREEMENT_TOL;
    Ok(Reproduction {
        params: *params,
        ppt_residuals,
        min_pt_eigenvalue,
        ccnr_closed_form,
        ccnr_numeric,
        tol,
        reproduced,
    })
}

/// Evaluates the PPT-entangled yet CCNR-satisfying mixture
/// [`COUNTEREXAMPLE`].
pub fn reproduce_counterexample(tol: f64) -> Result<Reproduction> {
    evaluate_ccnr_blindness(&BDParams::new(COUNTEREXAMPLE)?, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Maximize `-min(r1, r2, r3)` over points whose closed-form CCNR value
    /// is at most 1.
    MaxCcnrBlindViolation,
    /// Minimize the smallest partial-transpose eigenvalue.
    MinPtEigenvalue,
}

impl Objective {
    /// Internal score, always maximized.
    fn score(&self, params: &BDParams) -> f64 {
        match self {
            Self::MaxCcnrBlindViolation => match bd_ccnr_closed_form(params) {
                Ok(v) if v <= 1.0 => -bd_ppt_residuals(params).min(),
                _ => f64::NEG_INFINITY,
            },
            Self::MinPtEigenvalue => -bd_pt_min_eigenvalue(params),
        }
    }

    /// Reported objective for a score.
    fn value(&self, score: f64) -> f64 {
        match self {
            Self::MaxCcnrBlindViolation => score,
            Self::MinPtEigenvalue => -score,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Refinement {
    pub params: BDParams,
    pub objective: Objective,
    pub value: f64,
    /// Best reported value after each iteration, starting with the start point.
    pub history: Vec<f64>,
}

const INITIAL_TRANSFER: f64 = 0.05;
const MIN_TRANSFER: f64 = 1e-12;

/// Derivative-free local search on the simplex.
///
/// Each iteration tries every pair transfer of `min(step, p_i)` from
/// coordinate `i` to `j`, takes the best strictly improving one, and halves
/// the step when none improves.
pub fn refine_extremum(
    start: &BDParams,
    objective: Objective,
    iterations: usize,
) -> Result<Refinement> {
    let mut best = *start;
    let mut best_score = objective.score(&best);
    let mut step = INITIAL_TRANSFER;
    let mut history = vec![objective.value(best_score)];

    for _ in 0..iterations {
        if step < MIN_TRANSFER {
            break;
        }
        let p = *best.probabilities();
        let mut improved: Option<(BDParams, f64)> = None;
        for i in 0..PARTS {
            let delta = step.min(p[i]);
            if delta <= 0.0 {
                continue;
            }
            for j in (0..PARTS).filter(|&j| j != i) {
                let mut q = p;
                q[i] -= delta;
                q[j] = (q[j] + delta).min(1.0);
                let Ok(candidate) = BDParams::new(q) else {
                    continue;
                };
                let score = objective.score(&candidate);
                let incumbent = improved.map_or(best_score, |(_, s)| s);
                if score > incumbent {
                    improved = Some((candidate, score));
                }
            }
        }
        match improved {
            Some((candidate, score)) => {
                best = candidate;
                best_score = score;
            }
            None => step *= 0.5,
        }
        history.push(objective.value(best_score));
    }

    Ok(Refinement {
        params: best,
        objective,
        value: objective.value(best_score),
        history,
    })
}
