//! Command-line front end: `check`, `bd`, `scan` and `repro`.
//!
//! Exit codes: 0 separable / reproduced, 1 entangled / not reproduced,
//! 2 no separability verdict for these dimensions, 64 usage or input data
//! error, 66 output could not be written.

mod state_file;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::criteria::{
    bd_abc, bd_ccnr_closed_form, bd_ppt_residuals, ccnr_report, classification_from,
    ppt_is_sufficient, ppt_report, ppt_report_bd, DEFAULT_TOL,
};
use crate::error::Error;
use crate::numfmt::{fmt_num, round_json};
use crate::search::{reproduce_counterexample, scan_bd_simplex, write_records_csv, ScanConfig};
use crate::states::{bell_decomposable, BDParams};

pub use state_file::StateFile;

pub const EXIT_SEPARABLE: i32 = 0;
pub const EXIT_ENTANGLED: i32 = 1;
pub const EXIT_UNDECIDED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_CANT_WRITE: i32 = 66;

/// Simplex points off by more than this are rejected rather than renormalized.
pub const SIMPLEX_INPUT_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "sepcrit",
    version,
    about = "PPT and realignment (CCNR) separability checks"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate both criteria on a density matrix stored as JSON.
    Check {
        path: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Evaluate the Bell-decomposable 2x3 state with mixing probabilities p1..p6.
    #[command(allow_negative_numbers = true)]
    Bd {
        /// Six probabilities; fractions such as 1/6 are accepted.
        #[arg(num_args = 6, required = true, value_parser = parse_real)]
        p: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Classify every point of a rational grid on the Bell-decomposable simplex.
    Scan {
        /// Grid spacing, written 1/N.
        #[arg(long)]
        step: String,
        /// Directory for summary.json (and scan.csv with --records).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip the numeric cross-check of the closed forms.
        #[arg(long)]
        closed_form_only: bool,
        /// Keep one row per grid point (CSV).
        #[arg(long)]
        records: bool,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Re-evaluate the PPT-entangled state (0.3, 0, 0.2, 0.1, 0.4, 0) that
    /// passes the realignment test.
    ///
    /// Reproduction requires some PPT residual below -tol, so a large
    /// tolerance makes the check stricter.
    Repro {
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Print the record as JSON.
        #[arg(long)]
        json: bool,
    },
}

fn parse_real(text: &str) -> Result<f64, String> {
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num
                .trim()
                .parse()
                .map_err(|_| format!("'{text}' is not a number"))?;
            let den: f64 = den
                .trim()
                .parse()
                .map_err(|_| format!("'{text}' is not a number"))?;
            num / den
        }
        None => text
            .parse()
            .map_err(|_| format!("'{text}' is not a number"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("'{text}' is not finite"))
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }

    fn cant_write(path: &Path, e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_CANT_WRITE,
            message: format!("cannot write {}: {e}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::usage(e)
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_SEPARABLE
            };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{rendered}");
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> CmdResult {
    match command {
        Command::Check { path, tol } => cmd_check(&path, tol, out),
        Command::Bd { p, tol } => cmd_bd(&p, tol, out),
        Command::Scan {
            step,
            out: dir,
            closed_form_only,
            records,
            tol,
        } => cmd_scan(&step, dir.as_deref(), closed_form_only, records, tol, out),
        Command::Repro { tol, json } => cmd_repro(tol, json, out),
    }
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol.is_finite() && tol >= 0.0 {
        Ok(())
    } else {
        Err(Failure::usage(format!(
            "tolerance {tol} must be finite and >= 0"
        )))
    }
}

fn emit_json(out: &mut dyn Write, value: &impl Serialize) -> Result<(), Failure> {
    let mut v = serde_json::to_value(value).map_err(Failure::usage)?;
    round_json(&mut v);
    let text = serde_json::to_string_pretty(&v).expect("JSON value serializes");
    writeln!(out, "{text}").map_err(|e| Failure::cant_write(Path::new("<stdout>"), e))
}

fn cmd_check(path: &Path, tol: f64, out: &mut dyn Write) -> CmdResult {
    check_tol(tol)?;
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    let rho = StateFile::parse(&text)
        .and_then(|f| f.to_density())
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;

    let ppt = ppt_report(&rho, tol)?;
    let ccnr = ccnr_report(&rho, tol)?;
    let (da, db) = rho.dims();
    let (classification, verdict, code) = if ppt_is_sufficient(da, db) {
        let c = classification_from(ppt.clone(), ccnr.clone());
        let (verdict, code) = if c.separable {
            ("separable", EXIT_SEPARABLE)
        } else {
            ("entangled", EXIT_ENTANGLED)
        };
        let summary = json!({
            "separable": c.separable,
            "class": c.class,
            "ccnr_blind": c.ccnr_blind,
        });
        (summary, verdict, code)
    } else {
        (Value::Null, "undecided", EXIT_UNDECIDED)
    };
    emit_json(
        out,
        &json!({
            "dims": [da, db],
            "ppt": ppt,
            "ccnr": ccnr,
            "classification": classification,
            "verdict": verdict,
        }),
    )?;
    Ok(code)
}

fn cmd_bd(p: &[f64], tol: f64, out: &mut dyn Write) -> CmdResult {
    check_tol(tol)?;
    let raw: [f64; 6] = p
        .try_into()
        .map_err(|_| Failure::usage(format!("expected 6 probabilities, got {}", p.len())))?;
    let params = BDParams::renormalized(raw, SIMPLEX_INPUT_TOL)?;
    let rho = bell_decomposable(&params);

    let ppt = ppt_report_bd(&params, tol)?;
    let ccnr = ccnr_report(&rho, tol)?;
    let closed_form = bd_ccnr_closed_form(&params)?;
    let c = classification_from(ppt.clone(), ccnr.clone());
    emit_json(
        out,
        &json!({
            "params": params,
            "renormalized": params.probabilities() != &raw,
            "ppt_residuals": bd_ppt_residuals(&params),
            "abc": bd_abc(&params),
            "ccnr_closed_form": closed_form,
            "ccnr_numeric": ccnr.value,
            "min_pt_eigenvalue": ppt.value,
            "ppt": ppt,
            "ccnr": ccnr,
            "class": c.class,
            "separable": c.separable,
            "ccnr_blind": c.ccnr_blind,
        }),
    )?;
    Ok(if c.separable {
        EXIT_SEPARABLE
    } else {
        EXIT_ENTANGLED
    })
}

fn cmd_scan(
    step: &str,
    dir: Option<&Path>,
    closed_form_only: bool,
    records: bool,
    tol: f64,
    out: &mut dyn Write,
) -> CmdResult {
    check_tol(tol)?;
    let mut config = ScanConfig::new(crate::search::parse_step(step)?)?;
    config.tol = tol;
    config.closed_form_only = closed_form_only;
    config.keep_records = records;

    let mut result = scan_bd_simplex(&config)?;
    let rows = result.records.take();

    match dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Failure::cant_write(dir, e))?;
            let summary_path = dir.join("summary.json");
            let mut summary = Vec::new();
            emit_json(&mut summary, &result)?;
            fs::write(&summary_path, summary).map_err(|e| Failure::cant_write(&summary_path, e))?;
            if let Some(rows) = &rows {
                let csv_path = dir.join("scan.csv");
                let file =
                    fs::File::create(&csv_path).map_err(|e| Failure::cant_write(&csv_path, e))?;
                write_records_csv(rows, file).map_err(|e| Failure::cant_write(&csv_path, e))?;
            }
            emit_json(out, &result)?;
        }
        None => match &rows {
            Some(rows) => write_records_csv(rows, out)?,
            None => emit_json(out, &result)?,
        },
    }
    Ok(EXIT_SEPARABLE)
}

fn cmd_repro(tol: f64, as_json: bool, out: &mut dyn Write) -> CmdResult {
    check_tol(tol)?;
    let r = reproduce_counterexample(tol)?;
    if as_json {
        emit_json(out, &r)?;
    } else {
        let p: Vec<String> = r
            .params
            .probabilities()
            .iter()
            .map(|&x| fmt_num(x))
            .collect();
        let text = format!(
            "state p = ({})\n\
             ppt residuals: r1 = {}, r2 = {}, r3 = {}\n\
             min partial-transpose eigenvalue: {}\n\
             ccnr closed form: {}\n\
             ccnr numeric:     {}\n\
             reproduced: {} (tol = {})\n",
            p.join(", "),
            fmt_num(r.ppt_residuals.r1),
            fmt_num(r.ppt_residuals.r2),
            fmt_num(r.ppt_residuals.r3),
            fmt_num(r.min_pt_eigenvalue),
            fmt_num(r.ccnr_closed_form),
            fmt_num(r.ccnr_numeric),
            if r.reproduced { "yes" } else { "no" },
            fmt_num(r.tol),
        );
        out.write_all(text.as_bytes())
            .map_err(|e| Failure::cant_write(Path::new("<stdout>"), e))?;
    }
    Ok(if r.reproduced {
        EXIT_SEPARABLE
    } else {
        EXIT_ENTANGLED
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("sepcrit").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn parse_real_fractions() {
        assert_eq!(parse_real("1/4").unwrap(), 0.25);
        assert_eq!(parse_real("0.3").unwrap(), 0.3);
        assert!(parse_real("1/0").is_err());
        assert!(parse_real("x").is_err());
    }

    #[test]
    fn bad_usage_is_64() {
        assert_eq!(run_args(&[]).0, EXIT_USAGE);
        assert_eq!(run_args(&["bd", "1", "0"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["repro", "--tol", "-1"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--help"]).0, EXIT_SEPARABLE);
    }

    #[test]
    fn bd_rejects_off_simplex() {
        let (code, _, err) = run_args(&["bd", "0.5", "0.5", "0.1", "0", "0", "0"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("sum"));
        let (code, _, _) = run_args(&["bd", "1.1", "-0.1", "0", "0", "0", "0"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn bd_uniform_fractions() {
        let (code, out, _) = run_args(&["bd", "1/6", "1/6", "1/6", "1/6", "1/6", "1/6"]);
        assert_eq!(code, EXIT_SEPARABLE);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["class"], "separable");
    }

    #[test]
    fn repro_text_output() {
        let (code, out, _) = run_args(&["repro"]);
        assert_eq!(code, EXIT_SEPARABLE);
        assert!(out.contains("r1 = -0.07"));
        assert!(out.contains("ccnr closed form: 0.969169589953"));
        assert!(out.contains("min partial-transpose eigenvalue: -0.05"));
        assert!(out.contains("reproduced: yes"));
    }

    #[test]
    fn scan_bad_step() {
        assert_eq!(run_args(&["scan", "--step", "0.3"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["scan", "--step", "2/3"]).0, EXIT_USAGE);
    }
}
