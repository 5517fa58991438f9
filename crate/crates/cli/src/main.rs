//! `gkpsim`: membership checks, outcome distributions, sampling and
//! finite-squeezing comparisons for GKP circuit files.
//!
//! Exit status: 0 success, 1 usage or I/O error, 2 circuit not simulatable,
//! 3 comparison above the threshold.

use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gkpsim_core::circuit::{circuit_to_symplectic, parse_circuit, track_measurement_operator, Circuit};
use gkpsim_core::classify::{class_b_check_circuit, rsp_check, ClassBResult, MembershipVerdict, ReconstructionPolicy};
use gkpsim_core::json::num;
use gkpsim_core::oracle::{compare_form, CompareConfig, OracleError};
use gkpsim_core::par::Exec;
use gkpsim_core::sampler::{
    build_multi_pdf, build_single_pdf, class_json, mode_verdict_json, position_offsets, sample_multi_batch, sample_single_batch,
    SampleConfig,
};
use gkpsim_core::symplectic::{DspError, DspMode};
use gkpsim_core::LinearQuadratureForm;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Parser)]
#[command(name = "gkpsim", version, about = "Simulate Gaussian circuits on GKP states with homodyne measurement")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report whether the circuit is efficiently simulatable
    Check(Common),
    /// Print the Dirac-comb outcome distribution as JSON
    Pdf(Common),
    /// Draw measurement outcomes, one tab-separated vector per line
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Integers are drawn uniformly from [-bound, bound]
        #[arg(long, default_value_t = 100)]
        bound: u64,
    },
    /// Compare the comb step with peak gaps of a finitely squeezed state
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.02)]
        delta_gkp: f64,
        #[arg(long, default_value_t = 1e-3)]
        grid_step: f64,
        /// Exit 3 unless the largest relative gap error is below this
        #[arg(long, default_value_t = 0.02)]
        threshold: f64,
    },
}

#[derive(Args)]
struct Common {
    circuit: PathBuf,
    /// Tolerance for reading angles from floating-point values
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Largest denominator accepted when reconstructing a cotangent
    #[arg(long, default_value_t = 1_000_000)]
    max_den: u64,
    /// Require the mode-mixing block to be symmetric
    #[arg(long)]
    strict_dsp: bool,
    /// Classify `rad` angles by rational reconstruction instead of rejecting them
    #[arg(long)]
    allow_float: bool,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: gkpsim_core::circuit::ParseError },
    #[error("not simulatable: {0}")]
    Rejected(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("max relative error {err} is not below threshold {threshold}")]
    AboveThreshold { err: f64, threshold: f64 },
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Rejected(_) => 2,
            CliError::AboveThreshold { .. } => 3,
            _ => 1,
        }
    }
}

impl Common {
    fn load(&self) -> Result<Circuit, CliError> {
        let path = self.circuit.display().to_string();
        let text = std::fs::read_to_string(&self.circuit).map_err(|source| CliError::Io { path: path.clone(), source })?;
        parse_circuit(&text).map_err(|source| CliError::Parse { path, source })
    }

    fn recon(&self) -> Result<ReconstructionPolicy, CliError> {
        if !(self.tol >= 0.0) || !self.tol.is_finite() {
            return Err(CliError::Usage(format!("--tol must be a nonnegative number, got {}", self.tol)));
        }
        if self.max_den == 0 {
            return Err(CliError::Usage("--max-den must be positive".into()));
        }
        Ok(ReconstructionPolicy { max_den: self.max_den, tol: self.tol, allow_inexact: self.allow_float })
    }

    fn dsp_mode(&self) -> DspMode {
        if self.strict_dsp {
            DspMode::Strict
        } else {
            DspMode::Permissive
        }
    }
}

enum Analysis {
    Single { form: LinearQuadratureForm, verdict: MembershipVerdict },
    Multi(Result<ClassBResult, DspError>),
}

fn analyse(c: &Circuit, common: &Common) -> Result<Analysis, CliError> {
    let recon = common.recon()?;
    if let [j] = c.measured() {
        let form = track_measurement_operator(c, *j).map_err(|e| CliError::Usage(e.to_string()))?;
        let verdict = rsp_check(&form, &recon);
        Ok(Analysis::Single { form, verdict })
    } else {
        Ok(Analysis::Multi(class_b_check_circuit(c, common.dsp_mode(), &recon)))
    }
}

fn verdict_json(a: &Analysis) -> (bool, Value) {
    match a {
        Analysis::Single { verdict, .. } => (
            verdict.accepted,
            json!({
                "accepted": verdict.accepted,
                "class": if verdict.accepted { "A" } else { "none" },
                "per_mode": verdict.per_mode.iter().map(mode_verdict_json).collect::<Vec<_>>(),
                "reason": verdict.reason,
            }),
        ),
        Analysis::Multi(Ok(res)) => (
            true,
            json!({
                "accepted": true,
                "class": "B",
                "per_mode": res.classes.iter().enumerate().map(|(i, c)| class_json(i + 1, c, None)).collect::<Vec<_>>(),
                "reason": Value::Null,
            }),
        ),
        Analysis::Multi(Err(e)) => (
            false,
            json!({"accepted": false, "class": "none", "per_mode": [], "reason": e.to_string()}),
        ),
    }
}

fn rejection(a: &Analysis) -> Option<String> {
    match a {
        Analysis::Single { verdict, .. } if !verdict.accepted => Some(verdict.reason.clone().unwrap_or_default()),
        Analysis::Multi(Err(e)) => Some(e.to_string()),
        _ => None,
    }
}

fn print_json(v: &Value) -> Result<(), CliError> {
    let s = serde_json::to_string_pretty(v).expect("JSON values always serialise");
    writeln!(io::stdout(), "{s}").map_err(|source| CliError::Io { path: "stdout".into(), source })
}

fn pdf_json(c: &Circuit, a: Analysis) -> Result<Value, CliError> {
    if let Some(r) = rejection(&a) {
        return Err(CliError::Rejected(r));
    }
    match a {
        Analysis::Single { form, verdict } => Ok(build_single_pdf(&form, &verdict).map_err(|e| CliError::Rejected(e.to_string()))?.to_json()),
        Analysis::Multi(res) => {
            let res = res.map_err(|e| CliError::Rejected(e.to_string()))?;
            let offs = position_offsets(&circuit_to_symplectic(c), c.measured());
            Ok(build_multi_pdf(&res, c.measured(), offs).map_err(|e| CliError::Rejected(e.to_string()))?.to_json())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Command::Check(common) => {
            let c = common.load()?;
            let a = analyse(&c, &common)?;
            let (ok, v) = verdict_json(&a);
            print_json(&v)?;
            if ok {
                Ok(())
            } else {
                Err(CliError::Rejected(rejection(&a).unwrap_or_default()))
            }
        }
        Command::Pdf(common) => {
            let c = common.load()?;
            let a = analyse(&c, &common)?;
            print_json(&pdf_json(&c, a)?)
        }
        Command::Sample { common, count, seed, bound } => {
            let c = common.load()?;
            let a = analyse(&c, &common)?;
            if let Some(r) = rejection(&a) {
                return Err(CliError::Rejected(r));
            }
            let cfg = SampleConfig { integer_bound: bound, seed };
            let rows: Vec<Vec<f64>> = match a {
                Analysis::Single { form, verdict } => {
                    let pdf = build_single_pdf(&form, &verdict).map_err(|e| CliError::Rejected(e.to_string()))?;
                    sample_single_batch(&pdf, &cfg, count).into_iter().map(|x| vec![x]).collect()
                }
                Analysis::Multi(res) => {
                    let res = res.map_err(|e| CliError::Rejected(e.to_string()))?;
                    let offs = position_offsets(&circuit_to_symplectic(&c), c.measured());
                    let pdf = build_multi_pdf(&res, c.measured(), offs).map_err(|e| CliError::Rejected(e.to_string()))?;
                    sample_multi_batch(&pdf, &cfg, count)
                }
            };
            let mut out = BufWriter::new(io::stdout().lock());
            let io_err = |source| CliError::Io { path: "stdout".into(), source };
            for r in rows {
                let line: Vec<String> = r.iter().map(|x| x.to_string()).collect();
                writeln!(out, "{}", line.join("\t")).map_err(io_err)?;
            }
            out.flush().map_err(io_err)
        }
        Command::Compare { common, delta_gkp, grid_step, threshold } => {
            if !(delta_gkp > 0.0 && delta_gkp.is_finite()) {
                return Err(CliError::Usage(format!("--delta-gkp must be positive, got {delta_gkp}")));
            }
            if !(grid_step > 0.0 && grid_step.is_finite()) {
                return Err(CliError::Usage(format!("--grid-step must be positive, got {grid_step}")));
            }
            let c = common.load()?;
            if c.measured().len() != 1 {
                return Err(CliError::Unsupported(
                    "finite-squeezing comparison needs exactly one measured mode".into(),
                ));
            }
            let a = analyse(&c, &common)?;
            if let Some(r) = rejection(&a) {
                return Err(CliError::Rejected(r));
            }
            let Analysis::Single { form, verdict } = a else { unreachable!("one measured mode") };
            let cfg = CompareConfig { delta_gkp, grid_step, ..CompareConfig::default() };
            let rep = compare_form(&form, &verdict, &cfg, Exec::default()).map_err(|e| match e {
                OracleError::Unsupported(m) => CliError::Unsupported(m),
                other => CliError::Usage(other.to_string()),
            })?;
            print_json(&json!({
                "analytic_spacing": num(rep.analytic_spacing),
                "numeric_gaps": rep.numeric_gaps.iter().map(|&g| num(g)).collect::<Vec<_>>(),
                "peaks": rep.peaks.iter().map(|&p| num(p)).collect::<Vec<_>>(),
                "max_relative_error": num(rep.max_relative_error),
                "threshold": num(threshold),
                "delta_gkp": num(delta_gkp),
                "grid_step": num(grid_step),
            }))?;
            if rep.max_relative_error < threshold {
                Ok(())
            } else {
                Err(CliError::AboveThreshold { err: rep.max_relative_error, threshold })
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help and version go to stdout and succeed; everything else is a usage error
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io { ref source, .. }) if source.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gkpsim: {e}");
            ExitCode::from(e.code())
        }
    }
}
