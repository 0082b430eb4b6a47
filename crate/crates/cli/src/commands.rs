use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use theta_core::finitetheta::verify_finite_theta;
use theta_core::quadform::invariants_gram;
use theta_core::theta::{
    distinction_transport, distinguished_check, lift, parity_predict, TauChoice, ThetaError, ThetaResult,
};
use theta_core::torusdata::{block_decompose, datum_equivalent, residue_reduction, validate, EquivalenceMode};

use crate::report::{sha256_hex, ErrorInfo, Report};
use crate::schema::{format_rational, DatumFile, ElementFile, SchemaError};

pub const PRECISION_VAR: &str = "THETA_PARAM_PRECISION";

#[derive(Debug, Parser)]
#[command(name = "theta-param", version, about = "Parameter-level theta lifts of regular supercuspidal data")]
pub struct Cli {
    /// write the report here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// check the well-formedness conditions of a datum
    Validate { path: PathBuf },
    /// theta-lift a symplectic datum
    Lift {
        path: PathBuf,
        /// "canonical" or "seed N"
        #[arg(long, num_args = 1..=2, default_value = "canonical")]
        tau: Vec<String>,
    },
    /// predicted invariants of the lift of a depth-zero datum
    Predict { path: PathBuf },
    /// whether two data are equivalent
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::UpToWeyl)]
        mode: Mode,
    },
    /// decide distinction for a datum with an F-structure
    Distinguish { path: PathBuf },
    /// transport a distinguished datum to its orthogonal F-structure
    Transport { path: PathBuf },
    /// verify the finite theta correspondence for (SL_2, O_2^±) over F_q
    FiniteVerify {
        #[arg(long)]
        q: u64,
    },
    /// split a datum into blocks of equal depth
    Blocks { path: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    UpToWeyl,
    Strict,
}

impl From<Mode> for EquivalenceMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::UpToWeyl => EquivalenceMode::UpToWeyl,
            Mode::Strict => EquivalenceMode::Strict,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("schema error: {0}")]
    Schema(#[from] SchemaError),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{message}")]
    Domain { message: String, details: Option<Value> },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain { .. } => 1,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Schema(_) => "schema",
            CliError::Io { .. } => "io",
            CliError::Config(_) => "config",
            CliError::Domain { .. } => "domain",
        }
    }

    fn info(&self) -> ErrorInfo {
        let message = match self {
            CliError::Schema(e) => e.to_string(),
            CliError::Config(m) => m.clone(),
            other => other.to_string(),
        };
        let details = match self {
            CliError::Domain { details, .. } => details.clone(),
            _ => None,
        };
        ErrorInfo {
            kind: self.kind().to_string(),
            message,
            details,
        }
    }
}

impl From<ThetaError> for CliError {
    fn from(e: ThetaError) -> Self {
        let details = match &e {
            ThetaError::Invalid(rep) => Some(json!({ "violations": rep.violations })),
            _ => None,
        };
        CliError::Domain {
            message: e.to_string(),
            details,
        }
    }
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain {
        message: e.to_string(),
        details: None,
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn read(path: &Path, report: &mut Report) -> Result<DatumFile, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    report.input_sha256.push(sha256_hex(&bytes));
    Ok(DatumFile::parse(&bytes)?)
}

/// Starting precision of the Gram oracle, from the environment.
pub fn oracle_precision() -> Result<Option<u32>, CliError> {
    match std::env::var(PRECISION_VAR) {
        Ok(s) => match s.trim().parse::<u32>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("{PRECISION_VAR} must be a positive integer, got {s:?}"))),
        },
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Config(format!("{PRECISION_VAR}: {e}"))),
    }
}

fn parse_tau(args: &[String]) -> Result<TauChoice, CliError> {
    match args {
        [c] if c == "canonical" => Ok(TauChoice::Canonical),
        [s, n] if s == "seed" => n
            .parse()
            .map(TauChoice::Seeded)
            .map_err(|_| CliError::Config(format!("bad seed {n:?}"))),
        [s] if s.starts_with("seed=") => s[5..]
            .parse()
            .map(TauChoice::Seeded)
            .map_err(|_| CliError::Config(format!("bad seed {s:?}"))),
        _ => Err(CliError::Config("--tau takes \"canonical\" or \"seed N\"".into())),
    }
}

fn theta_outputs(res: &ThetaResult) -> Value {
    json!({
        "lifted": DatumFile::from_datum(&res.lifted),
        "target_invariants": res.target_invariants,
        "predicted_invariants": res.predicted_invariants,
        "so_type": res.so_type,
        "consistent": res.consistent(),
    })
}

fn operation(cmd: &Command) -> &'static str {
    match cmd {
        Command::Validate { .. } => "validate",
        Command::Lift { .. } => "lift",
        Command::Predict { .. } => "predict",
        Command::Equiv { .. } => "equiv",
        Command::Distinguish { .. } => "distinguish",
        Command::Transport { .. } => "transport",
        Command::FiniteVerify { .. } => "finite_verify",
        Command::Blocks { .. } => "blocks",
    }
}

fn dispatch(cmd: &Command, report: &mut Report) -> Result<(), CliError> {
    match cmd {
        Command::Validate { path } => {
            let d = read(path, report)?.to_datum()?;
            let rep = validate(&d);
            report.outputs = Some(json!({ "valid": rep.is_valid(), "violations": rep.violations }));
            if !rep.is_valid() {
                return Err(domain(format!("{} violation(s)", rep.violations.len())));
            }
        }
        Command::Lift { path, tau } => {
            let choice = parse_tau(tau)?;
            let start = oracle_precision()?;
            let d = read(path, report)?.to_datum()?;
            let res = lift(&d, choice)?;
            let oracle = invariants_gram(&res.lifted.cs(), start).map_err(domain)?;
            let mut out = theta_outputs(&res);
            out["oracle_invariants"] = to_value(&oracle);
            out["oracle_agrees"] = json!(oracle == res.target_invariants);
            report.choices = Some(res.choices);
            report.outputs = Some(out);
        }
        Command::Predict { path } => {
            let d = read(path, report)?.to_datum()?;
            let (i1, i2) = residue_reduction(&d).map_err(domain)?;
            let (inv, so) = parity_predict(&d)?;
            report.outputs = Some(json!({
                "r": i1.ms.len(),
                "s": i2.ms.len(),
                "invariants": inv,
                "so_type": so,
            }));
        }
        Command::Equiv { a, b, mode } => {
            let da = read(a, report)?.to_datum()?;
            let db = read(b, report)?.to_datum()?;
            let eq = datum_equivalent(&da, &db, (*mode).into()).map_err(domain)?;
            report.outputs = Some(json!({
                "equivalent": eq,
                "mode": to_value(&EquivalenceMode::from(*mode)),
            }));
        }
        Command::Distinguish { path } => {
            let w = read(path, report)?.to_witness()?;
            let verdict = distinguished_check(&w)?;
            report.outputs = Some(to_value(&verdict));
        }
        Command::Transport { path } => {
            let w = read(path, report)?.to_witness()?;
            let t = distinction_transport(&w)?;
            report.outputs = Some(json!({
                "e_lift": theta_outputs(&t.e_lift),
                "twisted": t.twisted.iter().map(ElementFile::from_term).collect::<Vec<_>>(),
                "f_structure": DatumFile::from_datum(&t.f_structure),
                "f_invariants": t.f_invariants,
                "e_invariants_twisted": t.e_invariants_twisted,
                "base_change_invariants": t.base_change_invariants,
                "reextension_equivalent": t.reextension_equivalent,
                "direct_equivalent": t.direct_equivalent,
            }));
            report.choices = Some(t.e_lift.choices);
        }
        Command::FiniteVerify { q } => {
            if ![3, 5].contains(q) {
                return Err(CliError::Config(format!("--q must be 3 or 5, got {q}")));
            }
            let rep = verify_finite_theta::<f64>(*q).map_err(domain)?;
            report.outputs = Some(to_value(&rep));
        }
        Command::Blocks { path } => {
            let d = read(path, report)?.to_datum()?;
            let blocks = block_decompose(&d);
            let parts = blocks.blocks(&d);
            let levels: Vec<Value> = blocks
                .levels
                .iter()
                .zip(&parts)
                .map(|((r, idx), part)| {
                    json!({
                        "depth": format_rational(*r),
                        "factors": idx,
                        "datum": DatumFile::from_datum(part),
                    })
                })
                .collect();
            report.outputs = Some(json!({ "levels": levels }));
        }
    }
    Ok(())
}

/// Runs a subcommand and returns its report with the process exit code.
pub fn execute(cmd: &Command) -> (Report, i32) {
    let mut report = Report::new(operation(cmd));
    match dispatch(cmd, &mut report) {
        Ok(()) => (report, 0),
        Err(e) => {
            let code = e.exit_code();
            report.error = Some(e.info());
            (report, code)
        }
    }
}

/// Runs the parsed command line, writing the report; returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let (report, code) = execute(&cli.command);
    let text = report.to_json();
    match &cli.out {
        Some(path) => match std::fs::write(path, text) {
            Ok(()) => code,
            Err(e) => {
                eprintln!("cannot write {}: {e}", path.display());
                2
            }
        },
        None => {
            print!("{text}");
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_flags() {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(parse_tau(&s(&["canonical"])).unwrap(), TauChoice::Canonical);
        assert_eq!(parse_tau(&s(&["seed", "7"])).unwrap(), TauChoice::Seeded(7));
        assert_eq!(parse_tau(&s(&["seed=7"])).unwrap(), TauChoice::Seeded(7));
        assert!(parse_tau(&s(&["seed", "x"])).is_err());
        assert!(parse_tau(&s(&["other"])).is_err());
    }

    #[test]
    fn bad_q_is_a_config_error() {
        let (rep, code) = execute(&Command::FiniteVerify { q: 4 });
        assert_eq!(code, 2);
        assert_eq!(rep.error.unwrap().kind, "config");
    }
}
