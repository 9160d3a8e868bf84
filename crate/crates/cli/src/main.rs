//! `hypermono` command line: closed-form monodromy, verification reports,
//! point evaluations and the numerical oracle.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure (including
//! failed checks).

mod commands;
mod parse;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "hypermono", version, about = "Monodromy of balanced hypergeometric equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form monodromy matrices in the A, B or f basis.
    Compute(ComputeArgs),
    /// Run identity checks and print a JSON report.
    Verify(VerifyArgs),
    /// Evaluate the gamma product, series solutions or circle pieces.
    Eval(EvalArgs),
    /// Numerical continuation compared against the closed-form matrices.
    Oracle(OracleArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    Double,
    Extended,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Comma separated alpha_i (p/q or decimals).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    /// Comma separated beta_j.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    /// JSON file `{"alpha": "0,1/2", "beta": ["1/3", "2/3"]}`; flags take precedence.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Scalar type; HYPERMONO_PRECISION takes precedence.
    #[arg(long, value_enum, default_value = "double")]
    pub precision: Precision,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub common: Common,
    /// A, B or f.
    #[arg(long, default_value = "A")]
    pub basis: String,
    /// Branch; defaults to floor(n/2).
    #[arg(long, allow_hyphen_values = true)]
    pub l: Option<i64>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma separated subset of ft, cyclic, identity, pseudoreflection,
    /// replication, oracle, stirling, all.
    #[arg(long, default_value = "all")]
    pub checks: String,
    /// A, B or f.
    #[arg(long, default_value = "A")]
    pub basis: String,
    /// Branch; defaults to floor(n/2).
    #[arg(long, allow_hyphen_values = true)]
    pub l: Option<i64>,
    /// Overrides the default tolerance of every selected check.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Values `A_j` for the cyclic check, each optionally `value:multiplicity`.
    #[arg(long = "A", allow_hyphen_values = true)]
    pub values: Option<String>,
    /// Sample points for the Fourier check (repeatable; `re`, `re+imi`, ..).
    #[arg(long, allow_hyphen_values = true)]
    pub s: Vec<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum What {
    Gamma,
    #[value(name = "S_A")]
    SA,
    #[value(name = "S_B")]
    SB,
    F,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub what: What,
    /// Points for `gamma` (repeatable).
    #[arg(long, allow_hyphen_values = true)]
    pub s: Vec<String>,
    /// 1-based class index of the series.
    #[arg(long, default_value_t = 1)]
    pub j: usize,
    /// Log power of the series.
    #[arg(long, default_value_t = 0)]
    pub r: usize,
    /// Points for the series (repeatable).
    #[arg(long, allow_hyphen_values = true)]
    pub z: Vec<String>,
    /// arg z for each `--z`, selecting the branch.
    #[arg(long, allow_hyphen_values = true)]
    pub arg: Vec<f64>,
    /// Piece index for `f`.
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    /// Points for `f` (repeatable).
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Vec<f64>,
    /// `start:end:count` grid for `f`.
    #[arg(long = "phi-grid", allow_hyphen_values = true)]
    pub phi_grid: Option<String>,
    /// Number of series coefficients kept for `S_A`/`S_B`.
    #[arg(long, default_value_t = hypermono::local_solutions::DEFAULT_TRUNCATION)]
    pub truncation: usize,
    /// Quadrature tolerance for `f`.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: Common,
    /// A, B or f.
    #[arg(long, default_value = "A")]
    pub basis: String,
    /// Branch; defaults to floor(n/2).
    #[arg(long, allow_hyphen_values = true)]
    pub l: Option<i64>,
    /// Tolerance of every comparison; also tightens the integrator.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numerical(String),
    /// Output was produced but some check failed.
    Checks,
}

impl From<hypermono::Error> for Failure {
    fn from(e: hypermono::Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

pub fn emit(common: &Common, text: &str) -> Result<(), Failure> {
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{}", text.trim_end()) {
                // a closed downstream pipe is not an error of ours
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Numerical(e.to_string())),
                _ => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Checks) => ExitCode::from(3),
    }
}
