//! `qmc`: solve instances, tabulate ratios, probe the gadget, run the
//! verification suite.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use spin_qmc::Algorithm;

#[derive(Debug, Parser)]
#[command(
    name = "qmc",
    version,
    about = "Spin-S Quantum Max-Cut solver and verification suite"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact, product-state, SDP and rounded values for one instance.
    Solve(SolveArgs),
    /// Approximation-ratio table for 2S = 1..=TWO_S.
    Ratios(RatiosArgs),
    /// Effective coupling and spectral convergence of the mediator gadget.
    Gadget(GadgetArgs),
    /// Run the invariant suite; exits 3 if any check fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmArg {
    LiebBov,
    GpS,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::LiebBov => Algorithm::LiebBov,
            AlgorithmArg::GpS => Algorithm::GpS,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[group(required = false, multiple = false)]
pub struct Source {
    /// Instance file: first line N, then "i j w" per edge.
    #[arg(long, value_name = "PATH")]
    pub instance: Option<PathBuf>,
    /// Generator: single_edge:W | cycle:N:W | complete:N:W | random:N:P:WMAX:SEED.
    #[arg(long, value_name = "SPEC")]
    pub generate: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Embed wall-clock timings in the report (makes output run-dependent).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: Source,
    /// Twice the spin.
    #[arg(long, default_value_t = 1)]
    pub two_s: u32,
    #[arg(long, value_enum, default_value = "gp_s")]
    pub algorithm: AlgorithmArg,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Skip exact diagonalization.
    #[arg(long)]
    pub no_exact: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RatiosArgs {
    /// Largest 2S in the table.
    #[arg(long, default_value_t = 10)]
    pub two_s: u32,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GadgetArgs {
    #[arg(long, default_value_t = 1)]
    pub two_s: u32,
    /// Comma-separated, strictly increasing.
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    pub deltas: Vec<f64>,
    /// Add the identity offset that cancels the constant term.
    #[arg(long)]
    pub include_h1: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// Extra instance checked at 2S = 1, 2, 3.
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trials per overlap for the rounding-law check.
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    /// Random instances for the exact-versus-relaxation checks.
    #[arg(long, default_value_t = 12)]
    pub instances: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => commands::solve(&a),
        Command::Ratios(a) => commands::ratios(&a),
        Command::Gadget(a) => commands::gadget(&a),
        Command::Verify(a) => commands::verify(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
