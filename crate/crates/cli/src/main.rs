//! `drcc`: command-line front end for perturbed risk levels, nominal fits,
//! scenario bounds and the randomized MPC experiment.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage or parse error, 3 domain error.

mod commands;
mod output;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use output::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] drcc_core::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Json(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "drcc", version, about = "Distributionally robust risk levels and scenario bounds", after_help = spec::GRAMMAR)]
pub struct Cli {
    /// Seed for stochastic subcommands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the result table here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// JSON file with the subcommand's parameters; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Relative variation distance between two distributions.
    Rvd(commands::RvdArgs),
    /// Perturbed risk level at one risk level.
    Prl(commands::PrlArgs),
    /// Perturbed risk level over a log-spaced grid of risk levels.
    PrlCurve(commands::PrlCurveArgs),
    /// Minimax fit of a nominal Gaussian to a Gaussian family.
    FitNominal(commands::FitNominalArgs),
    /// Two-level scenario bound P{V > eps}, nominal or robust.
    ScenarioBound(commands::ScenarioBoundArgs),
    /// Bound on the expected violation probability.
    ExpectedBound(commands::ExpectedBoundArgs),
    /// Randomized MPC Monte Carlo experiment.
    Rmpc(commands::RmpcArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
