//! `liquidspeed` command-line tool.
//!
//! Exit status: 0 success, 1 cross-check / statistical / claim failure,
//! 2 usage or configuration error.

mod commands;
mod format;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "liquidspeed",
    version,
    about = "HFT speed-race equilibria: solver, simulator and sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form equilibria of both regimes, cross-checked by the numerical solver.
    Solve(CommonArgs),
    /// Monte Carlo estimates at the analytic equilibrium, with z-scores.
    Simulate(SimulateArgs),
    /// Parameter sweep written as CSV.
    Sweep(CommonArgs),
    /// Regime-comparison claims over a sweep and optional random draws.
    Check(CommonArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Configuration file (flat key = value).
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override a config key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// pc, od or both.
    #[arg(long)]
    pub regime: Option<String>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Write a per-trial CSV trace (single regime only).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

/// Failure carrying its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    pub fn check(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<liquidspeed::Error> for Failure {
    fn from(e: liquidspeed::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("LIQUIDSPEED_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        Failure::usage(format!(
            "LIQUIDSPEED_THREADS must be an integer, got `{raw}`"
        ))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Check(a) => commands::check(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
