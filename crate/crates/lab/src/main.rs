//! Command-line front end for the momentum-core analysis toolkit.
//!
//! Exit codes: 0 success, 1 check failure, 2 instability signal, 64 usage
//! error.

mod commands;
mod output;
mod pool;
mod problem_file;

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_UNSTABLE: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

/// Command failure carrying its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Check(String),
    Unstable(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Check(_) => EXIT_CHECK_FAILED,
            Failure::Unstable(_) => EXIT_UNSTABLE,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Check(m) | Failure::Unstable(m) => m,
        }
    }
}

impl From<momentum_core::Error> for Failure {
    fn from(e: momentum_core::Error) -> Self {
        match e {
            momentum_core::Error::UnstableSystem { spectral_radius } => Failure::Unstable(format!(
                "unstable system: spectral radius {spectral_radius} >= 1"
            )),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("io error: {e}"))
    }
}

/// Loads a JSON config file for flag merging; unknown keys are rejected.
pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let raw = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&raw)
        .map_err(|e| Failure::Usage(format!("bad config {}: {e}", path.display())))
}

#[derive(Parser)]
#[command(
    name = "momentum-lab",
    version,
    about = "Analysis and simulation of quasi-hyperbolic momentum on quadratics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Local convergence rate of (alpha, beta, nu) on a [mu, L] spectrum.
    Rate(commands::rate::RateArgs),
    /// Stability bound on alpha, optionally with the nu=1 no-trade-off interval.
    Stability(commands::stability::StabilityArgs),
    /// Optimal (alpha, beta) at fixed nu, or a sweep over nu.
    Optimal(commands::optimal::OptimalArgs),
    /// Exact stationary covariance and its Taylor predictions.
    Stationary(commands::stationary::StationaryArgs),
    /// Trajectory simulation.
    #[command(subcommand)]
    Simulate(commands::simulate::SimulateCmd),
    /// Self-verification suite: closed forms against brute-force oracles.
    Verify(commands::verify::VerifyArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Rate(args) => commands::rate::run(args),
        Command::Stability(args) => commands::stability::run(args),
        Command::Optimal(args) => commands::optimal::run(args),
        Command::Stationary(args) => commands::stationary::run(args),
        Command::Simulate(cmd) => commands::simulate::run(cmd),
        Command::Verify(args) => commands::verify::run(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
