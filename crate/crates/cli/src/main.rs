//! Batch front end for the anisotropic estimate toolkit: parse a JSON
//! config, run one pipeline, emit CSV/JSON/SVG artifacts.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;
use wulff_core::anisotropy::AnisoError;
use wulff_core::pde::PdeError;
use wulff_core::radial::RadialError;
use wulff_core::rearrange::RearrangeError;
use wulff_core::verify::VerifyError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Gauge(#[from] AnisoError),
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error(transparent)]
    Rearrange(#[from] RearrangeError),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
    #[error("solver did not converge (residual {0:.3e})")]
    NoConvergence(f64),
}

impl CliError {
    /// 0 pass, 1 check failed, 2 config or input error, 3 solver
    /// non-convergence.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::ChecksFailed(_) => 1,
            CliError::NoConvergence(_) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "wulff",
    about = "Sharp anisotropic estimates: exact radial profiles, mesh solves and inequality checks",
    version
)]
struct Cli {
    /// JSON configuration file; each command has a built-in default.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for artifacts, created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Seed for the randomized checks.
    #[arg(long, global = true, default_value_t = 2024)]
    seed: u64,

    /// Recorded in reports; runs are reproducible either way.
    #[arg(long, global = true)]
    deterministic: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the exponent equation and print the derived constants.
    Beta,
    /// Tabulate the exact radial profiles to CSV.
    Radial,
    /// Sample a field, rearrange it and write its symmetrization.
    Symmetrize,
    /// Run the mesh solver through its truncation schedule.
    Solve,
    /// Solve, symmetrize and assert the full estimate suite.
    Verify,
}

/// Shared command context from the global flags.
pub struct Ctx {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub deterministic: bool,
}

fn init_threads() {
    if let Ok(raw) = std::env::var("WULFF_THREADS") {
        if let Ok(threads) = raw.trim().parse::<usize>() {
            if threads > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    let ctx = Ctx {
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        deterministic: cli.deterministic,
    };
    let result = match cli.command {
        Command::Beta => commands::beta::run(&ctx),
        Command::Radial => commands::radial::run(&ctx),
        Command::Symmetrize => commands::symmetrize::run(&ctx),
        Command::Solve => commands::solve::run(&ctx),
        Command::Verify => commands::verify::run(&ctx),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
