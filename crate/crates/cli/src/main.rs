//! `gk`: certify positive definite kernels on spheres and abelian groups,
//! synthesize kernels from spectral families and print the polynomial and
//! norm tables behind them.

mod commands;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit codes: 0 certified-PD or success, 1 certified-not-PD or FAIL,
/// 2 spec error, 3 numeric failure, 4 inconclusive.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("spec error: {0}")]
    Spec(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Spec(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "gk",
    version,
    about = "Positive definite kernels on spheres and abelian groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// Kernel-spec file (TOML).
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Output path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized probes, overriding the spec.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Transform tolerance, overriding the spec.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the Schoenberg coefficients of a kernel as CSV.
    Schoenberg,
    /// Certify a kernel; exit 0 PD, 1 not PD, 4 inconclusive.
    Certify(commands::CertifyArgs),
    /// Synthesize a kernel from a spectral family; writes samples and a spec.
    Synth,
    /// Polynomial tables and coefficients of exp(-a arccos x).
    Gneiting(commands::GneitingArgs),
    /// Norm growth, periodization bound and window-mass tables.
    Appendix(commands::AppendixArgs),
}

fn configure_threads() {
    if let Some(n) = std::env::var("GK_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Schoenberg => commands::schoenberg(&cli.global),
        Command::Certify(args) => commands::certify(&cli.global, &args),
        Command::Synth => commands::synth(&cli.global),
        Command::Gneiting(args) => commands::gneiting(&cli.global, &args),
        Command::Appendix(args) => commands::appendix(&cli.global, &args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("gk: {e}");
            ExitCode::from(e.code())
        }
    }
}
