//! `invlip`: invariant approximation of almost-invariant Lipschitz functions
//! on groups, with exact-rational certification and re-checkable witnesses.

mod check;
mod envelope;
mod runs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use invlip_core::DEFAULT_ELEMENT_CAP;

#[derive(Parser)]
#[command(name = "invlip", version, about = "Invariant approximants for almost-invariant Lipschitz functions on groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Free-group approximant certified against the half-defect bound
    ApproxFree(ApproxArgs),
    /// Kernel-projected approximant on a finitely presented quotient
    ApproxPresented(ApproxArgs),
    /// Orbit-collapse approximant on a finite action space
    ApproxOrbit(ApproxArgs),
    /// Directional mean-growth constants of a function
    MeanGrowth(MeanGrowthArgs),
    /// Exact l-infinity projection onto a matrix nullspace
    KernelProject(KernelArgs),
    /// Quasimorphism defects and the invariance implication chain
    Qm(QmArgs),
    /// Re-verify every witness in an emitted report
    Check(CheckArgs),
    /// Run the certification suite
    Suite(SuiteArgs),
}

#[derive(Args)]
pub struct ApproxArgs {
    /// Instance JSON with a group and a function or sampler
    #[arg(long)]
    pub instance: PathBuf,
    /// Ball radius for scope-limited computations
    #[arg(long, default_value_t = 4)]
    pub radius: u32,
    /// Single sampler seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Inclusive sampler seed range `A..B`
    #[arg(long)]
    pub seeds: Option<String>,
    /// Report destination (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sweep curve CSV: seed, delta_hat, bound, achieved, pass
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Parallel workers for seed sweeps
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Args)]
pub struct MeanGrowthArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Direction word, e.g. `a`, `a^-1*b`, or `e`
    #[arg(long)]
    pub direction: String,
    /// Base point word (identity when omitted)
    #[arg(long, default_value = "e")]
    pub base: String,
    #[arg(long, default_value_t = 6)]
    pub radius: u32,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct KernelArgs {
    /// Matrix JSON `{"entries": [["p/q", ..], ..]}`
    #[arg(long)]
    pub matrix: PathBuf,
    /// Vector JSON `{"entries": ["p/q", ..]}`
    #[arg(long)]
    pub vector: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct QmArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub radius: u32,
    /// Threshold for the implication chain, as `p/q`
    #[arg(long)]
    pub delta: String,
    /// Uniform discreteness bound `A`; adds the Lipschitz-derived constant
    #[arg(long)]
    pub discreteness: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct CheckArgs {
    /// Report file produced by another subcommand
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Args)]
pub struct SuiteArgs {
    /// Inclusive seed range `A..B`
    #[arg(long, default_value = "1..100")]
    pub seeds: String,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Error channel with the documented exit codes: 2 for unusable inputs, 1 for
/// violated bounds.
#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Violation(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Violation(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Parse(m) | CliError::Violation(m) => m,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn element_cap() -> usize {
    std::env::var("INVLIP_MAX_BALL")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_ELEMENT_CAP)
}

pub fn parse_seed_range(text: &str) -> CliResult<Vec<u64>> {
    let (a, b) = text
        .split_once("..")
        .ok_or_else(|| CliError::Parse(format!("seed range {text:?} must look like A..B")))?;
    let start: u64 = a
        .trim()
        .parse()
        .map_err(|_| CliError::Parse(format!("bad seed range start {a:?}")))?;
    let end: u64 = b
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|_| CliError::Parse(format!("bad seed range end {b:?}")))?;
    if end < start {
        return Err(CliError::Parse(format!("empty seed range {text:?}")));
    }
    Ok((start..=end).collect())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::ApproxFree(args) => runs::run_approx(&args, runs::ApproxKind::Free),
        Command::ApproxPresented(args) => runs::run_approx(&args, runs::ApproxKind::Presented),
        Command::ApproxOrbit(args) => runs::run_approx(&args, runs::ApproxKind::Orbit),
        Command::MeanGrowth(args) => runs::run_mean_growth(&args),
        Command::KernelProject(args) => runs::run_kernel(&args),
        Command::Qm(args) => runs::run_qm(&args),
        Command::Check(args) => check::run_check(&args),
        Command::Suite(args) => runs::run_suite(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("invlip: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
