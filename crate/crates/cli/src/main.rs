mod commands;
mod config;
mod error;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::RunContext;
use crate::config::ExperimentConfig;
use crate::error::CliResult;

/// Stationary symmetric α-stable random fields: simulation, symbolic
/// classification, structural verification, and Monte Carlo reports.
#[derive(Parser)]
#[command(name = "stablefield", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate realizations and write them as CSV plus metadata.
    Simulate(RunArgs),
    /// Compute the ergodicity verdict and the factor ledger.
    Classify(RunArgs),
    /// Run the structural property checks; nonzero exit on violations.
    Verify(RunArgs),
    /// Produce the diagnostics bundle (CSV, SVG, JSON summary).
    Report(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file (TOML).
    config: PathBuf,
    /// Override the configuration seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "stablefield-out")]
    out: PathBuf,
    /// Worker threads; falls back to STABLEFIELD_THREADS, then to the
    /// number of cores.
    #[arg(long)]
    threads: Option<usize>,
}

impl RunArgs {
    fn context(self) -> CliResult<RunContext> {
        let mut config = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        let threads = self
            .threads
            .or_else(|| {
                std::env::var("STABLEFIELD_THREADS")
                    .ok()
                    .and_then(|v| v.parse().ok())
            })
            .unwrap_or_else(|| {
                std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
            })
            .max(1);
        Ok(RunContext { config, out_dir: self.out, threads })
    }
}

fn run() -> CliResult<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(args) => commands::cmd_simulate(&args.context()?),
        Command::Classify(args) => commands::cmd_classify(&args.context()?).map(|_| ()),
        Command::Verify(args) => commands::cmd_verify(&args.context()?),
        Command::Report(args) => commands::cmd_report(&args.context()?),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
