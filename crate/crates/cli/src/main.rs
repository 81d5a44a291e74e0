//! `cas`: run the CAS limit solvers, sweeps and simulations from a JSON
//! experiment config.

mod config;
mod error;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{ExperimentConfig, Mode};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "cas", version, about = "Numerical limits of communication-assisted sensing")]
struct Args {
    /// Experiment config (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override the mode named in the config.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Top-level seed for model generation and simulation.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: out].
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Report information quantities in bits instead of nats. CSV files
    /// always hold nats.
    #[arg(long)]
    bits: bool,
    /// Monte Carlo trials for `simulate`.
    #[arg(long, value_name = "N")]
    trials: Option<usize>,
    /// Grid size: thresholds for `discrete-tradeoff`, power splits for SW.
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
}

fn load(args: &Args) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(mode) = args.mode {
        cfg.mode = mode;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    if let Some(trials) = args.trials {
        cfg.trials = Some(trials);
    }
    if let Some(grid) = args.grid {
        cfg.grid = Some(grid);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = load(&args).and_then(|cfg| run::run(&cfg, args.bits));
    match result {
        Ok(report) => {
            print!("{}", report.summary.render());
            if let Some(table) = &report.table {
                println!();
                print!("{table}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            if report.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &report.failures {
                    eprintln!("solver error: {f}");
                }
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("cas: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
