//! Command-line front end: `bfamily --config run.cfg --out results/`.
//!
//! Exit codes: 0 on success, 2 when blow-up is detected, 1 on errors,
//! numerical faults and failed checks.

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;

use clap::Parser;

pub use config::{parse_config, ConfigError, RunConfig, Scenario};
pub use run::{run, CliError, ExitStatus, Outcome};

#[derive(Debug, Parser)]
#[command(
    name = "bfamily",
    version,
    about = "Simulate and verify two-component b-family runs"
)]
pub struct Args {
    /// Configuration document (flat `key = value`).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Seed for randomized initial data.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 uses all cores).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

/// Parses arguments, runs the scenario and returns the process exit code.
pub fn main_with_args(args: Args) -> i32 {
    if args.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(args.workers)
            .build_global()
        {
            eprintln!("error: cannot configure {} workers: {e}", args.workers);
            return 1;
        }
    }
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return 1;
        }
    };
    let result = parse_config(&text, args.seed)
        .map_err(CliError::from)
        .and_then(|cfg| run(&cfg, &args.out));
    match result {
        Ok(outcome) => {
            eprintln!(
                "{}: exit {} (summary in {})",
                outcome.summary["scenario"].as_str().unwrap_or("run"),
                outcome.status.code(),
                args.out.join("summary.json").display()
            );
            outcome.status.code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
