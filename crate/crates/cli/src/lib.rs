//! Command-line front end: table reproduction, sweeps with checkpointing,
//! invariant suites, γ and the rational criterion.

pub mod args;
pub mod checkpoint;
pub mod commands;
pub mod error;
pub mod output;
pub mod reference;
pub mod verify;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, RunConfig};
use crate::error::Result;

/// Runs a configuration on a pool of `cfg.workers` threads.
pub fn run_config(cfg: &RunConfig) -> Result<()> {
    match cfg.workers {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| error::CliError::Usage(format!("cannot start {k} workers: {e}")))?;
            pool.install(|| commands::run(cfg))
        }
        None => commands::run(cfg),
    }
}

/// Parses `std::env::args`, runs, and maps errors to exit codes.
pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = RunConfig::from_cli(cli).and_then(|cfg| run_config(&cfg));
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.into()
        }
    }
}
