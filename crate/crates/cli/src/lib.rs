//! Command-line experiments on spiked Gram kernels.
//!
//! Each subcommand has a `compute` function returning typed results (used by
//! the tests) and a `run` function that adds files and `report.json`.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;
pub mod report;
pub mod svg;

use std::path::PathBuf;

use args::{Cli, Command};
use error::{CliError, CliResult};
use report::RunReport;

pub const THREADS_ENV: &str = "SPIKELAB_THREADS";

fn out_dir(command: &Command) -> Option<PathBuf> {
    match command {
        Command::Theory(a) => a.out.clone(),
        Command::Synth(a) => Some(a.out.clone()),
        Command::Clt(a) => Some(a.out.clone()),
        Command::Esd(a) => Some(a.out.clone()),
        Command::Fmnist(a) => Some(a.out.clone()),
    }
}

/// Caps the worker pool at `$SPIKELAB_THREADS` when set.
pub fn configure_threads() -> CliResult<()> {
    if let Some(v) = std::env::var_os(THREADS_ENV) {
        let n: usize = v
            .to_str()
            .and_then(|s| s.trim().parse().ok())
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer")))?;
        // A second initialization (e.g. in tests) keeps the existing pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> CliResult<RunReport> {
    configure_threads()?;
    let result = match &cli.command {
        Command::Theory(a) => commands::theory::run(a),
        Command::Synth(a) => commands::synth::run(a),
        Command::Clt(a) => commands::clt::run(a),
        Command::Esd(a) => commands::esd::run(a),
        Command::Fmnist(a) => commands::fmnist::run(a),
    };
    if let Err(CliError::Numerical { partial: Some(report), .. }) = &result {
        if let Some(dir) = out_dir(&cli.command) {
            let _ = report.write(&dir);
        }
    }
    result
}
