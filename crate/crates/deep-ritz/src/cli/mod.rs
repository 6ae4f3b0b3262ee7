//! The `deep-ritz` command line: argument parsing, config loading, output files and exit codes.
//!
//! Exit codes: 0 success, 2 config or validation error, 3 numeric abort, 4 capacity refusal.

mod commands;
mod config;
#[cfg(test)]
mod tests;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{approx_preset, write_csv, StatbenchSpec, APPROX_PRESETS};
pub use config::{config_hash, load_experiment, load_json, Experiment, ExperimentConfig, NetConfig};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;

/// Environment variable read when `--threads` is absent.
pub const THREADS_ENV: &str = "DEEP_RITZ_THREADS";

#[derive(Debug, Parser)]
#[command(name = "deep-ritz", version, about = "Deep Ritz solver, approximants and error diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train on a config and write history.csv, checkpoint.json and summary.json.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Sequential reductions for bit-reproducible output.
        #[arg(long)]
        deterministic: bool,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the hyperparameter schedule for a target accuracy.
    Schedule {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        beta: f64,
    },
    /// Build a localized-Taylor approximant of a preset function.
    Approx {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Sobolev exponent recorded in the report.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Error decomposition of a checkpoint against an approximant.
    Diagnose {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        approximant: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Sup-distance for matching initial sub-networks to the approximant.
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Matches required per target sub-network.
        #[arg(long, default_value_t = 1)]
        r: usize,
        /// Use this bound on `sup |L − L̂|` instead of measuring the gap.
        #[arg(long)]
        sta_bound: Option<f64>,
        /// Defaults to `diagnose.json` in the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the empirical generalization gap against the closed-form bound.
    Statbench {
        #[arg(long)]
        spec: PathBuf,
    },
}

/// A reportable failure and its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonFinite { .. } => EXIT_NUMERIC,
            Error::Capacity { .. } => EXIT_CAPACITY,
            _ => EXIT_CONFIG,
        };
        Self { code, message: e.to_string() }
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve { config, deterministic, threads } => {
            configure_threads(threads)?;
            commands::solve(&config, deterministic)
        }
        Command::Schedule { epsilon, d, n, mu, beta } => commands::schedule(epsilon, d, n, mu, beta),
        Command::Approx { preset, epsilon, n, d, p, out } => commands::approx(&preset, epsilon, n, d, p, &out),
        Command::Diagnose { checkpoint, approximant, config, delta, r, sta_bound, out } => {
            commands::diagnose(&checkpoint, &approximant, &config, delta, r, sta_bound, out.as_deref())
        }
        Command::Statbench { spec } => commands::statbench(&spec),
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), Failure> {
    let threads = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.parse().map_err(|_| Failure::config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::config("--threads must be at least 1"));
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}
