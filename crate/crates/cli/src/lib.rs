//! Command-line driver: rollouts, determinism checks, benchmarks, dump replay
//! and model validation.
//!
//! Exit codes are `0` on success, `1` when a check fails and `2` on usage
//! errors.

pub mod args;
pub mod commands;

use std::io;
use std::path::PathBuf;

use robogym::record::DumpError;
use robogym::EnvError;
use thiserror::Error;

pub use args::{Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    /// A check ran and did not hold (non-reproducible run, replay mismatch,
    /// invalid model).
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("{path}: {source}")]
    Dump { path: PathBuf, source: DumpError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Output(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Env(EnvError::UnknownEnv { .. } | EnvError::Config(_)) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        }
    }
}

/// Runs a parsed command line, writing results to `out` and diagnostics to
/// `err`. Returns the process exit code.
pub fn run(cli: Cli, out: &mut dyn io::Write, err: &mut dyn io::Write) -> i32 {
    let result = match cli.command {
        Command::Run(a) => commands::run(&a, out, err),
        Command::VerifyDeterminism(a) => commands::verify_determinism(&a, out, None),
        Command::Benchmark(a) => commands::benchmark(&a, out, err),
        Command::Replay(a) => commands::replay(&a, out),
        Command::Parse(a) => commands::parse(&a, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
