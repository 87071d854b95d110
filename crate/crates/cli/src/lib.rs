//! Command-line driver: parses a run configuration, executes one experiment
//! and writes its tables.

pub mod commands;
pub mod config;
pub mod output;

use clap::Parser;

use config::{Cli, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NONCONVERGENCE: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    NonConvergence(anyhow::Error),
    Io(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) | Failure::Io(_) => EXIT_CONFIG,
            Failure::NonConvergence(_) => EXIT_NONCONVERGENCE,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) | Failure::Io(e) | Failure::NonConvergence(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<monolil_core::Error> for Failure {
    fn from(e: monolil_core::Error) -> Self {
        match e {
            monolil_core::Error::NonConvergence { .. } => Failure::NonConvergence(e.into()),
            other => Failure::Config(other.into()),
        }
    }
}

/// Runs the tool on `args` (including the program name) and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let config = match RunConfig::from_command(&cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    match commands::run(&config) {
        Ok(outcome) => match outcome.violation {
            Some(v) => {
                eprintln!("property violation: {v}");
                EXIT_VIOLATION
            }
            None => EXIT_OK,
        },
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}
