//! Command-line front end for the `smooth-counting` mechanisms.
//!
//! Each subcommand lives in [`commands`]; `main.rs` only parses arguments and
//! maps [`CliError`] onto exit codes.

pub mod commands;
pub mod format;

pub use commands::{run, Cli, Command};
pub use format::fmt_g17;

use std::fmt;

/// A failed invocation: either the arguments were unusable (exit 2) or the
/// run itself failed (exit 1).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Runtime(err) => write!(f, "error: {err:#}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<anyhow::Error> for CliError {
    fn from(err: anyhow::Error) -> Self {
        CliError::Runtime(err)
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Runtime(err.into())
    }
}
