//! Subcommands. Each one takes its parsed arguments plus an output sink so it
//! can be driven from tests without spawning a process.

pub mod bench;
pub mod maxvar;
pub mod stream;
pub mod variance;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::{Parser, Subcommand};
use smooth_counting::{MechanismFactory, PrivacyBudget, Registry};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "sbm", version, about = "Differentially private continual counting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-step error variance of each mechanism, as CSV `mechanism,t,variance`.
    Variance(variance::VarianceArgs),
    /// Maximum variance over `t <= T` for `T = 1, 2, 4, ...`, as CSV.
    Maxvar(maxvar::MaxvarArgs),
    /// Time per step, space and replacement counts, as a CSV summary.
    Bench(bench::BenchArgs),
    /// Run one mechanism over a stream read line by line and print each
    /// private prefix sum as soon as its input arrives.
    Stream(stream::StreamArgs),
    /// List the registered mechanisms.
    List,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let registry = Registry::builtin();
    match cli.command {
        Command::Variance(args) => variance::run(&registry, &args),
        Command::Maxvar(args) => maxvar::run(&registry, &args),
        Command::Bench(args) => bench::run(&registry, &args),
        Command::Stream(args) => stream::run(&registry, &args),
        Command::List => {
            let mut out = io::stdout().lock();
            for f in registry.iter() {
                writeln!(out, "{:<14}{}", f.name(), f.description())?;
            }
            Ok(())
        }
    }
}

pub(crate) fn budget(rho: f64) -> Result<PrivacyBudget, CliError> {
    PrivacyBudget::new(rho).map_err(|e| CliError::Usage(e.to_string()))
}

pub(crate) fn horizon(t: u64) -> Result<u64, CliError> {
    if t == 0 {
        return Err(CliError::Usage("--T must be at least 1".into()));
    }
    Ok(t)
}

pub(crate) fn resolve<'r>(
    registry: &'r Registry,
    names: &[String],
) -> Result<Vec<&'r dyn MechanismFactory>, CliError> {
    if names.is_empty() {
        return Err(CliError::Usage("no mechanism given".into()));
    }
    names
        .iter()
        .map(|n| {
            registry.get(n.trim()).map_err(|_| {
                let known: Vec<_> = registry.names().collect();
                CliError::Usage(format!("unknown mechanism `{n}` (known: {})", known.join(", ")))
            })
        })
        .collect()
}

/// Opens `path` for writing, or stdout when no path (or `-`) is given.
pub(crate) fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
        Some(p) if p == Path::new("-") => Ok(Box::new(BufWriter::new(io::stdout()))),
        Some(p) => {
            let file = File::create(p)
                .map_err(|e| CliError::Runtime(anyhow::anyhow!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(file)))
        }
    }
}

