use std::io::Write;

use clap::{Args, ValueEnum};
use smooth_counting::analysis::empirical_variance;
use smooth_counting::Registry;

use super::{budget, horizon, output, resolve};
use std::path::PathBuf;
use crate::{fmt_g17, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Closed-form variance.
    Analytic,
    /// Sample variance of the error over seeded trials.
    Empirical,
}

#[derive(Debug, Args)]
pub struct VarianceArgs {
    /// Comma-separated mechanism names.
    #[arg(long, value_delimiter = ',', default_value = "smooth,binary,toeplitz")]
    pub mechanisms: Vec<String>,
    /// Stream length.
    #[arg(long = "T")]
    pub horizon: u64,
    /// zCDP budget.
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, value_enum, default_value_t = Mode::Analytic)]
    pub mode: Mode,
    /// Trials for `--mode empirical` (at least 10000).
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Master seed for `--mode empirical`. Seeded noise is not private; the
    /// measurement only estimates the error distribution.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout by default.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(registry: &Registry, args: &VarianceArgs) -> Result<(), CliError> {
    let factories = resolve(registry, &args.mechanisms)?;
    let horizon = horizon(args.horizon)?;
    let budget = budget(args.rho)?;
    if args.mode == Mode::Empirical && args.trials < smooth_counting::analysis::MIN_TRIALS {
        return Err(CliError::Usage(format!(
            "--trials must be at least {}",
            smooth_counting::analysis::MIN_TRIALS
        )));
    }
    let mut out = output(args.out.as_deref())?;
    writeln!(out, "mechanism,t,variance")?;
    for f in factories {
        let values = match args.mode {
            Mode::Analytic => f.running_variance(horizon, budget),
            Mode::Empirical => {
                empirical_variance(f, horizon, budget, args.trials, args.seed).map(|e| e.per_step)
            }
        }
        .map_err(|e| CliError::Runtime(e.into()))?;
        for (i, v) in values.iter().enumerate() {
            writeln!(out, "{},{},{}", f.name(), i + 1, fmt_g17(*v))?;
        }
    }
    out.flush()?;
    Ok(())
}
