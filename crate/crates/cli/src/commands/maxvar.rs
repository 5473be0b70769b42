use std::io::Write;

use clap::Args;
use smooth_counting::Registry;

use super::{budget, output, resolve};
use std::path::PathBuf;
use crate::{fmt_g17, CliError};

#[derive(Debug, Args)]
pub struct MaxvarArgs {
    /// Comma-separated mechanism names.
    #[arg(long, value_delimiter = ',', default_value = "smooth,binary,toeplitz")]
    pub mechanisms: Vec<String>,
    /// Largest stream length; rows are written for every power of two up to it.
    #[arg(long = "Tmax")]
    pub tmax: u64,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `1, 2, 4, ...` up to and including `tmax`.
pub fn powers_of_two(tmax: u64) -> impl Iterator<Item = u64> {
    (0..64).map(|e| 1u64 << e).take_while(move |&t| t <= tmax)
}

pub fn run(registry: &Registry, args: &MaxvarArgs) -> Result<(), CliError> {
    let factories = resolve(registry, &args.mechanisms)?;
    if args.tmax == 0 {
        return Err(CliError::Usage("--Tmax must be at least 1".into()));
    }
    let budget = budget(args.rho)?;
    let mut out = output(args.out.as_deref())?;
    writeln!(out, "mechanism,T,max_variance")?;
    for f in factories {
        for t in powers_of_two(args.tmax) {
            let v = f
                .max_variance(t, budget)
                .map_err(|e| CliError::Runtime(e.into()))?;
            writeln!(out, "{},{},{}", f.name(), t, fmt_g17(v))?;
        }
    }
    out.flush()?;
    Ok(())
}
