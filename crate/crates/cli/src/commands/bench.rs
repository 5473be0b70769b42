use std::io::Write;
use std::time::Instant;

use anyhow::anyhow;
use clap::Args;
use smooth_counting::analysis::{Accountant, AccountingReport};
use smooth_counting::{MechanismConfig, MechanismFactory, NoiseSource, Registry, StreamElement};

use super::{budget, horizon, output, resolve};
use std::path::PathBuf;
use crate::{fmt_g17, CliError};

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated mechanism names.
    #[arg(long, value_delimiter = ',', default_value = "smooth,binary")]
    pub mechanisms: Vec<String>,
    /// Comma-separated stream lengths.
    #[arg(long = "T", value_delimiter = ',', required = true)]
    pub horizons: Vec<u64>,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = 5)]
    pub repeats: u32,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    /// Noise seed; repeat `r` uses stream `r` of this seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Refuse runs whose peak live state would exceed this many floats.
    #[arg(long, default_value_t = 1 << 28)]
    pub max_floats: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub mechanism: &'static str,
    pub horizon: u64,
    pub dim: usize,
    pub median_ns_per_step: f64,
    pub report: AccountingReport,
}

pub const HEADER: &str = "mechanism,T,dim,repeats,median_ns_per_step,max_live_nodes,max_live_floats,total_replacements,avg_replacements";

/// Input used for timing: every coordinate equals `(t mod 2)/√d`.
fn bench_element(t: u64, dim: usize) -> StreamElement {
    let v = if t % 2 == 1 { 1.0 / (dim as f64).sqrt() } else { 0.0 };
    StreamElement::new(vec![v; dim]).expect("norm at most one")
}

pub fn bench_one(
    factory: &dyn MechanismFactory,
    horizon: u64,
    args: &BenchArgs,
) -> Result<BenchRow, CliError> {
    let peak = factory
        .peak_floats(horizon, args.dim)
        .map_err(|e| CliError::Runtime(e.into()))?;
    if peak > u128::from(args.max_floats) {
        return Err(CliError::Runtime(anyhow!(
            "{} at T={horizon}, d={} needs {peak} live floats, above --max-floats {}",
            factory.name(),
            args.dim,
            args.max_floats
        )));
    }
    let budget = budget(args.rho)?;
    let inputs: Vec<_> = (1..=horizon).map(|t| bench_element(t, args.dim)).collect();
    let mut times = Vec::with_capacity(args.repeats as usize);
    let mut report = None;
    for r in 0..args.repeats {
        let config = MechanismConfig::new(horizon, budget)
            .with_dim(args.dim)
            .with_noise(NoiseSource::for_trial(args.seed, u64::from(r)));
        let mut m = factory.build(config).map_err(|e| CliError::Runtime(e.into()))?;
        let mut acc = Accountant::default();
        let start = Instant::now();
        for x in &inputs {
            let out = m.step(x).map_err(|e| CliError::Runtime(e.into()))?;
            acc.record(&out);
        }
        times.push(start.elapsed().as_nanos() as f64 / horizon as f64);
        report = Some(acc.report());
    }
    times.sort_by(f64::total_cmp);
    Ok(BenchRow {
        mechanism: factory.name(),
        horizon,
        dim: args.dim,
        median_ns_per_step: times[times.len() / 2],
        report: report.expect("at least one repeat"),
    })
}

pub fn run(registry: &Registry, args: &BenchArgs) -> Result<(), CliError> {
    let factories = resolve(registry, &args.mechanisms)?;
    for &t in &args.horizons {
        horizon(t)?;
    }
    if args.dim == 0 {
        return Err(CliError::Usage("--dim must be at least 1".into()));
    }
    if args.repeats == 0 {
        return Err(CliError::Usage("--repeats must be at least 1".into()));
    }
    budget(args.rho)?;
    let mut out = output(args.out.as_deref())?;
    writeln!(out, "{HEADER}")?;
    for f in factories {
        for &t in &args.horizons {
            let row = bench_one(f, t, args)?;
            let r = row.report;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                row.mechanism,
                row.horizon,
                row.dim,
                args.repeats,
                fmt_g17(row.median_ns_per_step),
                r.max_live_nodes,
                r.max_live_floats,
                r.total_replacements,
                fmt_g17(r.avg_replacements)
            )?;
            out.flush()?;
        }
    }
    Ok(())
}
