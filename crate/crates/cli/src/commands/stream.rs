use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::PathBuf;

use anyhow::anyhow;
use clap::{Args, ValueEnum};
use smooth_counting::{MechanismConfig, MechanismOutput, NoiseSource, Registry, StreamElement};

use super::{budget, horizon};
use crate::{fmt_g17, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Estimate coordinates separated by spaces.
    Plain,
    /// `t,y_1,...,y_d` with a header line.
    Csv,
    /// One JSON object per line.
    Jsonl,
}

#[derive(Debug, Clone, Args)]
pub struct StreamArgs {
    #[arg(long, default_value = "smooth")]
    pub mechanism: String,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    /// Maximum stream length; input past it is an error.
    #[arg(long = "T")]
    pub horizon: u64,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Seed the noise. Reproducible but NOT private; omit for OS randomness.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Disable noise entirely. Prints exact prefix sums, NOT private.
    #[arg(long)]
    pub zero_noise: bool,
    /// Input file, one element per line as comma- or space-separated values
    /// in [0, 1] with ℓ2 norm at most 1. Reads stdin when absent or `-`.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Plain)]
    pub format: Format,
}

fn parse_line(line: &str, dim: usize) -> Result<StreamElement, String> {
    let values = line
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("`{s}` is not a number")))
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != dim {
        return Err(format!("expected {dim} value(s), found {}", values.len()));
    }
    StreamElement::new(values).map_err(|e| e.to_string())
}

fn write_output(out: &mut dyn Write, format: Format, o: &MechanismOutput) -> io::Result<()> {
    match format {
        Format::Plain => {
            let cells: Vec<_> = o.estimate.iter().map(|v| fmt_g17(*v)).collect();
            writeln!(out, "{}", cells.join(" "))
        }
        Format::Csv => {
            write!(out, "{}", o.step)?;
            for v in &o.estimate {
                write!(out, ",{}", fmt_g17(*v))?;
            }
            writeln!(out)
        }
        Format::Jsonl => {
            let obj = serde_json::json!({
                "t": o.step,
                "estimate": o.estimate,
                "live_nodes": o.live_nodes,
                "replacements": o.replacements,
            });
            writeln!(out, "{obj}")
        }
    }
}

/// Feeds every non-blank line of `input` to the mechanism and writes one
/// output line per element, flushing after each. Returns the number of steps.
pub fn run_stream(
    registry: &Registry,
    args: &StreamArgs,
    input: impl BufRead,
    out: &mut dyn Write,
) -> Result<u64, CliError> {
    let factory = registry
        .get(&args.mechanism)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let horizon = horizon(args.horizon)?;
    let budget = budget(args.rho)?;
    if args.dim == 0 {
        return Err(CliError::Usage("--dim must be at least 1".into()));
    }
    let noise = match args.seed {
        Some(seed) => NoiseSource::seeded(seed),
        None => NoiseSource::secure(),
    };
    let mut config = MechanismConfig::new(horizon, budget)
        .with_dim(args.dim)
        .with_noise(noise);
    if args.zero_noise {
        config = config.zero_noise();
    }
    let mut m = factory
        .build(config)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    if args.format == Format::Csv {
        let cols: Vec<_> = (1..=args.dim).map(|i| format!("y_{i}")).collect();
        writeln!(out, "t,{}", cols.join(","))?;
    }
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| CliError::Runtime(anyhow!("line {lineno}: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let x = parse_line(&line, args.dim)
            .map_err(|e| CliError::Runtime(anyhow!("line {lineno}: {e}")))?;
        let o = m
            .step(&x)
            .map_err(|e| CliError::Runtime(anyhow!("line {lineno}: {e}")))?;
        write_output(out, args.format, &o)?;
        out.flush()?;
    }
    Ok(m.steps())
}

pub fn run(registry: &Registry, args: &StreamArgs) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match args.input.as_deref() {
        Some(p) if p != std::path::Path::new("-") => {
            let file = File::open(p)
                .map_err(|e| CliError::Runtime(anyhow!("cannot open {}: {e}", p.display())))?;
            run_stream(registry, args, BufReader::new(file), &mut out)?;
        }
        _ => {
            run_stream(registry, args, io::stdin().lock(), &mut out)?;
        }
    }
    Ok(())
}
