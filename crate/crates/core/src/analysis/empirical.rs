//! Empirical variance of `M(t) - c(t)` over seeded trials.
//!
//! Trial `i` draws its noise from [`NoiseSource::for_trial`]`(seed, i)`.
//! Trials are grouped into fixed chunks of [`TRIAL_CHUNK`]; chunk statistics
//! are computed in parallel and merged in chunk order, so the result does
//! not depend on the number of worker threads.

use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::mechanism::{MechanismConfig, MechanismFactory};
use crate::noise::NoiseSource;
use crate::privacy::PrivacyBudget;
use crate::stream::StreamElement;

pub const MIN_TRIALS: u64 = 10_000;
pub const TRIAL_CHUNK: u64 = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalVariance {
    pub trials: u64,
    /// Sample variance (n - 1 denominator) at `t = 1..=T`.
    pub per_step: Vec<f64>,
    /// Sample mean of the error at each step.
    pub mean: Vec<f64>,
}

/// Running moments per time step (Welford / Chan merge).
#[derive(Debug, Clone)]
struct Moments {
    n: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, errors: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((m, s), &e) in self.mean.iter_mut().zip(&mut self.m2).zip(errors) {
            let d = e - *m;
            *m += d / n;
            *s += d * (e - *m);
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * nb / n;
            self.m2[i] += other.m2[i] + d * d * na * nb / n;
        }
        self.n += other.n;
    }
}

/// The fixed input stream used by the harness: `x_t = t mod 2`.
fn harness_element(t: u64) -> StreamElement {
    StreamElement::bit(t % 2 == 1)
}

pub fn empirical_variance(
    factory: &dyn MechanismFactory,
    horizon: u64,
    budget: PrivacyBudget,
    trials: u64,
    seed: u64,
) -> Result<EmpiricalVariance> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "empirical variance needs at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    let len = usize::try_from(horizon)
        .map_err(|_| Error::InvalidArgument(format!("horizon {horizon} too large")))?;
    let chunks = trials.div_ceil(TRIAL_CHUNK);
    let partials: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|chunk| -> Result<Moments> {
            let mut moments = Moments::new(len);
            let mut errors = vec![0.0; len];
            let end = ((chunk + 1) * TRIAL_CHUNK).min(trials);
            for trial in chunk * TRIAL_CHUNK..end {
                let config = MechanismConfig::new(horizon, budget)
                    .with_noise(NoiseSource::for_trial(seed, trial));
                let mut m = factory.build(config)?;
                let mut count = 0.0;
                for t in 1..=horizon {
                    let x = harness_element(t);
                    count += x.as_slice()[0];
                    errors[(t - 1) as usize] = m.step(&x)?.estimate[0] - count;
                }
                moments.push(&errors);
            }
            Ok(moments)
        })
        .collect::<Result<_>>()?;
    let mut total = Moments::new(len);
    for p in &partials {
        total.merge(p);
    }
    let dof = (total.n - 1) as f64;
    Ok(EmpiricalVariance {
        trials,
        per_step: total.m2.iter().map(|s| s / dof).collect(),
        mean: total.mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceBand {
    pub lower: f64,
    pub upper: f64,
}

impl VarianceBand {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

/// Two-sided chi-square acceptance band for a sample variance of `trials`
/// Gaussian draws with true variance `variance`.
///
/// `comparisons` applies a Bonferroni split so that `comparisons` estimates
/// all land inside their bands with probability at least `confidence`.
pub fn chi_square_band(
    variance: f64,
    trials: u64,
    confidence: f64,
    comparisons: usize,
) -> Result<VarianceBand> {
    if trials < 2 || !(0.0 < confidence && confidence < 1.0) || comparisons == 0 {
        return Err(Error::InvalidArgument(format!(
            "bad chi-square band request: trials={trials} confidence={confidence} comparisons={comparisons}"
        )));
    }
    let dof = (trials - 1) as f64;
    let alpha = (1.0 - confidence) / comparisons as f64;
    let chi = ChiSquared::new(dof).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(VarianceBand {
        lower: variance * chi.inverse_cdf(alpha / 2.0) / dof,
        upper: variance * chi.inverse_cdf(1.0 - alpha / 2.0) / dof,
    })
}
