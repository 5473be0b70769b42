use crate::error::{Error, Result};
use crate::mechanism::{check_element, Mechanism, MechanismConfig, MechanismFactory};
use crate::noise::NoiseSource;
use crate::privacy::{calibrate_gaussian, NoiseScale, PrivacyBudget};
use crate::stream::{MechanismOutput, StreamElement};

fn check_step(t: u64, horizon: u64) -> Result<()> {
    if t == 0 || t > horizon {
        return Err(Error::OutOfRange {
            what: "time step",
            value: t.into(),
            bound: u128::from(horizon) + 1,
        });
    }
    Ok(())
}

/// `T / (2ρ)`: every prefix sum released with its own noise, each element
/// touching all `T` of them.
pub fn naive_output_variance(horizon: u64, budget: PrivacyBudget) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    Ok(calibrate_gaussian(budget, horizon as f64)?.variance())
}

/// `t / (2ρ)`: noise added to each element, errors accumulating in the sum.
pub fn naive_input_variance(t: u64, budget: PrivacyBudget) -> Result<f64> {
    if t == 0 {
        return Err(Error::InvalidArgument("time step must be at least 1".into()));
    }
    Ok(calibrate_gaussian(budget, 1.0)?.variance() * t as f64)
}

/// Releases `M(t) = Σ[1, t] + z_t` with fresh noise every step.
#[derive(Debug)]
pub struct NaiveOutputMechanism {
    horizon: u64,
    scale: NoiseScale,
    noise: NoiseSource,
    count: Vec<f64>,
    t: u64,
    budget: PrivacyBudget,
}

impl NaiveOutputMechanism {
    pub fn new(config: MechanismConfig) -> Result<Self> {
        config.validate()?;
        let scale = if config.zero_noise {
            NoiseScale::ZERO
        } else {
            calibrate_gaussian(config.budget, config.horizon as f64)?
        };
        Ok(Self {
            horizon: config.horizon,
            scale,
            noise: config.noise,
            count: vec![0.0; config.dim],
            t: 0,
            budget: config.budget,
        })
    }
}

impl Mechanism for NaiveOutputMechanism {
    fn name(&self) -> &'static str {
        "naive_output"
    }

    fn horizon(&self) -> u64 {
        self.horizon
    }

    fn dim(&self) -> usize {
        self.count.len()
    }

    fn steps(&self) -> u64 {
        self.t
    }

    fn step(&mut self, x: &StreamElement) -> Result<MechanismOutput> {
        check_element(x, self.dim(), self.t, self.horizon)?;
        for (c, v) in self.count.iter_mut().zip(x.as_slice()) {
            *c += v;
        }
        let mut estimate = vec![0.0; self.dim()];
        self.noise.fill_gaussian(self.scale, &mut estimate);
        for (e, c) in estimate.iter_mut().zip(&self.count) {
            *e += c;
        }
        self.t += 1;
        Ok(MechanismOutput {
            estimate,
            step: self.t,
            replacements: 0,
            admitted: 0,
            live_nodes: 0,
        })
    }

    fn live_nodes(&self) -> usize {
        0
    }

    fn variance_at(&self, t: u64) -> Result<f64> {
        check_step(t, self.horizon)?;
        naive_output_variance(self.horizon, self.budget)
    }
}

/// Releases `M(t) = Σ_{i<=t} (x_i + z_i)`.
#[derive(Debug)]
pub struct NaiveInputMechanism {
    horizon: u64,
    scale: NoiseScale,
    noise: NoiseSource,
    count: Vec<f64>,
    noise_sum: Vec<f64>,
    fresh: Vec<f64>,
    t: u64,
    budget: PrivacyBudget,
}

impl NaiveInputMechanism {
    pub fn new(config: MechanismConfig) -> Result<Self> {
        config.validate()?;
        let scale = if config.zero_noise {
            NoiseScale::ZERO
        } else {
            calibrate_gaussian(config.budget, 1.0)?
        };
        Ok(Self {
            horizon: config.horizon,
            scale,
            noise: config.noise,
            count: vec![0.0; config.dim],
            noise_sum: vec![0.0; config.dim],
            fresh: vec![0.0; config.dim],
            t: 0,
            budget: config.budget,
        })
    }
}

impl Mechanism for NaiveInputMechanism {
    fn name(&self) -> &'static str {
        "naive_input"
    }

    fn horizon(&self) -> u64 {
        self.horizon
    }

    fn dim(&self) -> usize {
        self.count.len()
    }

    fn steps(&self) -> u64 {
        self.t
    }

    fn step(&mut self, x: &StreamElement) -> Result<MechanismOutput> {
        check_element(x, self.dim(), self.t, self.horizon)?;
        self.noise.fill_gaussian(self.scale, &mut self.fresh);
        for i in 0..self.count.len() {
            self.count[i] += x.as_slice()[i];
            self.noise_sum[i] += self.fresh[i];
        }
        self.t += 1;
        Ok(MechanismOutput {
            estimate: self
                .count
                .iter()
                .zip(&self.noise_sum)
                .map(|(c, z)| c + z)
                .collect(),
            step: self.t,
            replacements: 0,
            admitted: 1,
            live_nodes: 1,
        })
    }

    fn live_nodes(&self) -> usize {
        usize::from(self.t > 0)
    }

    fn variance_at(&self, t: u64) -> Result<f64> {
        check_step(t, self.horizon)?;
        naive_input_variance(t, self.budget)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveOutputFactory;

impl MechanismFactory for NaiveOutputFactory {
    fn name(&self) -> &'static str {
        "naive_output"
    }

    fn description(&self) -> &'static str {
        "fresh noise on every released prefix sum"
    }

    fn analytic_variance(&self, horizon: u64, budget: PrivacyBudget, t: u64) -> Result<f64> {
        check_step(t, horizon)?;
        naive_output_variance(horizon, budget)
    }

    fn max_variance(&self, horizon: u64, budget: PrivacyBudget) -> Result<f64> {
        naive_output_variance(horizon, budget)
    }

    fn peak_floats(&self, _horizon: u64, _dim: usize) -> Result<u128> {
        Ok(0)
    }

    fn build(&self, config: MechanismConfig) -> Result<Box<dyn Mechanism>> {
        Ok(Box::new(NaiveOutputMechanism::new(config)?))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveInputFactory;

impl MechanismFactory for NaiveInputFactory {
    fn name(&self) -> &'static str {
        "naive_input"
    }

    fn description(&self) -> &'static str {
        "noise on every input element, summed"
    }

    fn analytic_variance(&self, horizon: u64, budget: PrivacyBudget, t: u64) -> Result<f64> {
        check_step(t, horizon)?;
        naive_input_variance(t, budget)
    }

    fn max_variance(&self, horizon: u64, budget: PrivacyBudget) -> Result<f64> {
        naive_input_variance(horizon, budget)
    }

    fn peak_floats(&self, _horizon: u64, dim: usize) -> Result<u128> {
        Ok(dim as u128)
    }

    fn build(&self, config: MechanismConfig) -> Result<Box<dyn Mechanism>> {
        Ok(Box::new(NaiveInputMechanism::new(config)?))
    }
}
