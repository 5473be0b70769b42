//! Square-root factorization `A = L·L` of the all-ones lower-triangular matrix.
//!
//! `L` is lower-triangular Toeplitz with first column `c_j = C(2j, j) / 4^j`,
//! i.e. `c_0 = 1` and `c_j = c_{j-1}·(2j - 1)/(2j)`. Its self-convolution is
//! identically one, which is exactly `L·L = A`. With `R = L` the sensitivity
//! is the largest column norm of `R`, `Σ_{j<T} c_j²`, and output `t` carries
//! noise with variance `Δ²/(2ρ) · Σ_{j<t} c_j²`.

use crate::error::{Error, Result};
use crate::mechanism::{check_element, Mechanism, MechanismConfig, MechanismFactory};
use crate::noise::NoiseSource;
use crate::privacy::{calibrate_gaussian, NoiseScale, PrivacyBudget};
use crate::stream::{MechanismOutput, StreamElement};

/// First column of the Toeplitz square root of the `T × T` prefix-sum matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzFactor {
    coeffs: Vec<f64>,
}

impl ToeplitzFactor {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Entry `(i, j)` (0-based) of the lower-triangular factor.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.coeffs[i - j]
        }
    }

    /// `(c * c)_j`.
    pub fn self_convolution(&self, j: usize) -> f64 {
        (0..=j).map(|i| self.coeffs[i] * self.coeffs[j - i]).sum()
    }

    /// `Σ_{j<t} c_j²`, the squared norm of row `t` (1-based) of `L`.
    pub fn row_norm_sq(&self, t: usize) -> f64 {
        self.coeffs[..t].iter().map(|c| c * c).sum()
    }

    /// Squared ℓ2-sensitivity: the largest squared column norm of `R = L`.
    pub fn sensitivity_sq(&self) -> f64 {
        self.row_norm_sq(self.coeffs.len())
    }

    /// `Σ_{j<t} c_j²` for every `t = 1..=T`.
    pub fn row_norms_sq(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .scan(0.0, |acc, c| {
                *acc += c * c;
                Some(*acc)
            })
            .collect()
    }
}

pub fn toeplitz_coeffs(horizon: u64) -> Result<ToeplitzFactor> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let n = usize::try_from(horizon)
        .map_err(|_| Error::InvalidArgument(format!("horizon {horizon} too large")))?;
    let mut coeffs = Vec::with_capacity(n);
    coeffs.push(1.0);
    for j in 1..n {
        let prev = coeffs[j - 1];
        coeffs.push(prev * (2 * j - 1) as f64 / (2 * j) as f64);
    }
    Ok(ToeplitzFactor { coeffs })
}

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

/// `(Σ_{j<T} c_j²) · (Σ_{j<t} c_j²) / (2ρ)`.
pub fn matrix_variance(horizon: u64, budget: PrivacyBudget, t: u64) -> Result<f64> {
    check_step(t, horizon)?;
    let factor = toeplitz_coeffs(horizon)?;
    let node = calibrate_gaussian(budget, factor.sensitivity_sq())?;
    Ok(node.variance() * factor.row_norm_sq(t as usize))
}

/// Streaming simulation of the factorization: keeps every past noise vector
/// and convolves, so each step costs `O(t · d)` time and the state grows
/// linearly in `t`.
#[derive(Debug)]
pub struct ToeplitzMechanism {
    factor: ToeplitzFactor,
    scale: NoiseScale,
    noise: NoiseSource,
    count: Vec<f64>,
    history: Vec<f64>,
    dim: usize,
    t: u64,
    budget: PrivacyBudget,
}

impl ToeplitzMechanism {
    pub fn new(config: MechanismConfig) -> Result<Self> {
        config.validate()?;
        let factor = toeplitz_coeffs(config.horizon)?;
        let scale = if config.zero_noise {
            NoiseScale::ZERO
        } else {
            calibrate_gaussian(config.budget, factor.sensitivity_sq())?
        };
        Ok(Self {
            factor,
            scale,
            noise: config.noise,
            count: vec![0.0; config.dim],
            history: Vec::new(),
            dim: config.dim,
            t: 0,
            budget: config.budget,
        })
    }

    pub fn noise_scale(&self) -> NoiseScale {
        self.scale
    }
}

impl Mechanism for ToeplitzMechanism {
    fn name(&self) -> &'static str {
        "toeplitz"
    }

    fn horizon(&self) -> u64 {
        self.factor.len() as u64
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn steps(&self) -> u64 {
        self.t
    }

    fn step(&mut self, x: &StreamElement) -> Result<MechanismOutput> {
        check_element(x, self.dim, self.t, self.horizon())?;
        let start = self.history.len();
        self.history.resize(start + self.dim, 0.0);
        self.noise
            .fill_gaussian(self.scale, &mut self.history[start..]);
        for (c, v) in self.count.iter_mut().zip(x.as_slice()) {
            *c += v;
        }
        self.t += 1;
        let t = self.t as usize;
        let mut estimate = self.count.clone();
        // Row t of L applied to z_1..z_t: Σ_j c_j z_{t-j}.
        for j in 0..t {
            let c = self.factor.coeffs[j];
            let z = &self.history[(t - 1 - j) * self.dim..(t - j) * self.dim];
            for (e, zi) in estimate.iter_mut().zip(z) {
                *e += c * zi;
            }
        }
        Ok(MechanismOutput {
            estimate,
            step: self.t,
            replacements: 0,
            admitted: 1,
            live_nodes: t,
        })
    }

    fn live_nodes(&self) -> usize {
        self.t as usize
    }

    fn variance_at(&self, t: u64) -> Result<f64> {
        check_step(t, self.horizon())?;
        let node = calibrate_gaussian(self.budget, self.factor.sensitivity_sq())?;
        Ok(node.variance() * self.factor.row_norm_sq(t as usize))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ToeplitzFactory;

impl MechanismFactory for ToeplitzFactory {
    fn name(&self) -> &'static str {
        "toeplitz"
    }

    fn description(&self) -> &'static str {
        "Toeplitz square-root matrix mechanism (linear space, not streaming-efficient)"
    }

    fn analytic_variance(&self, horizon: u64, budget: PrivacyBudget, t: u64) -> Result<f64> {
        matrix_variance(horizon, budget, t)
    }

    fn running_variance(&self, horizon: u64, budget: PrivacyBudget) -> Result<Vec<f64>> {
        let factor = toeplitz_coeffs(horizon)?;
        let node = calibrate_gaussian(budget, factor.sensitivity_sq())?;
        Ok(factor
            .row_norms_sq()
            .into_iter()
            .map(|r| node.variance() * r)
            .collect())
    }

    fn max_variance(&self, horizon: u64, budget: PrivacyBudget) -> Result<f64> {
        matrix_variance(horizon, budget, horizon)
    }

    fn peak_floats(&self, horizon: u64, dim: usize) -> Result<u128> {
        Ok(u128::from(horizon) * dim as u128)
    }

    fn build(&self, config: MechanismConfig) -> Result<Box<dyn Mechanism>> {
        Ok(Box::new(ToeplitzMechanism::new(config)?))
    }
}
