//! The common mechanism interface and the registry of named mechanisms.
//!
//! Every continual-counting mechanism is a streaming state machine behind
//! [`Mechanism`]. Each variant is described by a [`MechanismFactory`] that
//! knows its analytic variance and how to build an instance; factories are
//! registered by name in a [`Registry`] so callers can pick one at runtime.

use std::fmt;

use crate::baselines::{NaiveInputFactory, NaiveOutputFactory, ToeplitzFactory};
use crate::binary::BinaryFactory;
use crate::bitcodec::PathWord;
use crate::error::{Error, Result};
use crate::noise::NoiseSource;
use crate::privacy::PrivacyBudget;
use crate::smooth::SmoothFactory;
use crate::stream::{MechanismOutput, StreamElement};
use crate::tree::{Admission, NodeId};

/// Everything needed to build a mechanism instance.
#[derive(Debug, Clone)]
pub struct MechanismConfig {
    pub horizon: u64,
    pub budget: PrivacyBudget,
    pub dim: usize,
    pub noise: NoiseSource,
    /// Forces every noise variance to zero. Test fixture only, not private.
    pub zero_noise: bool,
    /// Keep a log of every admitted node and its noise.
    pub record_nodes: bool,
}

impl MechanismConfig {
    /// Scalar stream, secure noise.
    pub fn new(horizon: u64, budget: PrivacyBudget) -> Self {
        Self {
            horizon,
            budget,
            dim: 1,
            noise: NoiseSource::secure(),
            zero_noise: false,
            record_nodes: false,
        }
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    pub fn with_noise(mut self, noise: NoiseSource) -> Self {
        self.noise = noise;
        self
    }

    /// Reproducible, non-private noise.
    pub fn seeded(self, seed: u64) -> Self {
        self.with_noise(NoiseSource::seeded(seed))
    }

    pub fn zero_noise(mut self) -> Self {
        self.zero_noise = true;
        self
    }

    pub fn record_nodes(mut self) -> Self {
        self.record_nodes = true;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidArgument("horizon must be at least 1".into()));
        }
        if self.dim == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        Ok(())
    }
}

/// A continual-counting mechanism consuming one element per step.
pub trait Mechanism: Send {
    fn name(&self) -> &'static str;

    /// Maximum number of elements this instance accepts.
    fn horizon(&self) -> u64;

    fn dim(&self) -> usize;

    /// Elements consumed so far.
    fn steps(&self) -> u64;

    /// Consumes `x_{t}` and releases the estimate of the prefix sum up to `t`.
    fn step(&mut self, x: &StreamElement) -> Result<MechanismOutput>;

    /// Stored noise terms (each `dim` floats wide).
    fn live_nodes(&self) -> usize;

    fn live_floats(&self) -> usize {
        self.live_nodes() * self.dim()
    }

    /// Analytic per-coordinate variance of the released estimate at step `t`.
    fn variance_at(&self, t: u64) -> Result<f64>;

    /// Tree internals for oracles; `None` for mechanisms without a tree.
    fn tree(&self) -> Option<&dyn TreeInspect> {
        None
    }
}

/// Read access to the tree behind a tree-based mechanism.
pub trait TreeInspect {
    fn height(&self) -> u32;

    /// Elements the full tree could hold (may exceed the configured horizon).
    fn tree_capacity(&self) -> u64;

    /// Path word of the leaf holding `x_t`.
    fn leaf_word(&self, t: u64) -> Result<PathWord>;

    /// Nodes whose noisy p-sums make up the most recent output, shortest prefix first.
    fn live_node_ids(&self) -> Vec<NodeId>;

    fn admissions(&self) -> Option<&[Admission]>;
}

pub(crate) fn check_element(
    x: &StreamElement,
    dim: usize,
    steps: u64,
    horizon: u64,
) -> Result<()> {
    if x.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x.dim(),
        });
    }
    if steps >= horizon {
        return Err(Error::Capacity { capacity: horizon });
    }
    Ok(())
}

/// Describes and builds one mechanism variant.
pub trait MechanismFactory: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    /// Per-coordinate variance of the output at step `t` for horizon `horizon`.
    fn analytic_variance(&self, horizon: u64, budget: PrivacyBudget, t: u64) -> Result<f64>;

    /// Variances for `t = 1..=horizon`.
    fn running_variance(&self, horizon: u64, budget: PrivacyBudget) -> Result<Vec<f64>> {
        (1..=horizon)
            .map(|t| self.analytic_variance(horizon, budget, t))
            .collect()
    }

    /// Largest variance over `1 <= t <= horizon`.
    fn max_variance(&self, horizon: u64, budget: PrivacyBudget) -> Result<f64> {
        Ok(self
            .running_variance(horizon, budget)?
            .into_iter()
            .fold(0.0, f64::max))
    }

    /// Peak number of stored floats over a full run, if known in closed form.
    fn peak_floats(&self, horizon: u64, dim: usize) -> Result<u128>;

    fn build(&self, config: MechanismConfig) -> Result<Box<dyn Mechanism>>;
}

/// Named mechanism factories.
pub struct Registry {
    entries: Vec<Box<dyn MechanismFactory>>,
}

impl Registry {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    /// Registry with every mechanism shipped in this crate.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(SmoothFactory));
        r.register(Box::new(BinaryFactory));
        r.register(Box::new(ToeplitzFactory));
        r.register(Box::new(NaiveOutputFactory));
        r.register(Box::new(NaiveInputFactory));
        r
    }

    /// Adds a factory, replacing any previous one of the same name.
    pub fn register(&mut self, factory: Box<dyn MechanismFactory>) {
        self.entries.retain(|f| f.name() != factory.name());
        self.entries.push(factory);
    }

    pub fn get(&self, name: &str) -> Result<&dyn MechanismFactory> {
        self.entries
            .iter()
            .find(|f| f.name() == name)
            .map(|f| f.as_ref())
            .ok_or_else(|| Error::UnknownMechanism(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.iter().map(|f| f.name())
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn MechanismFactory> {
        self.entries.iter().map(|f| f.as_ref())
    }

    pub fn build(&self, name: &str, config: MechanismConfig) -> Result<Box<dyn Mechanism>> {
        self.get(name)?.build(config)
    }
}

impl Default for Registry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}
