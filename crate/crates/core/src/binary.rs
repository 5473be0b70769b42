//! The classic binary mechanism, storing left children only.
//!
//! `x_t` sits in the leaf with path `bin(t - 1)` of a tree of height
//! `⌈log2(T + 1)⌉`, and the output at `t` adds one noisy p-sum per set bit
//! of `bin(t)`. Only the nodes of the current output are kept; moving from
//! `t - 1` to `t` retires the nodes of the trailing ones of `t - 1` and admits
//! a single new node.

use crate::bitcodec::PathWord;
use crate::error::{Error, Result};
use crate::mechanism::{check_element, Mechanism, MechanismConfig, MechanismFactory, TreeInspect};
use crate::noise::NoiseSource;
use crate::privacy::{calibrate_gaussian, NoiseScale, PrivacyBudget};
use crate::stream::{MechanismOutput, StreamElement};
use crate::tree::{Admission, NodeId, NodeStack};

/// `⌈log2(T + 1)⌉`, the height needed for `T` left-child prefix sums.
pub fn binary_height(horizon: u64) -> Result<u32> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    Ok(u64::BITS - horizon.leading_zeros())
}

/// Exact variance `⌈log2(T + 1)⌉ · popcount(t) / (2ρ)` of the output at `t`.
pub fn binary_variance(horizon: u64, budget: PrivacyBudget, t: u64) -> Result<f64> {
    let h = binary_height(horizon)?;
    if t == 0 || t > horizon {
        return Err(Error::OutOfRange {
            what: "time step",
            value: t.into(),
            bound: u128::from(horizon) + 1,
        });
    }
    let node = calibrate_gaussian(budget, f64::from(h))?;
    Ok(node.variance() * f64::from(t.count_ones()))
}

/// Largest `popcount(t)` for `1 <= t <= horizon`.
fn max_popcount_upto(horizon: u64) -> u32 {
    let below_top = u64::BITS - horizon.leading_zeros() - 1;
    horizon.count_ones().max(below_top)
}

#[derive(Debug)]
pub struct BinaryMechanism {
    height: u32,
    horizon: u64,
    scale: NoiseScale,
    noise: NoiseSource,
    stack: NodeStack,
    t: u64,
    budget: PrivacyBudget,
    fresh: Vec<f64>,
}

impl BinaryMechanism {
    pub fn new(config: MechanismConfig) -> Result<Self> {
        config.validate()?;
        let height = binary_height(config.horizon)?;
        // Each element sits in at most `height` stored p-sums.
        let scale = if config.zero_noise {
            NoiseScale::ZERO
        } else {
            calibrate_gaussian(config.budget, f64::from(height))?
        };
        Ok(Self {
            height,
            horizon: config.horizon,
            scale,
            noise: config.noise,
            stack: NodeStack::new(config.dim, height as usize, config.record_nodes),
            t: 0,
            budget: config.budget,
            fresh: vec![0.0; config.dim],
        })
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn noise_scale(&self) -> NoiseScale {
        self.scale
    }
}

impl Mechanism for BinaryMechanism {
    fn name(&self) -> &'static str {
        "binary"
    }

    fn horizon(&self) -> u64 {
        self.horizon
    }

    fn dim(&self) -> usize {
        self.stack.dim()
    }

    fn steps(&self) -> u64 {
        self.t
    }

    fn step(&mut self, x: &StreamElement) -> Result<MechanismOutput> {
        check_element(x, self.dim(), self.t, self.horizon)?;
        let t = self.t + 1;
        let retired = (t - 1).trailing_ones() as usize;
        self.stack.retire(retired);
        let query = PathWord::from_raw(t, self.height);
        let node = NodeId::from_query_bit(query, t.trailing_zeros());
        self.noise.fill_gaussian(self.scale, &mut self.fresh);
        self.stack.admit(t, node, &self.fresh);
        self.stack.add_element(x.as_slice());
        self.t = t;
        Ok(MechanismOutput {
            estimate: self.stack.estimate(),
            step: t,
            replacements: retired,
            admitted: 1,
            live_nodes: self.stack.len(),
        })
    }

    fn live_nodes(&self) -> usize {
        self.stack.len()
    }

    fn variance_at(&self, t: u64) -> Result<f64> {
        binary_variance(self.horizon, self.budget, t)
    }

    fn tree(&self) -> Option<&dyn TreeInspect> {
        Some(self)
    }
}

impl TreeInspect for BinaryMechanism {
    fn height(&self) -> u32 {
        self.height
    }

    fn tree_capacity(&self) -> u64 {
        if self.height == 64 {
            u64::MAX
        } else {
            (1 << self.height) - 1
        }
    }

    fn leaf_word(&self, t: u64) -> Result<PathWord> {
        if t == 0 || t > self.tree_capacity() {
            return Err(Error::OutOfRange {
                what: "time step",
                value: t.into(),
                bound: u128::from(self.tree_capacity()) + 1,
            });
        }
        PathWord::new(t - 1, self.height)
    }

    fn live_node_ids(&self) -> Vec<NodeId> {
        self.stack.ids().to_vec()
    }

    fn admissions(&self) -> Option<&[Admission]> {
        self.stack.admissions()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BinaryFactory;

impl MechanismFactory for BinaryFactory {
    fn name(&self) -> &'static str {
        "binary"
    }

    fn description(&self) -> &'static str {
        "binary tree mechanism; variance follows the ones of bin(t)"
    }

    fn analytic_variance(&self, horizon: u64, budget: PrivacyBudget, t: u64) -> Result<f64> {
        binary_variance(horizon, budget, t)
    }

    fn max_variance(&self, horizon: u64, budget: PrivacyBudget) -> Result<f64> {
        let h = binary_height(horizon)?;
        let node = calibrate_gaussian(budget, f64::from(h))?;
        Ok(node.variance() * f64::from(max_popcount_upto(horizon)))
    }

    fn peak_floats(&self, horizon: u64, dim: usize) -> Result<u128> {
        Ok(u128::from(binary_height(horizon)?) * dim as u128)
    }

    fn build(&self, config: MechanismConfig) -> Result<Box<dyn Mechanism>> {
        Ok(Box::new(BinaryMechanism::new(config)?))
    }
}
