//! The smooth binary mechanism.
//!
//! Elements only go to leaves whose path has exactly `k = h/2` zeros (and so
//! `h - k` ones). `x_t` is stored in the leaf with path `w(t)`, the
//! `(t-1)`-th smallest such word, and the output at `t` is assembled from the
//! left children selected by the ones of `w(t+1)`; the leaves strictly between
//! `w(t)` and `w(t+1)` hold no data. Every output is therefore the exact count
//! plus exactly `h - k` independent node noises, each calibrated for
//! sensitivity `k`, which makes the error identically distributed in `t`.
//!
//! Moving from query word `w(t)` to `w(t+1)` replaces exactly the nodes of the
//! lowest block of ones of `w(t)`: if `w(t) = U 0 1^n 0^m` then
//! `w(t+1) = U 1 0^(m+1) 1^(n-1)`. The successor is computed with the
//! same-popcount bit trick, so a step costs `O(n)` and `O(1)` on average.

use crate::bitcodec::{
    balanced_unrank, binomial, choose_height, next_balanced, trailing_ones_block, PathWord,
    TreeGeometry,
};
use crate::error::{Error, Result};
use crate::mechanism::{check_element, Mechanism, MechanismConfig, MechanismFactory, TreeInspect};
use crate::noise::NoiseSource;
use crate::privacy::{calibrate_gaussian, NoiseScale, PrivacyBudget};
use crate::stream::{MechanismOutput, StreamElement};
use crate::tree::{Admission, NodeId, NodeStack};

/// Variance `(h - k) · k / (2ρ)` of every output, with `h = choose_height(T)` and `k = h/2`.
pub fn smooth_variance(horizon: u64, budget: PrivacyBudget) -> Result<f64> {
    let geom = choose_height(horizon)?;
    geometry_variance(geom, budget)
}

fn geometry_variance(geom: TreeGeometry, budget: PrivacyBudget) -> Result<f64> {
    let node = calibrate_gaussian(budget, f64::from(geom.zeros()))?;
    Ok(f64::from(geom.ones()) * node.variance())
}

/// Total node replacements to release all `C(2k, k) - 1` prefix sums of a full
/// tree of height `2k`: `C(2k+1, k+1) - (2k+1)`.
pub fn replacement_cost_total(k: u32) -> Result<u128> {
    if k == 0 || k > 32 {
        return Err(Error::InvalidArgument(format!(
            "k must be in 1..=32, got {k}"
        )));
    }
    Ok(binomial(2 * k + 1, k + 1) - u128::from(2 * k + 1))
}

/// Upper bound `2 · C(2k, k)` on [`replacement_cost_total`].
pub fn replacement_cost_bound(k: u32) -> u128 {
    2 * binomial(2 * k, k)
}

#[derive(Debug)]
pub struct SmoothMechanism {
    geom: TreeGeometry,
    horizon: u64,
    /// `w(t+1)`, the word behind the latest output; `None` before the first step.
    query: Option<PathWord>,
    scale: NoiseScale,
    noise: NoiseSource,
    stack: NodeStack,
    t: u64,
    budget: PrivacyBudget,
    fresh: Vec<f64>,
}

impl SmoothMechanism {
    /// Balanced tree from [`choose_height`] with `k = h/2`.
    pub fn new(config: MechanismConfig) -> Result<Self> {
        config.validate()?;
        let geom = choose_height(config.horizon)?;
        Self::with_geometry(config, geom)
    }

    /// Any geometry, including `zeros != height / 2`. The horizon must fit in
    /// the geometry's capacity.
    pub fn with_geometry(config: MechanismConfig, geom: TreeGeometry) -> Result<Self> {
        config.validate()?;
        if config.horizon > geom.capacity() {
            return Err(Error::InvalidArgument(format!(
                "horizon {} exceeds the capacity {} of a height-{} tree with {} zeros",
                config.horizon,
                geom.capacity(),
                geom.height(),
                geom.zeros()
            )));
        }
        // Each element sits in at most `zeros` stored p-sums.
        let scale = if config.zero_noise {
            NoiseScale::ZERO
        } else {
            calibrate_gaussian(config.budget, f64::from(geom.zeros()))?
        };
        Ok(Self {
            geom,
            horizon: config.horizon,
            query: None,
            scale,
            noise: config.noise,
            stack: NodeStack::new(config.dim, geom.ones() as usize, config.record_nodes),
            t: 0,
            budget: config.budget,
            fresh: vec![0.0; config.dim],
        })
    }

    pub fn geometry(&self) -> TreeGeometry {
        self.geom
    }

    pub fn noise_scale(&self) -> NoiseScale {
        self.scale
    }

    /// `w(t+1)` for the latest step `t`.
    pub fn query_word(&self) -> Option<PathWord> {
        self.query
    }

    /// Admits fresh nodes for the lowest `count` ones of `query`, highest first.
    fn admit_low_ones(&mut self, step: u64, query: PathWord, count: u32) {
        let mut positions = [0u32; 64];
        let mut rest = query.bits();
        for slot in positions.iter_mut().take(count as usize) {
            *slot = rest.trailing_zeros();
            rest &= rest - 1;
        }
        for &bit in positions[..count as usize].iter().rev() {
            self.noise.fill_gaussian(self.scale, &mut self.fresh);
            self.stack
                .admit(step, NodeId::from_query_bit(query, bit), &self.fresh);
        }
    }
}

impl Mechanism for SmoothMechanism {
    fn name(&self) -> &'static str {
        "smooth"
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
        let (query, retired, admitted) = match self.query {
            None => {
                let query = next_balanced(self.geom.first_word())?;
                (query, 0, self.geom.ones())
            }
            Some(prev) => {
                let n = trailing_ones_block(prev)?;
                (next_balanced(prev)?, n, n)
            }
        };
        self.stack.retire(retired as usize);
        debug_assert!(self.stack.ids().iter().all(|id| id.is_prefix_of(query)));
        self.admit_low_ones(t, query, admitted);
        debug_assert_eq!(self.stack.len() as u32, self.geom.ones());
        self.stack.add_element(x.as_slice());
        self.query = Some(query);
        self.t = t;
        Ok(MechanismOutput {
            estimate: self.stack.estimate(),
            step: t,
            replacements: retired as usize,
            admitted: admitted as usize,
            live_nodes: self.stack.len(),
        })
    }

    fn live_nodes(&self) -> usize {
        self.stack.len()
    }

    fn variance_at(&self, t: u64) -> Result<f64> {
        if t == 0 || t > self.horizon {
            return Err(Error::OutOfRange {
                what: "time step",
                value: t.into(),
                bound: u128::from(self.horizon) + 1,
            });
        }
        geometry_variance(self.geom, self.budget)
    }

    fn tree(&self) -> Option<&dyn TreeInspect> {
        Some(self)
    }
}

impl TreeInspect for SmoothMechanism {
    fn height(&self) -> u32 {
        self.geom.height()
    }

    fn tree_capacity(&self) -> u64 {
        self.geom.capacity()
    }

    fn leaf_word(&self, t: u64) -> Result<PathWord> {
        if t == 0 || t > self.geom.capacity() {
            return Err(Error::OutOfRange {
                what: "time step",
                value: t.into(),
                bound: u128::from(self.geom.capacity()) + 1,
            });
        }
        balanced_unrank(self.geom, t - 1)
    }

    fn live_node_ids(&self) -> Vec<NodeId> {
        self.stack.ids().to_vec()
    }

    fn admissions(&self) -> Option<&[Admission]> {
        self.stack.admissions()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SmoothFactory;

impl MechanismFactory for SmoothFactory {
    fn name(&self) -> &'static str {
        "smooth"
    }

    fn description(&self) -> &'static str {
        "smooth binary mechanism; identically distributed error at every step"
    }

    fn analytic_variance(&self, horizon: u64, budget: PrivacyBudget, t: u64) -> Result<f64> {
        if t == 0 || t > horizon {
            return Err(Error::OutOfRange {
                what: "time step",
                value: t.into(),
                bound: u128::from(horizon) + 1,
            });
        }
        smooth_variance(horizon, budget)
    }

    fn max_variance(&self, horizon: u64, budget: PrivacyBudget) -> Result<f64> {
        smooth_variance(horizon, budget)
    }

    fn peak_floats(&self, horizon: u64, dim: usize) -> Result<u128> {
        Ok(u128::from(choose_height(horizon)?.ones()) * dim as u128)
    }

    fn build(&self, config: MechanismConfig) -> Result<Box<dyn Mechanism>> {
        Ok(Box::new(SmoothMechanism::new(config)?))
    }
}
