//! Sensitivity by flipping one stream element.
//!
//! The chosen mechanism is run with noise disabled over the full capacity of
//! the tree it picks for horizon `T`, once on the zero stream and once on the
//! stream that is 1 only at `t`. The leaves it reports for each element give
//! the contents of every stored p-sum, i.e. of every left child in the tree.
//! Each zero-noise output is also checked against the sum of the p-sums of
//! the nodes the mechanism reports as live.

use std::collections::HashSet;

use crate::bitcodec::PathWord;
use crate::error::{Error, Result};
use crate::mechanism::{MechanismConfig, MechanismFactory};
use crate::privacy::PrivacyBudget;
use crate::stream::StreamElement;
use crate::tree::NodeId;

/// Largest tree height the brute-force oracle enumerates.
const MAX_ORACLE_HEIGHT: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipReport {
    /// Stored p-sums (all left children of the tree) changed by the flip.
    pub stored: usize,
    /// Changed p-sums that some output actually uses.
    pub released: usize,
}

struct TreeRun {
    height: u32,
    leaves: Vec<PathWord>,
    values: Vec<f64>,
    released: HashSet<NodeId>,
}

impl TreeRun {
    fn psum(&self, node: NodeId) -> f64 {
        self.leaves
            .iter()
            .zip(&self.values)
            .filter(|(leaf, _)| node.covers(**leaf))
            .map(|(_, v)| v)
            .sum()
    }
}

fn all_nodes(height: u32) -> impl Iterator<Item = NodeId> {
    (1..=height).flat_map(|len| {
        (0..1u64 << (len - 1)).filter_map(move |half| NodeId::new(2 * half + 1, len))
    })
}

fn run_tree(factory: &dyn MechanismFactory, horizon: u64, flip_at: Option<u64>) -> Result<TreeRun> {
    let budget = PrivacyBudget::new(1.0)?;
    let probe = factory.build(MechanismConfig::new(horizon, budget).zero_noise())?;
    let tree = probe.tree().ok_or_else(|| {
        Error::InvalidArgument(format!("mechanism `{}` has no tree", factory.name()))
    })?;
    let (height, capacity) = (tree.height(), tree.tree_capacity());
    if height > MAX_ORACLE_HEIGHT {
        return Err(Error::InvalidArgument(format!(
            "flip oracle enumerates 2^h nodes; height {height} exceeds {MAX_ORACLE_HEIGHT}"
        )));
    }
    let mut m = factory.build(MechanismConfig::new(capacity, budget).zero_noise())?;
    let mut run = TreeRun {
        height,
        leaves: Vec::with_capacity(capacity as usize),
        values: Vec::with_capacity(capacity as usize),
        released: HashSet::new(),
    };
    for s in 1..=capacity {
        let x = if flip_at == Some(s) { 1.0 } else { 0.0 };
        let out = m.step(&StreamElement::scalar(x)?)?;
        let tree = m.tree().expect("tree mechanism");
        run.leaves.push(tree.leaf_word(s)?);
        run.values.push(x);
        let live = tree.live_node_ids();
        let decomposed: f64 = live.iter().map(|&n| run.psum(n)).sum();
        if decomposed != out.estimate[0] {
            return Err(Error::Invariant(format!(
                "{}: output {} at step {s} differs from its node decomposition {decomposed}",
                factory.name(),
                out.estimate[0]
            )));
        }
        run.released.extend(live);
    }
    Ok(run)
}

/// Both flip counts for element `t` of horizon `horizon`.
pub fn flip_sensitivity_report(
    factory: &dyn MechanismFactory,
    horizon: u64,
    t: u64,
) -> Result<FlipReport> {
    if t == 0 || t > horizon {
        return Err(Error::OutOfRange {
            what: "time step",
            value: t.into(),
            bound: u128::from(horizon) + 1,
        });
    }
    let base = run_tree(factory, horizon, None)?;
    let flipped = run_tree(factory, horizon, Some(t))?;
    let mut report = FlipReport {
        stored: 0,
        released: 0,
    };
    for node in all_nodes(base.height) {
        if base.psum(node) != flipped.psum(node) {
            report.stored += 1;
            if base.released.contains(&node) || flipped.released.contains(&node) {
                report.released += 1;
            }
        }
    }
    Ok(report)
}

/// Number of stored p-sums that change when `x_t` flips from 0 to 1; the
/// squared ℓ2-sensitivity contributed by `x_t`.
pub fn flip_sensitivity(factory: &dyn MechanismFactory, horizon: u64, t: u64) -> Result<usize> {
    Ok(flip_sensitivity_report(factory, horizon, t)?.stored)
}

/// Like [`flip_sensitivity`], counting only p-sums used by some output.
pub fn released_flip_sensitivity(
    factory: &dyn MechanismFactory,
    horizon: u64,
    t: u64,
) -> Result<usize> {
    Ok(flip_sensitivity_report(factory, horizon, t)?.released)
}
