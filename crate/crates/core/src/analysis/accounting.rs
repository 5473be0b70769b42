use std::collections::HashSet;

use crate::error::Result;
use crate::mechanism::{MechanismConfig, MechanismFactory};
use crate::privacy::PrivacyBudget;
use crate::stream::{MechanismOutput, StreamElement};
use crate::tree::{Admission, NodeId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccountingReport {
    pub steps: u64,
    pub total_replacements: u64,
    pub total_admitted: u64,
    pub max_live_nodes: usize,
    pub max_live_floats: usize,
    /// `total_replacements / steps`.
    pub avg_replacements: f64,
}

/// Streaming aggregation of [`MechanismOutput`] counters.
#[derive(Debug, Clone, Default)]
pub struct Accountant {
    steps: u64,
    replacements: u64,
    admitted: u64,
    max_live: usize,
    max_floats: usize,
}

impl Accountant {
    pub fn record(&mut self, out: &MechanismOutput) {
        self.steps += 1;
        self.replacements += out.replacements as u64;
        self.admitted += out.admitted as u64;
        self.max_live = self.max_live.max(out.live_nodes);
        self.max_floats = self.max_floats.max(out.live_nodes * out.estimate.len());
    }

    pub fn report(&self) -> AccountingReport {
        AccountingReport {
            steps: self.steps,
            total_replacements: self.replacements,
            total_admitted: self.admitted,
            max_live_nodes: self.max_live,
            max_live_floats: self.max_floats,
            avg_replacements: if self.steps == 0 {
                0.0
            } else {
                self.replacements as f64 / self.steps as f64
            },
        }
    }
}

pub fn accounting_report(outputs: &[MechanismOutput]) -> AccountingReport {
    let mut acc = Accountant::default();
    for out in outputs {
        acc.record(out);
    }
    acc.report()
}

/// Runs `factory` without noise over `horizon` steps of dimension `dim` and
/// aggregates its counters.
pub fn run_accounting(
    factory: &dyn MechanismFactory,
    horizon: u64,
    dim: usize,
) -> Result<AccountingReport> {
    let config = MechanismConfig::new(horizon, PrivacyBudget::new(1.0)?)
        .with_dim(dim)
        .zero_noise();
    let mut m = factory.build(config)?;
    let x = StreamElement::zero(dim);
    let mut acc = Accountant::default();
    for _ in 0..horizon {
        acc.record(&m.step(&x)?);
    }
    Ok(acc.report())
}

/// Node ids admitted more than once, in order of their second admission.
pub fn duplicate_admissions(log: &[Admission]) -> Vec<NodeId> {
    let mut seen = HashSet::with_capacity(log.len());
    log.iter()
        .filter(|a| !seen.insert(a.node))
        .map(|a| a.node)
        .collect()
}
