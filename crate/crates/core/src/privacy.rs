//! zCDP budgets and Gaussian noise calibration.

use crate::error::{Error, Result};

/// A ρ-zCDP privacy budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyBudget {
    rho: f64,
}

impl PrivacyBudget {
    pub fn new(rho: f64) -> Result<Self> {
        if rho.is_finite() && rho > 0.0 {
            Ok(Self { rho })
        } else {
            Err(Error::InvalidBudget(rho))
        }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// The ε of the (ε, δ)-DP guarantee implied by ρ-zCDP, `ρ + 2·sqrt(ρ·ln(1/δ))`.
    ///
    /// Convenience conversion only; nothing in this crate accounts in (ε, δ).
    pub fn approx_dp_epsilon(&self, delta: f64) -> Result<f64> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        Ok(self.rho + 2.0 * (self.rho * (1.0 / delta).ln()).sqrt())
    }
}

/// Per-node Gaussian variance σ² = Δ²/(2ρ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseScale {
    variance: f64,
}

impl NoiseScale {
    pub const ZERO: NoiseScale = NoiseScale { variance: 0.0 };

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.variance == 0.0
    }
}

/// Noise scale for the Gaussian mechanism on a query with squared ℓ2-sensitivity
/// `sensitivity_sq` under `budget`.
pub fn calibrate_gaussian(budget: PrivacyBudget, sensitivity_sq: f64) -> Result<NoiseScale> {
    if !(budget.rho.is_finite() && budget.rho > 0.0) {
        return Err(Error::InvalidBudget(budget.rho));
    }
    if !(sensitivity_sq.is_finite() && sensitivity_sq >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "squared sensitivity must be a nonnegative finite number, got {sensitivity_sq}"
        )));
    }
    Ok(NoiseScale {
        variance: sensitivity_sq / (2.0 * budget.rho),
    })
}
