//! Oracles and instrumentation for checking the mechanisms against their
//! analytic behaviour.

mod accounting;
mod empirical;
mod flip;
pub mod oracle;

pub use accounting::{accounting_report, duplicate_admissions, run_accounting, AccountingReport, Accountant};
pub use empirical::{
    chi_square_band, empirical_variance, EmpiricalVariance, VarianceBand, MIN_TRIALS,
    TRIAL_CHUNK,
};
pub use flip::{flip_sensitivity, flip_sensitivity_report, released_flip_sensitivity, FlipReport};
