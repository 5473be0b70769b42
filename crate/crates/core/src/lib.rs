//! Differentially private continual counting.
//!
//! The centrepiece is [`smooth::SmoothMechanism`], a variant of the binary tree
//! mechanism that stores stream elements only in leaves whose path has equally
//! many zeros and ones. Every released prefix sum is then the true count plus
//! the same number of Gaussian noise terms, so the error is identically
//! distributed over time, while each step costs amortized constant time and
//! the state stays logarithmic in the horizon.
//!
//! The classic [`binary::BinaryMechanism`] and the baselines in [`baselines`]
//! implement the same [`Mechanism`] trait and are listed by name in a
//! [`Registry`]. [`analysis`] holds the oracles used to check them.

pub mod analysis;
pub mod baselines;
pub mod binary;
pub mod bitcodec;
mod error;
pub mod mechanism;
pub mod noise;
pub mod privacy;
pub mod smooth;
pub mod stream;
pub mod tree;

pub use error::{Error, Result};
pub use mechanism::{Mechanism, MechanismConfig, MechanismFactory, Registry, TreeInspect};
pub use noise::{sample_noise, NoiseSource};
pub use privacy::{calibrate_gaussian, NoiseScale, PrivacyBudget};
pub use stream::{MechanismOutput, StreamElement};
