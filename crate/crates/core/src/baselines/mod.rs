//! Comparison mechanisms: the two naive mechanisms and the Toeplitz
//! square-root factorization of the prefix-sum matrix.

mod naive;
mod toeplitz;

pub use naive::{
    naive_input_variance, naive_output_variance, NaiveInputFactory, NaiveInputMechanism,
    NaiveOutputFactory, NaiveOutputMechanism,
};
pub use toeplitz::{
    matrix_variance, toeplitz_coeffs, ToeplitzFactor, ToeplitzFactory, ToeplitzMechanism,
};
