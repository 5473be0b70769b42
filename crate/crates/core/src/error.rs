use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid privacy budget: rho must be a positive finite number, got {0}")]
    InvalidBudget(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} {value} is out of range (must be below {bound})")]
    OutOfRange {
        what: &'static str,
        value: u128,
        bound: u128,
    },

    #[error("word {bits:#b} of width {width} has {ones} ones, expected {expected}")]
    Unbalanced {
        bits: u64,
        width: u32,
        ones: u32,
        expected: u32,
    },

    #[error("no larger word with the same popcount fits in {width} bits")]
    Exhausted { width: u32 },

    #[error("mechanism capacity of {capacity} steps exhausted")]
    Capacity { capacity: u64 },

    #[error("horizon {horizon} needs a tree wider than 64 bits")]
    WidthOverflow { horizon: u64 },

    #[error("stream element has dimension {got}, mechanism expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("stream element rejected: {0}")]
    InvalidElement(String),

    #[error("unknown mechanism `{0}`")]
    UnknownMechanism(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}
