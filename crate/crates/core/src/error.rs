use thiserror::Error;

/// Errors produced by the `relmap` library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("label {label} does not fit into {n_bits} bits")]
    LabelOutOfRange { label: u32, n_bits: u32 },

    #[error("not a permutation of the {size} labels: {reason}")]
    NotAPermutation { size: usize, reason: String },

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("LLR value is NaN")]
    NanInput,

    #[error("{0}")]
    SearchSpaceTooLarge(String),

    #[error("malformed mapping: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
