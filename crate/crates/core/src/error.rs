use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("Fock space dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("pump amplitude |epsilon| = {epsilon} is not below the diffusive rate gamma = {gamma}")]
    AboveThreshold { epsilon: f64, gamma: f64 },

    #[error("no (alpha+, alpha-) pairing cancels the squeezing terms; best residual {best_residual:e}")]
    NoValidPairing { best_residual: f64 },
}
