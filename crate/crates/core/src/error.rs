use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by a series that is zero to known precision")]
    ZeroDivision,

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("evaluation outside the domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular to known precision")]
    SingularMatrix,

    #[error("weights are not normalizable: {0}")]
    UnnormalizableWeights(String),

    #[error("torus rank {rank} exceeds the supported maximum {max}")]
    RankTooLarge { rank: usize, max: usize },

    #[error("torus does not commute with the arc")]
    NonCommutingTorus,

    #[error("norm functional is not proper: no growth along direction {direction:?}")]
    NotProper { direction: Vec<String> },

    #[error("representation dimension {dim} exceeds the cap {cap}")]
    DimensionOverflow { dim: u128, cap: u128 },

    #[error("minimization did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
