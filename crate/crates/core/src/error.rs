use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("local dimension N must be at least 2, got {0}")]
    LocalDimTooSmall(u64),

    #[error("({l},{m},{k}) is not admissible: l+m-k is odd")]
    ParityViolation { l: usize, m: usize, k: usize },

    #[error("({l},{m},{k}) is not admissible: k must lie in [|l-m|, l+m]")]
    OutOfFusionRange { l: usize, m: usize, k: usize },

    #[error("dimension {dim} exceeds the cap of {cap} ({what})")]
    CapExceeded {
        what: &'static str,
        dim: u128,
        cap: usize,
    },

    #[error("invalid leg index {index} for an operator with {legs} legs")]
    InvalidLeg { index: usize, legs: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("leg structure {legs:?} does not match matrix dimension {dim}")]
    LegMismatch { legs: Vec<usize>, dim: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("operator has non-finite entries")]
    NonFinite,

    #[error("not a density matrix: {0}")]
    InvalidDensity(String),

    #[error("zero vector has no membership residual")]
    ZeroVector,

    #[error("negative radicand {0} in projection defect")]
    NegativeRadicand(String),

    #[error("channels are not compatible: {0}")]
    IncompatibleChannels(String),

    #[error("power-law fit needs at least 4 points, got {0}")]
    TooFewPoints(usize),

    #[error("power-law fit needs positive values, got {0}")]
    NonPositiveValue(f64),

    #[error("ensemble is invalid: {0}")]
    InvalidEnsemble(String),
}
