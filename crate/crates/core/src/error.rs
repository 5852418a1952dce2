use thiserror::Error;

/// Errors raised while building or evaluating the data model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tensor must have at least 2 modes, got {0}")]
    TooFewModes(usize),
    #[error("mode {mode} has dimension {dim}; every mode needs at least 2")]
    ModeTooSmall { mode: usize, dim: usize },
    #[error("entry {entry}: index {index:?} does not fit dims {dims:?}")]
    IndexOutOfRange {
        entry: usize,
        index: Vec<usize>,
        dims: Vec<usize>,
    },
    #[error("entry {entry}: negative coefficient {value}")]
    NegativeCoefficient { entry: usize, value: f64 },
    #[error("entry {entry}: coefficient {value} is not finite")]
    NonFiniteCoefficient { entry: usize, value: f64 },
    #[error("duplicate index {0:?}")]
    DuplicateIndex(Vec<usize>),
    #[error("component {component}: exponent vector has length {len}, expected {n}")]
    ExponentLength {
        component: usize,
        len: usize,
        n: usize,
    },
    #[error("component {component}: degree must be at least 1")]
    DegreeTooLow { component: usize },
    #[error("polynomial map needs at least one component")]
    EmptyMap,
    #[error("norm exponent p[{index}] = {value} must exceed 1")]
    NormExponent { index: usize, value: f64 },
    #[error("expected {expected} norm exponents, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("slot {slot} out of range for a {modes}-mode tensor")]
    SlotOutOfRange { slot: usize, modes: usize },
    #[error("coordinate {index} = {value} is not strictly positive")]
    NonPositive { index: usize, value: f64 },
    #[error("coordinate {index} = {value} is not finite")]
    NonFinite { index: usize, value: f64 },
    #[error("slice {index} of mode {mode} of the tensor is identically zero (0-based)")]
    VanishingSlice { mode: usize, index: usize },
    #[error("delta[{component}] = {delta} is below the component degree {degree}")]
    DeltaBelowDegree {
        component: usize,
        delta: f64,
        degree: usize,
    },
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("functional must be nonnegative and nonzero")]
    InvalidFunctional,
    #[error("functional must be strictly positive")]
    FunctionalNotPositive,
    #[error("psi^T F(x) vanished")]
    DegenerateNormalization,
    #[error("matrix has a negative entry at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize },
    #[error("psi^T u = {0}, expected 1")]
    NotNormalized(f64),
    #[error("block {0} is zero and cannot be normalized")]
    ZeroBlock(usize),
    #[error("polynomial map is not homogeneous")]
    NotHomogeneous,
}

pub type Result<T> = std::result::Result<T, Error>;
