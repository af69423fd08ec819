use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    #[error("ragged or mis-sized input: expected {expected} values, got {actual}")]
    MisSized { expected: usize, actual: usize },

    #[error("shape must be non-empty")]
    EmptyShape,

    #[error("shape entry {position} is zero; every level needs at least one repetition")]
    ZeroCount { position: usize },

    #[error("value at flat index {index} is not finite")]
    NonFinite { index: usize },

    #[error("level {level} out of range (valid: {min}..={max})")]
    LevelOutOfRange {
        level: usize,
        min: usize,
        max: usize,
    },

    #[error("variance undefined at level {level}: it has only one repetition")]
    UndefinedVariance { level: usize },

    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),

    #[error("probability must lie strictly between 0 and 1, got {0}")]
    InvalidProbability(f64),

    #[error("degrees of freedom must be at least 1")]
    InvalidDegreesOfFreedom,

    #[error("systems have incompatible shapes: old {old:?}, new {new:?}")]
    ShapeMismatch { old: Vec<usize>, new: Vec<usize> },

    #[error("denominator mean not significantly nonzero: unbounded interval")]
    UnboundedInterval,

    #[error("threshold must be non-negative, got {0}")]
    NegativeThreshold(f64),

    #[error("no samples")]
    EmptySamples,

    #[error("degenerate denominator in bootstrap iteration {iteration}: resampled old-system mean is zero")]
    DegenerateDenominator { iteration: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("nonpositive variance at retained level {level}; drop the level first")]
    NonpositiveVariance { level: usize },

    #[error("cost c{below} is zero while c{level} is not; count ratio undefined")]
    CostDomain { level: usize, below: usize },

    #[error("budget {budget} cannot pay for two top-level repetitions (each costs {unit_cost})")]
    InfeasibleBudget { budget: f64, unit_cost: f64 },

    #[error("top level has {available} groups, need at least {required}")]
    InsufficientGroups { available: usize, required: usize },
}
