//! Error type shared by all modules.

use alloc::string::String;

/// Errors raised by constructors and operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid MDP: {0}")]
    InvalidMdp(String),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid data distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid feature map: {0}")]
    InvalidFeatureMap(String),

    #[error("invalid instance parameters: {0}")]
    InvalidInstance(String),

    #[error("dataset must contain at least one sample per level")]
    EmptyDataset,

    #[error("data distribution support lies outside the MDP at level {level}: state {state}, action {action}")]
    SupportMismatch {
        level: usize,
        state: usize,
        action: usize,
    },

    #[error("singular empirical design at level {level} with lambda = 0 (min eigenvalue {sigma_min:.3e} vs trace {trace:.3e})")]
    SingularDesign {
        level: usize,
        sigma_min: f64,
        trace: f64,
    },

    #[error("operation requires a deterministic policy")]
    PolicyNotDeterministic,

    #[error("regularization must satisfy {0}")]
    InvalidLambda(&'static str),

    #[error("realizability precondition violated at level {level}: sup-norm residual {residual:.3e} >= 1e-8")]
    RealizabilityViolated { level: usize, residual: f64 },

    #[error("matrix is not symmetric positive semidefinite: {0}")]
    NotPsd(&'static str),

    #[error("level index {level} out of range {min}..={max}")]
    LevelOutOfRange {
        level: usize,
        min: usize,
        max: usize,
    },
}
