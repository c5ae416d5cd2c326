use thiserror::Error;

/// Errors raised by tensor algebra, kernels and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid shape {shape:?}: {reason}")]
    InvalidShape { shape: Vec<usize>, reason: String },

    #[error("data length {len} does not match shape {shape:?} (expected {expected})")]
    LengthMismatch {
        shape: Vec<usize>,
        len: usize,
        expected: usize,
    },

    #[error("non-finite value at linear index {index}")]
    NonFinite { index: usize },

    #[error("mode {mode} out of range for order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("index {index:?} out of range for shape {shape:?}")]
    IndexOutOfRange { index: Vec<usize>, shape: Vec<usize> },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("matrix of size {rows}x{cols} cannot be folded into shape {shape:?} along {kind}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        shape: Vec<usize>,
        kind: String,
    },

    #[error("invalid tensor-ring cores: {0}")]
    InvalidCores(String),

    #[error("rank vector of length {ranks} is incompatible with order-{order} tensor")]
    RankOrderMismatch { ranks: usize, order: usize },

    #[error("SVD failed: {0}")]
    SvdFailure(String),

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("observation mask is empty")]
    EmptyMask,

    #[error("reference tensor has zero norm on the requested scope")]
    ZeroNormReference,

    #[error("solver diverged at iteration {iteration}: relative change {rel_change:e} above {threshold:e} for {streak} consecutive iterations")]
    Diverged {
        iteration: usize,
        rel_change: f64,
        threshold: f64,
        streak: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
