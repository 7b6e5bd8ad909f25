use thiserror::Error;

/// Violations of the model's input invariants.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("{name} must be at least 1")]
    ZeroDimension { name: &'static str },
    #[error("buffer_depth must be at least 3, got {0}")]
    BufferTooShallow(u64),
    #[error("num_sms must be at least 1")]
    NoSms,
    #[error("{0} must be strictly positive")]
    NonPositiveThroughput(&'static str),
    #[error("stage count must be at least 1")]
    NoStages,
    #[error("tile times must be strictly positive")]
    ZeroTileTime,
    #[error("{0} must be nonnegative, got {1}")]
    NegativeLatency(&'static str, String),
    #[error("search space candidates for {0} are empty")]
    EmptySearchSpace(&'static str),
    #[error("search space candidates for {0} contain 0")]
    ZeroCandidate(&'static str),
}
