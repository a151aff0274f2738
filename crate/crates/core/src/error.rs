use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("behavior is signaling: {0}")]
    Signaling(String),

    #[error("{what} count {count} exceeds cap {cap}")]
    ResourceCap {
        what: &'static str,
        count: u128,
        cap: u128,
    },

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("missing metadata: {0}")]
    MissingMetadata(String),

    #[error("input outside validity range: {0}")]
    OutOfRange(String),

    #[error("settings never observed: {0:?}")]
    ZeroCount(Vec<usize>),

    #[error("linear program unbounded")]
    Unbounded,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
