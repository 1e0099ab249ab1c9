use thiserror::Error;

/// Errors produced by the detection library.
#[derive(Debug, Error)]
pub enum IncdetError {
    /// Invalid configuration (empty anchor lists, bad thresholds, dimension
    /// mismatches between a config and the data it is applied to).
    #[error("configuration error: {0}")]
    Config(String),

    /// Two tensors or collections that must be aligned are not.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A loss term evaluated to NaN or infinity. Carries the term name.
    #[error("non-finite loss term `{term}`: {value}")]
    NonFiniteLoss { term: String, value: f64 },

    /// Dataset or manifest level problem.
    #[error("dataset error: {0}")]
    Dataset(String),

    /// Checkpoint file is missing, truncated or from an unknown version.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, IncdetError>;
