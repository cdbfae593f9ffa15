use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {what} (expected {expected}, found {found})")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("probability row off the simplex at sample {row}, model {model}: deviation {deviation:.3e}")]
    SimplexViolation {
        row: usize,
        model: usize,
        deviation: f64,
    },

    #[error("non-finite value at {location}")]
    NonFinite { location: String },

    #[error("split would leave the {partition} partition empty")]
    EmptyPartition { partition: &'static str },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("action set has a rejection action but no rejection spec was supplied")]
    MissingRejectionSpec,

    #[error("expected a {expected} task")]
    KindMismatch { expected: &'static str },

    #[error("leaf contains no samples")]
    EmptyLeaf,

    #[error("too few samples: {n} < min_leaf {min_leaf}")]
    TooFewSamples { n: usize, min_leaf: usize },

    #[error("instance too large for exhaustive search: {0}")]
    InstanceTooLarge(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("AUC is undefined when only one class is present")]
    DegenerateAuc,

    #[error("combination is defined for exactly two trees, got {0}")]
    UnsupportedArity(usize),

    #[error("drag coefficient must be positive")]
    ZeroDrag,

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn config(message: impl Into<String>) -> Self {
        Error::InvalidConfig(message.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
