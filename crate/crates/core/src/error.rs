use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: expected at least 3 tab-separated fields (user, resource, tag), found {found}")]
    MalformedLine { line: usize, found: usize },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("{kind} index {index} out of range (size {size})")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        size: usize,
    },

    #[error("tag {0} is unused (labels no resource)")]
    TagUnused(usize),

    #[error("unknown tag {0:?}")]
    UnknownTag(String),

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "matrix size {size} exceeds the dense iteration limit {limit}; reduce the corpus to desk scale or raise size_limit"
    )]
    SizeLimitExceeded { size: usize, limit: usize },

    #[error("no evaluable queries: all {0} test bookmarks were skipped")]
    NoEvaluableQueries(usize),

    #[error("at least 2 bookmarks are required to split, found {0}")]
    TooFewBookmarks(usize),

    #[error("infeasible synthetic spec: {0}")]
    InfeasibleSpec(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
