use thiserror::Error;

/// Errors produced anywhere in the embedding pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("input contains no edges")]
    EmptyInput,

    #[error("node {node} out of range for graph with {count} nodes")]
    NodeOutOfRange { node: usize, count: usize },

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("unknown node type `{0}`")]
    UnknownType(String),

    #[error("invalid metapath: {0}")]
    Metapath(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimensions must be positive (nodes={nodes}, dim={dim}, aspects={aspects})")]
    ZeroDimension {
        nodes: usize,
        dim: usize,
        aspects: usize,
    },

    #[error("context window is empty")]
    EmptyContext,

    #[error("non-finite aspect score")]
    NonFiniteScore,

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("unknown edge operator `{0}`")]
    UnknownOperator(String),

    #[error("both positive and negative labels are required")]
    SingleClass,

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("corpus cache mismatch: {0}")]
    CacheMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
