use crate::graph::{EdgeType, NodeId, NodeLabel};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("node {0} not found")]
    NotFound(NodeId),

    #[error("schema violation: {edge} cannot connect {src} -> {dst}")]
    Schema {
        src: NodeLabel,
        edge: EdgeType,
        dst: NodeLabel,
    },

    #[error("type error: {0}")]
    Type(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index {index} out of range for {len} classes")]
    Index { index: usize, len: usize },

    #[error("leakage: {0}")]
    Leakage(String),

    #[error("malformed {what}: {reason}")]
    Format { what: &'static str, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn format(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            what,
            reason: reason.into(),
        }
    }
}
