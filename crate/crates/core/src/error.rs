use thiserror::Error;

use crate::graph::{EdgeKind, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("node {0} not found")]
    NodeNotFound(NodeId),
    #[error("edge {0} not found")]
    EdgeNotFound(String),
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("duplicate edge {src} -> {dst} ({kind:?})")]
    DuplicateEdge {
        src: NodeId,
        dst: NodeId,
        kind: EdgeKind,
    },
    #[error("edge endpoint {0} does not exist")]
    Dangling(String),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("a narrative graph needs at least one node")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocumentError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("integrity error: {0}")]
    Integrity(#[from] GraphError),
}

impl DocumentError {
    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        DocumentError::Parse {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvaluationError {
    #[error("unknown dimension {0:?}")]
    UnknownDimension(String),
    #[error("granularity must be at least 2, got {0}")]
    Granularity(usize),
    #[error("at least one dimension must be selected")]
    NoDimensions,
}
