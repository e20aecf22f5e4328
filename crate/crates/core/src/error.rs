use thiserror::Error;

use crate::graph::NodeId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("node {0} is not in the graph")]
    UnknownNode(NodeId),

    #[error("invalid multicast request: {0}")]
    InvalidRequest(String),

    #[error("destination {0} is unreachable from the source")]
    Unreachable(NodeId),

    #[error("could not generate a connected graph after {0} attempts")]
    Disconnected(u32),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("tree has {nodes} nodes, exhaustive search is limited to {limit}")]
    TooLarge { nodes: usize, limit: usize },

    #[error("corrupt decision record at node {node}: {reason}")]
    CorruptDecision { node: NodeId, reason: String },

    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
