use thiserror::Error;

use crate::graph::{AgentId, VertexId};

#[derive(Debug, Error)]
pub enum CmppError {
    #[error("agent {agent}: path step {position} ({from} -> {to}) is not an edge of the graph")]
    InvalidPath { agent: AgentId, position: usize, from: VertexId, to: VertexId },
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown edge ({0}, {1})")]
    UnknownEdge(VertexId, VertexId),
    #[error("congestion arithmetic overflowed 128 bits")]
    Overflow,
    #[error("flow underflow on edge ({0}, {1}): removing a path that was never applied")]
    FlowUnderflow(VertexId, VertexId),
    #[error("agent {0} cannot reach its goal")]
    Infeasible(AgentId),
    #[error("no feasible joint assignment exists")]
    NoAssignment,
    #[error("length cap excludes every path of agent {0}")]
    LengthCap(AgentId),
    #[error("instance too large for the exact solver ({vertices} vertices, {agents} agents)")]
    TooLarge { vertices: usize, agents: usize },
    #[error("invalid graph: {0}")]
    Graph(String),
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("conflicting constraint for agent {0} on edge ({1}, {2})")]
    ConstraintConflict(AgentId, VertexId, VertexId),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = CmppError> = std::result::Result<T, E>;
