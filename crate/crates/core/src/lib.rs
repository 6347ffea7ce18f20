//! Congestion mitigation path planning (CMPP).
//!
//! Agents receive time-independent simple paths on a sparse graph so that
//! the total multiplicative congestion `Σ_v (Π_{e∈δ−(v)} (f_e + 1) − 1)` is
//! small. The crate provides the cost model, a constrained single-agent
//! planner, the anytime tree search solver ([`acmts`]), an exhaustive oracle
//! for small instances and a validator for the edge-indicator constraint
//! system.

pub mod acmts;
pub mod congestion;
pub mod constraints;
pub mod error;
pub mod exact;
pub mod generate;
pub mod graph;
pub mod instance;
pub mod io;
pub mod lowlevel;
pub mod validate;

pub use acmts::{pp_initial, solve, solve_lifelong_step, BoundMode, SolverConfig, SolverReport};
pub use congestion::{
    compute_flow, congestion_degree, delta_cost, total_cost, CongestionLedger, Cost, FlowField, Traffic,
};
pub use constraints::{AgentConstraints, ConstraintSet};
pub use error::{CmppError, Result};
pub use exact::{exact_solve, exact_solve_constrained, ExactOptions, ExactResult, LengthCap};
pub use graph::{AgentId, EdgeId, SparseGraph, Vertex, VertexId};
pub use instance::{Agent, CmppInstance, Path, Solution};
pub use io::{congestion_csv, InstanceDoc, SolutionDoc};
pub use lowlevel::{dijkstra_min_delta, plan_with_constraints, route_exhaustive};
pub use validate::{validate_claims, validate_minlp, Violation};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
