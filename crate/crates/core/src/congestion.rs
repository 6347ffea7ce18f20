//! Edge flows, per-vertex congestion degrees and the total congestion cost.
//!
//! The congestion degree of a vertex is the product of `f_e + 1` over its
//! incoming edges, minus one. Products are evaluated in checked 128-bit
//! arithmetic; overflow is reported as [`CmppError::Overflow`].

use crate::error::{CmppError, Result};
use crate::graph::{AgentId, EdgeId, SparseGraph, VertexId};
use crate::instance::{Path, Solution};

pub type Cost = u128;

/// Number of agents traversing each directed edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowField {
    flow: Vec<u32>,
}

impl FlowField {
    pub fn zeros(graph: &SparseGraph) -> Self {
        Self { flow: vec![0; graph.edge_count()] }
    }

    pub(crate) fn from_counts(flow: Vec<u32>) -> Self {
        Self { flow }
    }

    #[inline]
    pub fn get(&self, e: EdgeId) -> u32 {
        self.flow[e.index()]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.flow
    }

    /// Σ_e f_e.
    pub fn total(&self) -> u64 {
        self.flow.iter().map(|&f| u64::from(f)).sum()
    }

    fn add(&mut self, e: EdgeId) {
        self.flow[e.index()] += 1;
    }

    fn sub(&mut self, e: EdgeId, graph: &SparseGraph) -> Result<()> {
        let f = &mut self.flow[e.index()];
        if *f == 0 {
            let (u, v) = graph.endpoints(e);
            return Err(CmppError::FlowUnderflow(u, v));
        }
        *f -= 1;
        Ok(())
    }
}

/// Counts, for every directed edge, the agents whose path uses it.
pub fn compute_flow(solution: &Solution, graph: &SparseGraph) -> Result<FlowField> {
    let mut flow = FlowField::zeros(graph);
    for (a, path) in solution.iter() {
        for e in path.edge_ids(graph, a)? {
            flow.add(e);
        }
    }
    Ok(flow)
}

/// `Π_{e ∈ δ−(v)} (f_e + 1)`, optionally leaving out one incoming edge.
#[inline]
fn inflow_product(flow: &FlowField, v: VertexId, graph: &SparseGraph, skip: Option<EdgeId>) -> Result<Cost> {
    graph
        .in_edges(v)
        .iter()
        .filter(|&&e| Some(e) != skip)
        .try_fold(1u128, |acc, &e| acc.checked_mul(Cost::from(flow.get(e)) + 1))
        .ok_or(CmppError::Overflow)
}

/// Congestion degree `C(v)` under `flow`.
pub fn congestion_degree(flow: &FlowField, v: VertexId, graph: &SparseGraph) -> Result<Cost> {
    if !graph.contains_vertex(v) {
        return Err(CmppError::UnknownVertex(v));
    }
    Ok(inflow_product(flow, v, graph, None)? - 1)
}

/// Increase of `C(v)` when one more agent enters `v` through `e = (u, v)`.
///
/// Equals the product of `f + 1` over the other incoming edges of `v`, so it
/// is always at least one.
#[inline]
pub fn delta_cost(flow: &FlowField, e: EdgeId, graph: &SparseGraph) -> Result<Cost> {
    inflow_product(flow, graph.head(e), graph, Some(e))
}

/// [`delta_cost`] for an edge given by its endpoints.
pub fn delta_cost_between(flow: &FlowField, u: VertexId, v: VertexId, graph: &SparseGraph) -> Result<Cost> {
    let e = graph.edge(u, v).ok_or(CmppError::UnknownEdge(u, v))?;
    delta_cost(flow, e, graph)
}

/// Total congestion `Σ_v C(v)` of a solution.
pub fn total_cost(solution: &Solution, graph: &SparseGraph) -> Result<Cost> {
    let flow = compute_flow(solution, graph)?;
    CongestionLedger::from_flow(&flow, graph).map(|l| l.total())
}

/// Per-vertex congestion degrees and their sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongestionLedger {
    degree: Vec<Cost>,
    total: Cost,
}

impl CongestionLedger {
    pub fn zeros(graph: &SparseGraph) -> Self {
        Self { degree: vec![0; graph.vertex_count()], total: 0 }
    }

    pub fn from_flow(flow: &FlowField, graph: &SparseGraph) -> Result<Self> {
        let mut degree = Vec::with_capacity(graph.vertex_count());
        let mut total: Cost = 0;
        for v in graph.vertices() {
            let c = congestion_degree(flow, v, graph)?;
            total = total.checked_add(c).ok_or(CmppError::Overflow)?;
            degree.push(c);
        }
        Ok(Self { degree, total })
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> Cost {
        self.degree[v.index()]
    }

    pub fn degrees(&self) -> &[Cost] {
        &self.degree
    }

    pub fn total(&self) -> Cost {
        self.total
    }

    fn refresh(&mut self, flow: &FlowField, v: VertexId, graph: &SparseGraph) -> Result<()> {
        let c = inflow_product(flow, v, graph, None)? - 1;
        let slot = &mut self.degree[v.index()];
        self.total = (self.total - *slot).checked_add(c).ok_or(CmppError::Overflow)?;
        *slot = c;
        Ok(())
    }
}

/// Flow field and congestion ledger kept consistent under path insertion
/// and removal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Traffic {
    flow: FlowField,
    ledger: CongestionLedger,
}

impl Traffic {
    pub fn new(graph: &SparseGraph) -> Self {
        Self { flow: FlowField::zeros(graph), ledger: CongestionLedger::zeros(graph) }
    }

    pub fn from_solution(solution: &Solution, graph: &SparseGraph) -> Result<Self> {
        let flow = compute_flow(solution, graph)?;
        let ledger = CongestionLedger::from_flow(&flow, graph)?;
        Ok(Self { flow, ledger })
    }

    pub fn flow(&self) -> &FlowField {
        &self.flow
    }

    pub fn ledger(&self) -> &CongestionLedger {
        &self.ledger
    }

    pub fn total(&self) -> Cost {
        self.ledger.total
    }

    pub fn apply_path(&mut self, path: &Path, graph: &SparseGraph) -> Result<()> {
        let edges = path.edge_ids(graph, AgentId(u32::MAX))?;
        for (k, &e) in edges.iter().enumerate() {
            self.flow.add(e);
            if let Err(err) = self.ledger.refresh(&self.flow, graph.head(e), graph) {
                // Roll back so the state stays consistent.
                for &done in edges[..=k].iter().rev() {
                    self.flow.flow[done.index()] -= 1;
                    let _ = self.ledger.refresh(&self.flow, graph.head(done), graph);
                }
                return Err(err);
            }
        }
        Ok(())
    }

    pub fn remove_path(&mut self, path: &Path, graph: &SparseGraph) -> Result<()> {
        let edges = path.edge_ids(graph, AgentId(u32::MAX))?;
        if let Some(&e) = edges.iter().find(|&&e| self.flow.get(e) == 0) {
            let (u, v) = graph.endpoints(e);
            return Err(CmppError::FlowUnderflow(u, v));
        }
        for e in edges {
            self.flow.sub(e, graph)?;
            // Decreasing a product cannot overflow.
            self.ledger.refresh(&self.flow, graph.head(e), graph)?;
        }
        Ok(())
    }

    /// Σ of [`delta_cost`] over the edges of `path`, i.e. the cost increase
    /// of applying it (exact for simple paths).
    pub fn path_delta(&self, path: &Path, graph: &SparseGraph) -> Result<Cost> {
        let mut sum: Cost = 0;
        for e in path.edge_ids(graph, AgentId(u32::MAX))? {
            sum = sum.checked_add(delta_cost(&self.flow, e, graph)?).ok_or(CmppError::Overflow)?;
        }
        Ok(sum)
    }
}
