//! JSON documents for instances and solutions, and the congestion CSV.
//!
//! Files refer to vertices and agents by their external integer ids. On load,
//! vertices are ordered by id, so internal indices follow id order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::congestion::{CongestionLedger, Cost};
use crate::error::{CmppError, Result};
use crate::graph::{SparseGraph, Vertex, VertexId};
use crate::instance::{Agent, CmppInstance, Path, Solution};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexDoc {
    pub id: i64,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentDoc {
    pub id: i64,
    pub start: i64,
    pub goal: i64,
}

/// `{"vertices":[{"id","x","y"}], "edges":[[u,v]], "directed":false, "agents":[{"id","start","goal"}]}`.
///
/// Undirected edge lists are symmetrized. With `"directed": true` every edge
/// must appear in both directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<[i64; 2]>,
    #[serde(default)]
    pub directed: bool,
    #[serde(default)]
    pub agents: Vec<AgentDoc>,
}

impl InstanceDoc {
    pub fn from_graph(graph: &SparseGraph) -> Self {
        let vertices = graph
            .vertices()
            .map(|v| {
                let Vertex { label, x, y } = *graph.vertex(v);
                VertexDoc { id: label, x, y }
            })
            .collect();
        let edges = graph
            .edge_ids()
            .map(|e| graph.endpoints(e))
            .filter(|(u, v)| u < v)
            .map(|(u, v)| [graph.label(u), graph.label(v)])
            .collect();
        Self { vertices, edges, directed: false, agents: Vec::new() }
    }

    pub fn from_instance(instance: &CmppInstance) -> Self {
        let g = &instance.graph;
        let mut doc = Self::from_graph(g);
        doc.agents = instance
            .agents
            .iter()
            .map(|a| AgentDoc { id: a.label, start: g.label(a.start), goal: g.label(a.goal) })
            .collect();
        doc
    }

    pub fn to_graph(&self) -> Result<SparseGraph> {
        let mut vertices: Vec<Vertex> = self.vertices.iter().map(|v| Vertex { label: v.id, x: v.x, y: v.y }).collect();
        vertices.sort_by_key(|v| v.label);
        if !vertices.iter().all(|v| v.x.is_finite() && v.y.is_finite()) {
            return Err(CmppError::Graph("vertex coordinates must be finite".into()));
        }
        let index = |label: i64| {
            vertices
                .binary_search_by_key(&label, |v| v.label)
                .map_err(|_| CmppError::Graph(format!("edge references unknown vertex {label}")))
        };
        let edges = self.edges.iter().map(|&[u, v]| Ok((index(u)?, index(v)?))).collect::<Result<Vec<_>>>()?;
        SparseGraph::new(vertices, edges, !self.directed)
    }

    pub fn to_instance(&self) -> Result<CmppInstance> {
        let graph = Arc::new(self.to_graph()?);
        let lookup = |label: i64| {
            graph.by_label(label).ok_or_else(|| CmppError::Instance(format!("agent endpoint {label} is not a vertex")))
        };
        let agents = self
            .agents
            .iter()
            .map(|a| Ok(Agent { label: a.id, start: lookup(a.start)?, goal: lookup(a.goal)? }))
            .collect::<Result<Vec<_>>>()?;
        CmppInstance::new(graph, agents)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `{"paths": {"<agent id>": [vertex ids]}, "total_cost": c}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub paths: BTreeMap<i64, Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_cost: Option<Cost>,
}

impl SolutionDoc {
    pub fn from_solution(solution: &Solution, instance: &CmppInstance, total_cost: Option<Cost>) -> Self {
        let g = &instance.graph;
        let paths =
            solution.iter().map(|(a, p)| (instance.agent(a).label, p.iter().map(|&v| g.label(v)).collect())).collect();
        Self { paths, total_cost }
    }

    /// Maps external ids back to internal ones. Fails on unknown agents or
    /// vertices and on agents without a path.
    pub fn to_solution(&self, instance: &CmppInstance) -> Result<Solution> {
        let g = &instance.graph;
        for id in self.paths.keys() {
            if !instance.agents.iter().any(|a| a.label == *id) {
                return Err(CmppError::Instance(format!("solution names unknown agent {id}")));
            }
        }
        let paths = instance
            .agents
            .iter()
            .map(|a| {
                let labels = self
                    .paths
                    .get(&a.label)
                    .ok_or_else(|| CmppError::Instance(format!("no path for agent {}", a.label)))?;
                let vertices = labels
                    .iter()
                    .map(|&l| {
                        g.by_label(l).ok_or_else(|| {
                            CmppError::Instance(format!("path of agent {} uses unknown vertex {l}", a.label))
                        })
                    })
                    .collect::<Result<Vec<VertexId>>>()?;
                Ok(Path::new(vertices))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Solution::new(paths))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `vertex_id,x,y,C` rows in vertex order.
pub fn congestion_csv(graph: &SparseGraph, ledger: &CongestionLedger) -> String {
    let mut out = String::from("vertex_id,x,y,C\n");
    for v in graph.vertices() {
        let (x, y) = graph.position(v);
        let _ = writeln!(out, "{},{},{},{}", graph.label(v), x, y, ledger.degree(v));
    }
    out
}
