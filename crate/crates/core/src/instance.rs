use std::ops::Deref;
use std::sync::Arc;

use crate::error::{CmppError, Result};
use crate::graph::{AgentId, EdgeId, SparseGraph, VertexId};

/// Ordered vertex sequence of one agent. Cloning is cheap.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path(Arc<[VertexId]>);

impl Path {
    pub fn new(vertices: Vec<VertexId>) -> Self {
        Self(vertices.into())
    }

    pub fn single(v: VertexId) -> Self {
        Self(Arc::from([v]))
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn first(&self) -> Option<VertexId> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<VertexId> {
        self.0.last().copied()
    }

    /// Number of traversed edges, `L - 1`.
    pub fn edge_count(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn visits(&self, v: VertexId) -> bool {
        self.0.contains(&v)
    }

    /// Edge ids of consecutive steps; `None` marks a step that is not an edge.
    pub fn edges<'a>(&'a self, graph: &'a SparseGraph) -> impl Iterator<Item = Option<EdgeId>> + 'a {
        self.0.windows(2).map(move |w| graph.edge(w[0], w[1]))
    }

    pub fn edge_ids(&self, graph: &SparseGraph, agent: AgentId) -> Result<Vec<EdgeId>> {
        self.0
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                graph.edge(w[0], w[1]).ok_or(CmppError::InvalidPath { agent, position: k, from: w[0], to: w[1] })
            })
            .collect()
    }

    /// Drops the visited prefix so the path starts at `current`.
    pub fn truncate_to(&self, current: VertexId) -> Option<Path> {
        let k = self.0.iter().position(|&v| v == current)?;
        Some(Self(Arc::from(&self.0[k..])))
    }
}

impl Deref for Path {
    type Target = [VertexId];

    fn deref(&self) -> &[VertexId] {
        &self.0
    }
}

impl From<Vec<VertexId>> for Path {
    fn from(v: Vec<VertexId>) -> Self {
        Self::new(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Agent {
    /// External identifier, as used in instance files.
    pub label: i64,
    pub start: VertexId,
    pub goal: VertexId,
}

#[derive(Clone, Debug)]
pub struct CmppInstance {
    pub graph: Arc<SparseGraph>,
    pub agents: Vec<Agent>,
}

impl CmppInstance {
    pub fn new(graph: Arc<SparseGraph>, agents: Vec<Agent>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for a in &agents {
            for v in [a.start, a.goal] {
                if !graph.contains_vertex(v) {
                    return Err(CmppError::UnknownVertex(v));
                }
            }
            if !seen.insert(a.label) {
                return Err(CmppError::Instance(format!("duplicate agent id {}", a.label)));
            }
        }
        Ok(Self { graph, agents })
    }

    /// Agents labelled `0..n` from `(start, goal)` pairs.
    pub fn from_pairs(graph: Arc<SparseGraph>, pairs: &[(VertexId, VertexId)]) -> Result<Self> {
        let agents =
            pairs.iter().enumerate().map(|(i, &(start, goal))| Agent { label: i as i64, start, goal }).collect();
        Self::new(graph, agents)
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn agent_ids(&self) -> impl ExactSizeIterator<Item = AgentId> {
        (0..self.agents.len()).map(AgentId::from_index)
    }

    pub fn agent(&self, a: AgentId) -> &Agent {
        &self.agents[a.index()]
    }

    pub fn start(&self, a: AgentId) -> VertexId {
        self.agents[a.index()].start
    }

    pub fn goal(&self, a: AgentId) -> VertexId {
        self.agents[a.index()].goal
    }
}

/// One path per agent, indexed by [`AgentId`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Solution {
    pub paths: Vec<Path>,
}

impl Solution {
    pub fn new(paths: Vec<Path>) -> Self {
        Self { paths }
    }

    pub fn path(&self, a: AgentId) -> &Path {
        &self.paths[a.index()]
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (AgentId, &Path)> {
        self.paths.iter().enumerate().map(|(i, p)| (AgentId::from_index(i), p))
    }

    /// Checks start, goal, adjacency and simplicity of every path.
    pub fn check(&self, instance: &CmppInstance) -> Result<()> {
        if self.paths.len() != instance.agent_count() {
            return Err(CmppError::Instance(format!(
                "solution has {} paths for {} agents",
                self.paths.len(),
                instance.agent_count()
            )));
        }
        let n = instance.graph.vertex_count();
        let mut seen = vec![false; n];
        for (a, path) in self.iter() {
            let agent = instance.agent(a);
            if path.first() != Some(agent.start) || path.last() != Some(agent.goal) {
                return Err(CmppError::Instance(format!(
                    "path of agent {} does not connect its start and goal",
                    agent.label
                )));
            }
            path.edge_ids(&instance.graph, a)?;
            for &v in path.iter() {
                if std::mem::replace(&mut seen[v.index()], true) {
                    return Err(CmppError::Instance(format!(
                        "path of agent {} revisits vertex {}",
                        agent.label,
                        instance.graph.label(v)
                    )));
                }
            }
            for &v in path.iter() {
                seen[v.index()] = false;
            }
        }
        Ok(())
    }
}
