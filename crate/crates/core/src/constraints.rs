use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{CmppError, Result};
use crate::graph::{AgentId, EdgeId, SparseGraph};

/// Forced and forbidden edges of a single agent, each kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AgentConstraints {
    pub forced: Vec<EdgeId>,
    pub forbidden: Vec<EdgeId>,
}

impl AgentConstraints {
    pub fn is_empty(&self) -> bool {
        self.forced.is_empty() && self.forbidden.is_empty()
    }
}

static EMPTY: AgentConstraints = AgentConstraints { forced: Vec::new(), forbidden: Vec::new() };

/// Forced (C+) and forbidden (C−) `(agent, edge)` pairs of a search node.
///
/// Per-agent entries are shared between clones, so branching only copies the
/// entry of the agent that gains a constraint.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    per_agent: BTreeMap<AgentId, Arc<AgentConstraints>>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.per_agent.is_empty()
    }

    pub fn agent(&self, a: AgentId) -> &AgentConstraints {
        self.per_agent.get(&a).map_or(&EMPTY, |c| c)
    }

    pub fn forced(&self, a: AgentId) -> &[EdgeId] {
        &self.agent(a).forced
    }

    pub fn forbidden(&self, a: AgentId) -> &[EdgeId] {
        &self.agent(a).forbidden
    }

    pub fn is_forced(&self, a: AgentId, e: EdgeId) -> bool {
        self.forced(a).binary_search(&e).is_ok()
    }

    pub fn is_forbidden(&self, a: AgentId, e: EdgeId) -> bool {
        self.forbidden(a).binary_search(&e).is_ok()
    }

    /// Agents that carry at least one constraint, ascending.
    pub fn constrained_agents(&self) -> impl Iterator<Item = (AgentId, &AgentConstraints)> {
        self.per_agent.iter().map(|(&a, c)| (a, c.as_ref()))
    }

    pub fn forced_count(&self) -> usize {
        self.per_agent.values().map(|c| c.forced.len()).sum()
    }

    pub fn forbidden_count(&self) -> usize {
        self.per_agent.values().map(|c| c.forbidden.len()).sum()
    }

    pub fn force(&mut self, a: AgentId, e: EdgeId, graph: &SparseGraph) -> Result<()> {
        if self.is_forbidden(a, e) {
            let (u, v) = graph.endpoints(e);
            return Err(CmppError::ConstraintConflict(a, u, v));
        }
        let entry = Arc::make_mut(self.per_agent.entry(a).or_default());
        if let Err(i) = entry.forced.binary_search(&e) {
            entry.forced.insert(i, e);
        }
        Ok(())
    }

    pub fn forbid(&mut self, a: AgentId, e: EdgeId, graph: &SparseGraph) -> Result<()> {
        if self.is_forced(a, e) {
            let (u, v) = graph.endpoints(e);
            return Err(CmppError::ConstraintConflict(a, u, v));
        }
        let entry = Arc::make_mut(self.per_agent.entry(a).or_default());
        if let Err(i) = entry.forbidden.binary_search(&e) {
            entry.forbidden.insert(i, e);
        }
        Ok(())
    }
}
