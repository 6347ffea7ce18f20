use std::sync::Arc;

use crate::congestion::{delta_cost, Cost, Traffic};
use crate::constraints::ConstraintSet;
use crate::error::{CmppError, Result};
use crate::graph::{AgentId, EdgeId, SparseGraph, VertexId};
use crate::instance::{CmppInstance, Path, Solution};
use crate::lowlevel::{plan_with_constraints, route_exhaustive};

/// Step limit for the exhaustive fallback used when ordered stitching fails.
const FALLBACK_STEPS: u64 = 200_000;

/// A node of the constraint tree: constraints, the paths that satisfy them,
/// and the induced traffic. Paths and traffic are shared with the parent
/// until modified.
#[derive(Clone, Debug)]
pub struct SearchNode {
    pub constraints: ConstraintSet,
    pub solution: Arc<Solution>,
    pub traffic: Arc<Traffic>,
    /// Total congestion of `solution`; `None` for a node with no feasible path.
    pub cost: Option<Cost>,
    pub lb: Option<Cost>,
}

impl SearchNode {
    pub fn root(solution: Solution, graph: &SparseGraph) -> Result<Self> {
        let traffic = Traffic::from_solution(&solution, graph)?;
        Ok(Self {
            constraints: ConstraintSet::new(),
            cost: Some(traffic.total()),
            solution: Arc::new(solution),
            traffic: Arc::new(traffic),
            lb: None,
        })
    }

    pub fn is_dead(&self) -> bool {
        self.cost.is_none()
    }

    /// Whether every path honours the node's own constraints.
    pub fn is_sound(&self, graph: &SparseGraph) -> bool {
        self.constraints.constrained_agents().all(|(a, c)| {
            let path = self.solution.path(a);
            let edges: Vec<EdgeId> = path.edges(graph).flatten().collect();
            c.forced.iter().all(|e| edges.contains(e)) && !edges.iter().any(|e| c.forbidden.contains(e))
        })
    }
}

/// Entering edges of every path that are not forced for their agent:
/// `(agent, edge)` pairs in path order.
fn free_entries<'a>(node: &'a SearchNode, graph: &'a SparseGraph) -> impl Iterator<Item = (AgentId, EdgeId)> + 'a {
    node.solution.iter().flat_map(move |(a, path)| {
        path.edges(graph).flatten().filter(move |&e| !node.constraints.is_forced(a, e)).map(move |e| (a, e))
    })
}

/// Most congested vertex among those entered through at least one
/// non-forced `(agent, edge)` pair; ties go to the smaller vertex id.
pub fn select_vertex(node: &SearchNode, graph: &SparseGraph) -> Option<VertexId> {
    let mut open = vec![false; graph.vertex_count()];
    for (_, e) in free_entries(node, graph) {
        open[graph.head(e).index()] = true;
    }
    let ledger = node.traffic.ledger();
    graph
        .vertices()
        .filter(|v| open[v.index()])
        .max_by(|&a, &b| ledger.degree(a).cmp(&ledger.degree(b)).then(b.cmp(&a)))
}

/// Picks the non-forced `(agent, edge)` entering `v` whose removal lowers
/// `C(v)` the most. The drop of one unit on `e` equals the product of the
/// other incoming factors of `v`. Ties prefer the busier edge, then the
/// smaller agent id.
pub fn select_agent(node: &SearchNode, graph: &SparseGraph, v: VertexId) -> Result<Option<(AgentId, EdgeId)>> {
    let flow = node.traffic.flow();
    let mut best: Option<(Cost, u32, AgentId, EdgeId)> = None;
    for (a, path) in node.solution.iter() {
        let Some(k) = path.iter().position(|&x| x == v) else { continue };
        if k == 0 {
            continue;
        }
        let Some(e) = graph.edge(path[k - 1], v) else { continue };
        if node.constraints.is_forced(a, e) {
            continue;
        }
        let drop = delta_cost(flow, e, graph)?;
        let f = flow.get(e);
        let better = match best {
            None => true,
            Some((bd, bf, ba, _)) => (drop, f) > (bd, bf) || ((drop, f) == (bd, bf) && a < ba),
        };
        if better {
            best = Some((drop, f, a, e));
        }
    }
    Ok(best.map(|(_, _, a, e)| (a, e)))
}

/// Splits `node` on `(a, e)`: `P` forces the edge and keeps the paths, `Q`
/// forbids it, replans `a`, then replans every other agent visiting `v` in
/// ascending id order.
///
/// A `Q` in which `a` has no path satisfying its constraints is returned
/// dead (`cost == None`).
pub fn expand_node(
    node: &SearchNode,
    instance: &CmppInstance,
    a: AgentId,
    e: EdgeId,
    v: VertexId,
) -> Result<(SearchNode, SearchNode)> {
    let graph = &instance.graph;
    ensure_candidate(node, graph, a, e)?;
    if graph.head(e) != v {
        let (u, w) = graph.endpoints(e);
        return Err(CmppError::ConstraintConflict(a, u, w));
    }
    let mut p = node.clone();
    p.constraints.force(a, e, graph)?;
    p.lb = None;

    let mut q_constraints = node.constraints.clone();
    q_constraints.forbid(a, e, graph)?;
    let mut traffic = (*node.traffic).clone();
    let mut paths = node.solution.paths.clone();

    traffic.remove_path(&paths[a.index()], graph)?;
    let agent = *instance.agent(a);
    let replanned = match plan_with_constraints(graph, traffic.flow(), a, agent.start, agent.goal, &q_constraints)? {
        Some(path) => Some(path),
        None => {
            let c = q_constraints.agent(a);
            route_exhaustive(graph, traffic.flow(), agent.start, agent.goal, &c.forced, &c.forbidden, FALLBACK_STEPS)?
        }
    };
    let Some(path) = replanned else {
        let dead = SearchNode {
            constraints: q_constraints,
            solution: Arc::clone(&node.solution),
            traffic: Arc::clone(&node.traffic),
            cost: None,
            lb: None,
        };
        return Ok((p, dead));
    };
    traffic.apply_path(&path, graph)?;
    paths[a.index()] = path;

    for other in instance.agent_ids() {
        if other == a || !paths[other.index()].visits(v) {
            continue;
        }
        let old: Path = paths[other.index()].clone();
        traffic.remove_path(&old, graph)?;
        let spec = instance.agent(other);
        let next =
            plan_with_constraints(graph, traffic.flow(), other, spec.start, spec.goal, &q_constraints)?.unwrap_or(old);
        traffic.apply_path(&next, graph)?;
        paths[other.index()] = next;
    }

    let q = SearchNode {
        constraints: q_constraints,
        cost: Some(traffic.total()),
        solution: Arc::new(Solution::new(paths)),
        traffic: Arc::new(traffic),
        lb: None,
    };
    debug_assert!(q.is_sound(graph), "expanded node violates its constraints");
    Ok((p, q))
}

fn ensure_candidate(node: &SearchNode, graph: &SparseGraph, a: AgentId, e: EdgeId) -> Result<()> {
    if node.constraints.is_forced(a, e) || !node.solution.path(a).edges(graph).any(|x| x == Some(e)) {
        let (u, v) = graph.endpoints(e);
        return Err(CmppError::ConstraintConflict(a, u, v));
    }
    Ok(())
}
