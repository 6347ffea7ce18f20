//! Lower bounds on the best total congestion reachable under a node's
//! constraints.

use std::collections::HashMap;

use crate::congestion::{CongestionLedger, Cost, FlowField};
use crate::error::{CmppError, Result};
use crate::graph::{EdgeId, SparseGraph, VertexId};
use crate::instance::CmppInstance;
use crate::lowlevel::{cost_tree, plan_route};

use super::node::SearchNode;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BoundMode {
    /// Σ_a hop length of the shortest path avoiding the agent's forbidden
    /// edges. Admissible because `C(v) ≥ Σ_{e∈δ−(v)} f_e`.
    PathLength,
    /// Congestion of the forced flows alone, plus for each agent the cheapest
    /// completion priced at the marginal cost over those forced flows.
    /// Admissible and never below [`BoundMode::PathLength`].
    #[default]
    ForcedFlow,
    /// Stitched path lengths plus the forced-flow surcharge. Not admissible
    /// in general; pruning with it can break the ω guarantee.
    Surcharged,
}

/// Flow field holding only the forced `(agent, edge)` pairs of a node.
fn forced_flow(node: &SearchNode, graph: &SparseGraph) -> FlowField {
    let mut counts = vec![0u32; graph.edge_count()];
    for (_, c) in node.constraints.constrained_agents() {
        for e in &c.forced {
            counts[e.index()] += 1;
        }
    }
    FlowField::from_counts(counts)
}

/// Returns `Ok(None)` when some agent cannot reach its goal under its
/// forbidden edges (the node holds no solution).
pub fn lower_bound(node: &SearchNode, instance: &CmppInstance, mode: BoundMode) -> Result<Option<Cost>> {
    match mode {
        BoundMode::PathLength => path_length_bound(node, instance),
        BoundMode::ForcedFlow => forced_flow_bound(node, instance),
        BoundMode::Surcharged => surcharged_estimate(node, instance),
    }
}

fn path_length_bound(node: &SearchNode, instance: &CmppInstance) -> Result<Option<Cost>> {
    let graph = &instance.graph;
    let mut free: HashMap<VertexId, Vec<Option<u32>>> = HashMap::new();
    let mut total: Cost = 0;
    for a in instance.agent_ids() {
        let agent = instance.agent(a);
        let forbidden = node.constraints.forbidden(a);
        let hops = if forbidden.is_empty() {
            free.entry(agent.start).or_insert_with(|| graph.bfs_hops(agent.start, |_| false))[agent.goal.index()]
        } else {
            graph.bfs_hops(agent.start, |e| forbidden.binary_search(&e).is_ok())[agent.goal.index()]
        };
        let Some(h) = hops else { return Ok(None) };
        total += Cost::from(h);
    }
    Ok(Some(total))
}

fn forced_flow_bound(node: &SearchNode, instance: &CmppInstance) -> Result<Option<Cost>> {
    let graph = &instance.graph;
    let forced = forced_flow(node, graph);
    let base = CongestionLedger::from_flow(&forced, graph)?.total();

    // Marginal price of one more unit on e, given only the forced flows.
    let mut price = Vec::with_capacity(graph.edge_count());
    for e in graph.edge_ids() {
        price.push(crate::congestion::delta_cost(&forced, e, graph)?);
    }

    let mut shared: HashMap<VertexId, Vec<Option<Cost>>> = HashMap::new();
    let mut total = base;
    for a in instance.agent_ids() {
        let agent = instance.agent(a);
        let c = node.constraints.agent(a);
        let completion = if c.is_empty() {
            shared.entry(agent.start).or_insert_with(|| cost_tree(graph, agent.start, |e| Some(price[e.index()])))
                [agent.goal.index()]
        } else {
            let weight = |e: EdgeId| {
                if c.forbidden.binary_search(&e).is_ok() {
                    None
                } else if c.forced.binary_search(&e).is_ok() {
                    Some(0)
                } else {
                    Some(price[e.index()])
                }
            };
            cost_tree(graph, agent.start, weight)[agent.goal.index()]
        };
        let Some(extra) = completion else { return Ok(None) };
        total = total.checked_add(extra).ok_or(CmppError::Overflow)?;
    }
    Ok(Some(total))
}

fn surcharged_estimate(node: &SearchNode, instance: &CmppInstance) -> Result<Option<Cost>> {
    let graph = &instance.graph;
    let forced = forced_flow(node, graph);
    let surcharge = CongestionLedger::from_flow(&forced, graph)?.total() - Cost::from(forced.total());
    let empty = FlowField::zeros(graph);
    let mut total = surcharge;
    for a in instance.agent_ids() {
        let agent = instance.agent(a);
        let c = node.constraints.agent(a);
        let Some(path) = plan_route(graph, &empty, agent.start, agent.goal, &c.forced, &c.forbidden)? else {
            return Ok(None);
        };
        total += path.edge_count() as Cost;
    }
    Ok(Some(total))
}
