//! Checks a solution against the edge-indicator constraint system.
//!
//! Indicators `z[a][e]` count how often agent `a` traverses edge `e`; a valid
//! solution has binary indicators, unit out-flow at each start, unit in-flow
//! at each goal, conservation elsewhere, no edge used in both directions by
//! one agent, and flows and congestion consistent with the indicators.

use std::collections::BTreeMap;

use crate::congestion::{CongestionLedger, Cost, FlowField};
use crate::graph::{AgentId, EdgeId, SparseGraph, VertexId};
use crate::instance::{CmppInstance, Solution};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    AgentCount {
        expected: usize,
        found: usize,
    },
    EmptyPath {
        agent: AgentId,
    },
    UnknownVertex {
        agent: AgentId,
        position: usize,
        vertex: VertexId,
    },
    WrongStart {
        agent: AgentId,
        expected: VertexId,
        found: VertexId,
    },
    WrongGoal {
        agent: AgentId,
        expected: VertexId,
        found: VertexId,
    },
    /// Consecutive path vertices without a connecting edge.
    NonAdjacent {
        agent: AgentId,
        position: usize,
        from: VertexId,
        to: VertexId,
    },
    /// The path enters `vertex` more than once.
    RepeatedVertex {
        agent: AgentId,
        vertex: VertexId,
    },
    NonBinary {
        agent: AgentId,
        from: VertexId,
        to: VertexId,
        value: u32,
    },
    /// Out-flow minus in-flow at the start is not 1, or the start is re-entered.
    StartFlow {
        agent: AgentId,
        vertex: VertexId,
        inflow: u32,
        outflow: u32,
    },
    /// In-flow minus out-flow at the goal is not 1, or the goal is left.
    GoalFlow {
        agent: AgentId,
        vertex: VertexId,
        inflow: u32,
        outflow: u32,
    },
    /// In-flow differs from out-flow, or exceeds 1, at an intermediate vertex.
    Conservation {
        agent: AgentId,
        vertex: VertexId,
        inflow: u32,
        outflow: u32,
    },
    AntiParallel {
        agent: AgentId,
        u: VertexId,
        v: VertexId,
    },
    /// A reported edge flow differs from the sum of indicators.
    FlowMismatch {
        from: VertexId,
        to: VertexId,
        claimed: u32,
        actual: u32,
    },
    /// A reported total congestion differs from the value implied by the flows.
    CostMismatch {
        claimed: Cost,
        actual: Cost,
    },
    /// The flows overflow the cost arithmetic.
    CostOverflow,
}

impl Violation {
    /// Human-readable description using external vertex and agent labels.
    pub fn describe(&self, instance: &CmppInstance) -> String {
        let g = &instance.graph;
        let l = |v: &VertexId| g.label(*v);
        let a = |a: &AgentId| instance.agents.get(a.index()).map_or(a.0 as i64, |x| x.label);
        match self {
            Violation::AgentCount { expected, found } => format!("expected {expected} paths, found {found}"),
            Violation::EmptyPath { agent } => format!("agent {}: empty path", a(agent)),
            Violation::UnknownVertex { agent, position, vertex } => {
                format!("agent {}: unknown vertex {} at position {position}", a(agent), vertex.0)
            }
            Violation::WrongStart { agent, expected, found } => {
                format!("agent {}: path starts at {} instead of {}", a(agent), l(found), l(expected))
            }
            Violation::WrongGoal { agent, expected, found } => {
                format!("agent {}: path ends at {} instead of {}", a(agent), l(found), l(expected))
            }
            Violation::NonAdjacent { agent, position, from, to } => {
                format!("agent {}: no edge {} -> {} at position {position}", a(agent), l(from), l(to))
            }
            Violation::RepeatedVertex { agent, vertex } => {
                format!("agent {}: vertex {} visited more than once", a(agent), l(vertex))
            }
            Violation::NonBinary { agent, from, to, value } => {
                format!("agent {}: edge {} -> {} used {value} times", a(agent), l(from), l(to))
            }
            Violation::StartFlow { agent, vertex, inflow, outflow } => {
                format!("agent {}: start {} has in-flow {inflow}, out-flow {outflow}", a(agent), l(vertex))
            }
            Violation::GoalFlow { agent, vertex, inflow, outflow } => {
                format!("agent {}: goal {} has in-flow {inflow}, out-flow {outflow}", a(agent), l(vertex))
            }
            Violation::Conservation { agent, vertex, inflow, outflow } => {
                format!("agent {}: vertex {} has in-flow {inflow}, out-flow {outflow}", a(agent), l(vertex))
            }
            Violation::AntiParallel { agent, u, v } => {
                format!("agent {}: uses both {} -> {} and {} -> {}", a(agent), l(u), l(v), l(v), l(u))
            }
            Violation::FlowMismatch { from, to, claimed, actual } => {
                format!("edge {} -> {}: flow {claimed} reported, {actual} implied", l(from), l(to))
            }
            Violation::CostMismatch { claimed, actual } => {
                format!("total congestion {claimed} reported, {actual} implied")
            }
            Violation::CostOverflow => "total congestion overflows".to_string(),
        }
    }
}

/// All constraint violations of `solution`; empty means valid.
pub fn validate_minlp(solution: &Solution, instance: &CmppInstance) -> Vec<Violation> {
    validate_claims(solution, instance, None, None)
}

/// Like [`validate_minlp`], also checking reported edge flows and total cost.
pub fn validate_claims(
    solution: &Solution,
    instance: &CmppInstance,
    claimed_flow: Option<&FlowField>,
    claimed_cost: Option<Cost>,
) -> Vec<Violation> {
    let graph = &instance.graph;
    let mut out = Vec::new();
    if solution.len() != instance.agent_count() {
        out.push(Violation::AgentCount { expected: instance.agent_count(), found: solution.len() });
    }

    let mut flow = vec![0u32; graph.edge_count()];
    for (a, path) in solution.iter().take(instance.agent_count()) {
        let agent = instance.agent(a);
        let Some(first) = path.first() else {
            out.push(Violation::EmptyPath { agent: a });
            continue;
        };
        if let Some((position, &vertex)) = path.iter().enumerate().find(|(_, v)| !graph.contains_vertex(**v)) {
            out.push(Violation::UnknownVertex { agent: a, position, vertex });
            continue;
        }
        let last = path.last().expect("non-empty");
        if first != agent.start {
            out.push(Violation::WrongStart { agent: a, expected: agent.start, found: first });
        }
        if last != agent.goal {
            out.push(Violation::WrongGoal { agent: a, expected: agent.goal, found: last });
        }

        let mut visits = vec![0u32; graph.vertex_count()];
        for &v in path.iter() {
            visits[v.index()] += 1;
        }
        for v in graph.vertices() {
            if visits[v.index()] > 1 {
                out.push(Violation::RepeatedVertex { agent: a, vertex: v });
            }
        }

        let mut z: BTreeMap<EdgeId, u32> = BTreeMap::new();
        for (i, w) in path.windows(2).enumerate() {
            match graph.edge(w[0], w[1]) {
                Some(e) => *z.entry(e).or_default() += 1,
                None => out.push(Violation::NonAdjacent { agent: a, position: i, from: w[0], to: w[1] }),
            }
        }
        check_indicators(a, agent.start, agent.goal, &z, graph, &mut out);
        for (e, n) in z {
            flow[e.index()] += n;
        }
    }

    let flow = FlowField::from_counts(flow);
    if let Some(claimed) = claimed_flow {
        for e in graph.edge_ids() {
            let (c, f) = (claimed.as_slice().get(e.index()).copied().unwrap_or(0), flow.get(e));
            if c != f {
                let (from, to) = graph.endpoints(e);
                out.push(Violation::FlowMismatch { from, to, claimed: c, actual: f });
            }
        }
    }
    if let Some(claimed) = claimed_cost {
        match CongestionLedger::from_flow(&flow, graph) {
            Ok(ledger) if ledger.total() != claimed => {
                out.push(Violation::CostMismatch { claimed, actual: ledger.total() })
            }
            Ok(_) => {}
            Err(_) => out.push(Violation::CostOverflow),
        }
    }
    out
}

fn check_indicators(
    a: AgentId,
    start: VertexId,
    goal: VertexId,
    z: &BTreeMap<EdgeId, u32>,
    graph: &SparseGraph,
    out: &mut Vec<Violation>,
) {
    let get = |e: EdgeId| z.get(&e).copied().unwrap_or(0);
    for (&e, &n) in z {
        let (u, v) = graph.endpoints(e);
        if n > 1 {
            out.push(Violation::NonBinary { agent: a, from: u, to: v, value: n });
        }
        if u < v && get(graph.reverse(e)) > 0 {
            out.push(Violation::AntiParallel { agent: a, u, v });
        }
    }
    for v in graph.vertices() {
        let inflow: u32 = graph.in_edges(v).iter().map(|&e| get(e)).sum();
        let outflow: u32 = graph.out_edges(v).iter().map(|&e| get(e)).sum();
        if start == goal && v == start {
            if inflow != 0 || outflow != 0 {
                out.push(Violation::StartFlow { agent: a, vertex: v, inflow, outflow });
            }
        } else if v == start {
            if outflow != 1 || inflow != 0 {
                out.push(Violation::StartFlow { agent: a, vertex: v, inflow, outflow });
            }
        } else if v == goal {
            if inflow != 1 || outflow != 0 {
                out.push(Violation::GoalFlow { agent: a, vertex: v, inflow, outflow });
            }
        } else if inflow != outflow || inflow > 1 {
            out.push(Violation::Conservation { agent: a, vertex: v, inflow, outflow });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Path;
    use std::sync::Arc;

    fn line4() -> CmppInstance {
        let g = Arc::new(SparseGraph::grid(4, 1));
        CmppInstance::from_pairs(g, &[(VertexId(0), VertexId(3)), (VertexId(3), VertexId(0))]).unwrap()
    }

    fn path(v: &[u32]) -> Path {
        Path::new(v.iter().map(|&i| VertexId(i)).collect())
    }

    #[test]
    fn valid_solution_has_no_violations() {
        let inst = line4();
        let sol = Solution::new(vec![path(&[0, 1, 2, 3]), path(&[3, 2, 1, 0])]);
        assert!(validate_minlp(&sol, &inst).is_empty());
        assert!(validate_claims(&sol, &inst, None, Some(8)).is_empty());
        assert_eq!(
            validate_claims(&sol, &inst, None, Some(7)),
            vec![Violation::CostMismatch { claimed: 7, actual: 8 }]
        );
    }

    #[test]
    fn back_and_forth_reports_repeat_and_anti_parallel() {
        let inst = line4();
        let sol = Solution::new(vec![path(&[0, 1, 2, 1, 2, 3]), path(&[3, 2, 1, 0])]);
        let v = validate_minlp(&sol, &inst);
        assert!(v.contains(&Violation::RepeatedVertex { agent: AgentId(0), vertex: VertexId(1) }));
        assert!(v.contains(&Violation::AntiParallel { agent: AgentId(0), u: VertexId(1), v: VertexId(2) }));
        assert!(v.contains(&Violation::NonBinary { agent: AgentId(0), from: VertexId(1), to: VertexId(2), value: 2 }));
    }

    #[test]
    fn gap_in_path_breaks_adjacency_and_conservation() {
        let inst = line4();
        let sol = Solution::new(vec![path(&[0, 2, 3]), path(&[3, 2, 1, 0])]);
        let v = validate_minlp(&sol, &inst);
        assert!(v.contains(&Violation::NonAdjacent {
            agent: AgentId(0),
            position: 0,
            from: VertexId(0),
            to: VertexId(2)
        }));
        assert!(v.iter().any(|x| matches!(x, Violation::StartFlow { agent: AgentId(0), .. })));
    }

    #[test]
    fn stationary_agent_is_valid_only_without_moves() {
        let g = Arc::new(SparseGraph::grid(3, 1));
        let inst = CmppInstance::from_pairs(g, &[(VertexId(1), VertexId(1))]).unwrap();
        assert!(validate_minlp(&Solution::new(vec![path(&[1])]), &inst).is_empty());
        let v = validate_minlp(&Solution::new(vec![path(&[1, 2, 1])]), &inst);
        assert!(v.contains(&Violation::RepeatedVertex { agent: AgentId(0), vertex: VertexId(1) }));
        assert!(v.iter().any(|x| matches!(x, Violation::StartFlow { .. })));
    }

    #[test]
    fn wrong_endpoints_and_counts() {
        let inst = line4();
        let sol = Solution::new(vec![path(&[0, 1, 2])]);
        let v = validate_minlp(&sol, &inst);
        assert!(v.contains(&Violation::AgentCount { expected: 2, found: 1 }));
        assert!(v.contains(&Violation::WrongGoal { agent: AgentId(0), expected: VertexId(3), found: VertexId(2) }));
        let empty = Solution::new(vec![Path::new(vec![]), path(&[3, 2, 1, 0])]);
        assert_eq!(validate_minlp(&empty, &inst), vec![Violation::EmptyPath { agent: AgentId(0) }]);
    }

    #[test]
    fn described_violations_use_labels() {
        let inst = line4();
        let d = Violation::AntiParallel { agent: AgentId(1), u: VertexId(1), v: VertexId(2) }.describe(&inst);
        assert_eq!(d, "agent 1: uses both 1 -> 2 and 2 -> 1");
    }
}
