//! Exhaustive optimum for small instances.
//!
//! Every agent's simple paths are enumerated (optionally capped in length),
//! then a joint depth-first branch and bound picks one path per agent in
//! ascending agent order. The bound adds, for each agent still unassigned,
//! the cheapest marginal cost of its candidates against the current flows;
//! since marginal costs only grow as flow is added, this never overestimates.

use crate::congestion::{delta_cost, Cost, Traffic};
use crate::constraints::ConstraintSet;
use crate::error::{CmppError, Result};
use crate::graph::{AgentId, EdgeId, SparseGraph, VertexId};
use crate::instance::{CmppInstance, Path, Solution};

/// Limit on the hop length of enumerated paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LengthCap {
    /// At most `shortest + k` hops.
    Slack(u32),
    /// All simple paths.
    Unbounded,
}

impl Default for LengthCap {
    fn default() -> Self {
        LengthCap::Slack(4)
    }
}

#[derive(Clone, Debug)]
pub struct ExactOptions {
    pub cap: LengthCap,
    /// Skip the instance size guard.
    pub force: bool,
    /// Upper limit on the number of enumerated paths over all agents.
    pub max_paths: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self { cap: LengthCap::default(), force: false, max_paths: 2_000_000 }
    }
}

impl ExactOptions {
    pub fn unbounded() -> Self {
        Self { cap: LengthCap::Unbounded, ..Self::default() }
    }
}

pub const MAX_VERTICES: usize = 16;
pub const MAX_AGENTS: usize = 8;

#[derive(Clone, Debug)]
pub struct ExactResult {
    pub solution: Solution,
    pub cost: Cost,
    pub paths_enumerated: usize,
    pub leaves: u64,
}

/// Optimal solution of `instance` among paths allowed by `options.cap`.
pub fn exact_solve(instance: &CmppInstance, options: &ExactOptions) -> Result<ExactResult> {
    exact_solve_constrained(instance, &ConstraintSet::new(), options)
}

/// Optimal solution among paths that contain every forced edge and no
/// forbidden edge of their agent. Fails with [`CmppError::NoAssignment`] when
/// some agent has no such path at all, or [`CmppError::LengthCap`] when it
/// has none within the cap.
pub fn exact_solve_constrained(
    instance: &CmppInstance,
    constraints: &ConstraintSet,
    options: &ExactOptions,
) -> Result<ExactResult> {
    let graph = &instance.graph;
    if !options.force && (graph.vertex_count() > MAX_VERTICES || instance.agent_count() > MAX_AGENTS) {
        return Err(CmppError::TooLarge { vertices: graph.vertex_count(), agents: instance.agent_count() });
    }

    let mut candidates = Vec::with_capacity(instance.agent_count());
    let mut enumerated = 0usize;
    for a in instance.agent_ids() {
        let agent = instance.agent(a);
        let c = constraints.agent(a);
        let limit = match options.cap {
            LengthCap::Unbounded => None,
            LengthCap::Slack(k) => {
                let hops = graph.bfs_hops(agent.start, |e| c.forbidden.binary_search(&e).is_ok());
                match hops[agent.goal.index()] {
                    Some(h) => Some(h + k),
                    None => return Err(CmppError::NoAssignment),
                }
            }
        };
        let budget = options.max_paths - enumerated;
        let paths = enumerate_paths(graph, agent.start, agent.goal, &c.forced, &c.forbidden, limit, budget)
            .ok_or(CmppError::TooLarge { vertices: graph.vertex_count(), agents: instance.agent_count() })?;
        if paths.is_empty() {
            let uncapped = limit.is_some()
                && enumerate_paths(graph, agent.start, agent.goal, &c.forced, &c.forbidden, None, 1)
                    .is_none_or(|p| !p.is_empty());
            return Err(if uncapped { CmppError::LengthCap(a) } else { CmppError::NoAssignment });
        }
        enumerated += paths.len();
        candidates.push(paths);
    }

    let mut search = Joint {
        graph,
        candidates: &candidates,
        traffic: Traffic::new(graph),
        chosen: vec![0; candidates.len()],
        best: None,
        leaves: 0,
    };
    search.descend(0)?;
    let (cost, picks) = search.best.take().ok_or(CmppError::NoAssignment)?;
    let leaves = search.leaves;
    let paths = picks.iter().zip(&candidates).map(|(&i, cands)| cands[i].path.clone()).collect();
    Ok(ExactResult { solution: Solution::new(paths), cost, paths_enumerated: enumerated, leaves })
}

struct Candidate {
    path: Path,
    edges: Vec<EdgeId>,
}

/// Simple `start`-`goal` paths with at most `limit` hops containing all of
/// `forced` and none of `forbidden`. `None` when more than `budget` exist.
fn enumerate_paths(
    graph: &SparseGraph,
    start: VertexId,
    goal: VertexId,
    forced: &[EdgeId],
    forbidden: &[EdgeId],
    limit: Option<u32>,
    budget: usize,
) -> Option<Vec<Candidate>> {
    struct Walk<'a> {
        graph: &'a SparseGraph,
        goal: VertexId,
        forced: &'a [EdgeId],
        forbidden: &'a [EdgeId],
        limit: u32,
        budget: usize,
        on_path: Vec<bool>,
        stack: Vec<VertexId>,
        edges: Vec<EdgeId>,
        out: Vec<Candidate>,
    }

    impl Walk<'_> {
        fn go(&mut self, v: VertexId) -> bool {
            if v == self.goal {
                if self.forced.iter().all(|e| self.edges.contains(e)) {
                    if self.out.len() == self.budget {
                        return false;
                    }
                    self.out.push(Candidate { path: Path::new(self.stack.clone()), edges: self.edges.clone() });
                }
                return true;
            }
            if self.edges.len() as u32 >= self.limit {
                return true;
            }
            for &e in self.graph.out_edges(v) {
                let w = self.graph.head(e);
                if self.on_path[w.index()] || self.forbidden.binary_search(&e).is_ok() {
                    continue;
                }
                self.on_path[w.index()] = true;
                self.stack.push(w);
                self.edges.push(e);
                let ok = self.go(w);
                self.edges.pop();
                self.stack.pop();
                self.on_path[w.index()] = false;
                if !ok {
                    return false;
                }
            }
            true
        }
    }

    let mut walk = Walk {
        graph,
        goal,
        forced,
        forbidden,
        limit: limit.unwrap_or(u32::MAX),
        budget,
        on_path: vec![false; graph.vertex_count()],
        stack: vec![start],
        edges: Vec::new(),
        out: Vec::new(),
    };
    walk.on_path[start.index()] = true;
    walk.go(start).then_some(walk.out)
}

struct Joint<'a> {
    graph: &'a SparseGraph,
    candidates: &'a [Vec<Candidate>],
    traffic: Traffic,
    chosen: Vec<usize>,
    best: Option<(Cost, Vec<usize>)>,
    leaves: u64,
}

impl Joint<'_> {
    fn marginal(&self, cand: &Candidate) -> Result<Cost> {
        let mut sum: Cost = 0;
        for &e in &cand.edges {
            sum = sum.checked_add(delta_cost(self.traffic.flow(), e, self.graph)?).ok_or(CmppError::Overflow)?;
        }
        Ok(sum)
    }

    fn descend(&mut self, depth: usize) -> Result<()> {
        let current = self.traffic.total();
        if depth == self.candidates.len() {
            self.leaves += 1;
            if self.best.as_ref().is_none_or(|(c, _)| current < *c) {
                self.best = Some((current, self.chosen.clone()));
            }
            return Ok(());
        }
        let mut options: Vec<(Cost, usize)> = Vec::with_capacity(self.candidates[depth].len());
        for (i, cand) in self.candidates[depth].iter().enumerate() {
            options.push((self.marginal(cand)?, i));
        }
        options.sort_unstable();
        let mut rest: Cost = 0;
        for later in &self.candidates[depth + 1..] {
            let mut min = Cost::MAX;
            for cand in later {
                min = min.min(self.marginal(cand)?);
            }
            rest = rest.saturating_add(min);
        }
        for (m, i) in options {
            let bound = current.saturating_add(m).saturating_add(rest);
            if self.best.as_ref().is_some_and(|(c, _)| bound >= *c) {
                break;
            }
            let path = &self.candidates[depth][i].path;
            self.traffic.apply_path(path, self.graph)?;
            self.chosen[depth] = i;
            let result = self.descend(depth + 1);
            self.traffic.remove_path(path, self.graph)?;
            result?;
        }
        Ok(())
    }
}

/// Convenience for callers holding constraint pairs instead of a set.
pub fn constraint_set(
    graph: &SparseGraph,
    forced: &[(AgentId, EdgeId)],
    forbidden: &[(AgentId, EdgeId)],
) -> Result<ConstraintSet> {
    let mut set = ConstraintSet::new();
    for &(a, e) in forced {
        set.force(a, e, graph)?;
    }
    for &(a, e) in forbidden {
        set.forbid(a, e, graph)?;
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congestion::total_cost;
    use std::sync::Arc;

    /// Independent oracle: every combination of simple paths, cost from scratch.
    fn brute_force(instance: &CmppInstance) -> Cost {
        let graph = &instance.graph;
        let per_agent: Vec<Vec<Path>> = instance
            .agent_ids()
            .map(|a| {
                let ag = instance.agent(a);
                enumerate_paths(graph, ag.start, ag.goal, &[], &[], None, usize::MAX)
                    .unwrap()
                    .into_iter()
                    .map(|c| c.path)
                    .collect()
            })
            .collect();
        let mut idx = vec![0usize; per_agent.len()];
        let mut best = Cost::MAX;
        loop {
            let sol = Solution::new(idx.iter().zip(&per_agent).map(|(&i, p)| p[i].clone()).collect());
            best = best.min(total_cost(&sol, graph).unwrap());
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < per_agent[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                return best;
            }
        }
    }

    fn grid_instance(w: usize, h: usize, pairs: &[(u32, u32)]) -> CmppInstance {
        let graph = Arc::new(SparseGraph::grid(w, h));
        let pairs: Vec<_> = pairs.iter().map(|&(s, g)| (VertexId(s), VertexId(g))).collect();
        CmppInstance::from_pairs(graph, &pairs).unwrap()
    }

    #[test]
    fn crossing_agents_on_small_grid_match_brute_force() {
        let inst = grid_instance(3, 2, &[(0, 5), (2, 3), (3, 2)]);
        let r = exact_solve(&inst, &ExactOptions::unbounded()).unwrap();
        assert_eq!(r.cost, brute_force(&inst));
        assert_eq!(total_cost(&r.solution, &inst.graph).unwrap(), r.cost);
        r.solution.check(&inst).unwrap();
    }

    #[test]
    fn head_on_in_a_corridor() {
        // Line 0-1-2-3, agents 0->3 and 3->0: C = 1 + 3 + 3 + 1.
        let inst = grid_instance(4, 1, &[(0, 3), (3, 0)]);
        let r = exact_solve(&inst, &ExactOptions::default()).unwrap();
        assert_eq!(r.cost, 8);
    }

    #[test]
    fn single_agent_cost_is_its_hop_count() {
        let inst = grid_instance(3, 3, &[(0, 8)]);
        let r = exact_solve(&inst, &ExactOptions::default()).unwrap();
        assert_eq!(r.cost, 4);
    }

    #[test]
    fn start_equal_goal_costs_nothing() {
        let inst = grid_instance(2, 2, &[(1, 1), (0, 3)]);
        let r = exact_solve(&inst, &ExactOptions::default()).unwrap();
        assert_eq!(r.cost, 2);
        assert_eq!(r.solution.path(AgentId(0)).vertices(), &[VertexId(1)]);
    }

    #[test]
    fn size_guard_rejects_large_instances_unless_forced() {
        let inst = grid_instance(5, 5, &[(0, 24)]);
        assert!(matches!(
            exact_solve(&inst, &ExactOptions::default()),
            Err(CmppError::TooLarge { vertices: 25, agents: 1 })
        ));
        let forced = ExactOptions { force: true, ..ExactOptions::default() };
        assert_eq!(exact_solve(&inst, &forced).unwrap().cost, 8);
    }

    #[test]
    fn constraints_restrict_the_optimum() {
        let inst = grid_instance(3, 1, &[(0, 2)]);
        let g = &inst.graph;
        let e = g.edge(VertexId(0), VertexId(1)).unwrap();
        let set = constraint_set(g, &[], &[(AgentId(0), e)]).unwrap();
        assert!(matches!(exact_solve_constrained(&inst, &set, &ExactOptions::default()), Err(CmppError::NoAssignment)));

        let inst = grid_instance(2, 2, &[(0, 3)]);
        let g = &inst.graph;
        let e = g.edge(VertexId(0), VertexId(2)).unwrap();
        let set = constraint_set(g, &[(AgentId(0), e)], &[]).unwrap();
        let r = exact_solve_constrained(&inst, &set, &ExactOptions::default()).unwrap();
        assert_eq!(r.solution.path(AgentId(0)).vertices(), &[VertexId(0), VertexId(2), VertexId(3)]);
    }

    #[test]
    fn tight_cap_reports_the_capped_agent() {
        // The only path through the forced edge needs 4 extra hops.
        let inst = grid_instance(3, 2, &[(0, 1)]);
        let g = &inst.graph;
        let e = g.edge(VertexId(5), VertexId(2)).unwrap();
        let set = constraint_set(g, &[(AgentId(0), e)], &[]).unwrap();
        let capped = ExactOptions { cap: LengthCap::Slack(1), ..ExactOptions::default() };
        assert!(matches!(exact_solve_constrained(&inst, &set, &capped), Err(CmppError::LengthCap(AgentId(0)))));
        let r = exact_solve_constrained(&inst, &set, &ExactOptions::unbounded()).unwrap();
        assert_eq!(r.solution.path(AgentId(0)).edge_count(), 5);
    }
}
