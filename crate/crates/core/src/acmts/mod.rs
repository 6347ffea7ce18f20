//! Anytime congestion mitigation tree search (A-CMTS).
//!
//! Best-first branch-and-bound over forced/forbidden `(agent, edge)`
//! constraints. The root holds a prioritized-planning solution (or a warm
//! start); nodes are popped in ascending cost, pruned when the incumbent is
//! within `omega` of their lower bound, and otherwise split on an entering
//! edge of the most congested modifiable vertex. With an admissible bound the
//! returned cost is at most `omega` times the optimum once the queue drains.

mod bound;
mod node;
mod pp;

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};
use std::time::{Duration, Instant};

pub use bound::{lower_bound, BoundMode};
pub use node::{expand_node, select_agent, select_vertex, SearchNode};
pub use pp::pp_initial;

use crate::congestion::{Cost, Traffic};
use crate::error::{CmppError, Result};
use crate::graph::AgentId;
use crate::instance::{CmppInstance, Path, Solution};
use crate::lowlevel::dijkstra_min_delta;

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Suboptimality factor, at least 1.
    pub omega: f64,
    /// Wall-clock limit; `None` runs until the queue is empty.
    pub time_limit: Option<Duration>,
    /// Limit on node expansions, for reproducible budgets.
    pub node_budget: Option<u64>,
    /// Recorded with the results; the search itself is deterministic.
    pub seed: u64,
    /// Root solution to use instead of prioritized planning.
    pub warm_start: Option<Solution>,
    pub bound: BoundMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { omega: 1.0, time_limit: None, node_budget: None, seed: 0, warm_start: None, bound: BoundMode::default() }
    }
}

impl SolverConfig {
    pub fn with_omega(omega: f64) -> Self {
        Self { omega, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega >= 1.0) {
            return Err(CmppError::Config(format!("omega must be >= 1, got {}", self.omega)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SolverReport {
    pub best: Solution,
    pub best_cost: Cost,
    pub initial_cost: Cost,
    pub nodes_expanded: u64,
    pub nodes_pruned: u64,
    pub time_to_initial: Duration,
    pub elapsed: Duration,
    /// `(elapsed, cost)` at the root and at every later improvement.
    pub improvement_trace: Vec<(Duration, Cost)>,
    /// The queue drained, so the `omega` guarantee applies.
    pub exhausted: bool,
}

impl SolverReport {
    /// Relative improvement of the final over the initial cost, in percent.
    pub fn improvement_percent(&self) -> f64 {
        if self.initial_cost == 0 {
            return 0.0;
        }
        100.0 * (self.initial_cost - self.best_cost) as f64 / self.initial_cost as f64
    }
}

struct Queued {
    key: Cost,
    seq: u64,
    node: SearchNode,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key && self.seq == other.seq
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // Max-heap: lowest cost first, then FIFO.
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.cmp(&self.key).then(other.seq.cmp(&self.seq))
    }
}

fn within_omega(ub: Cost, lb: Cost, omega: f64) -> bool {
    if omega == 1.0 {
        ub <= lb
    } else {
        ub as f64 <= omega * lb as f64
    }
}

/// Solves `instance` from a prioritized-planning root, or from
/// `config.warm_start` when present.
pub fn solve(instance: &CmppInstance, config: &SolverConfig) -> Result<SolverReport> {
    config.validate()?;
    let started = Instant::now();
    let root = match &config.warm_start {
        Some(sol) => {
            sol.check(instance)?;
            sol.clone()
        }
        None => pp_initial(instance, None)?,
    };
    search(instance, root, config, started)
}

/// Runs the tree search from a given root solution.
pub fn solve_from_root(instance: &CmppInstance, root: Solution, config: &SolverConfig) -> Result<SolverReport> {
    config.validate()?;
    root.check(instance)?;
    search(instance, root, config, Instant::now())
}

/// Warm-started solve for the lifelong setting.
///
/// Agents outside `changed_agents` keep their previous path, truncated so it
/// starts at the agent's current start vertex; an agent whose previous path
/// no longer leads from its start to its goal is replanned as if changed.
/// Changed agents are planned in ascending id order against the kept flows.
pub fn solve_lifelong_step(
    instance: &CmppInstance,
    previous: &Solution,
    changed_agents: &BTreeSet<AgentId>,
    config: &SolverConfig,
) -> Result<SolverReport> {
    config.validate()?;
    let started = Instant::now();
    let root = warm_root(instance, previous, changed_agents)?;
    search(instance, root, config, started)
}

/// Builds the warm-start root used by [`solve_lifelong_step`].
pub fn warm_root(instance: &CmppInstance, previous: &Solution, changed_agents: &BTreeSet<AgentId>) -> Result<Solution> {
    let graph = &instance.graph;
    let n = instance.agent_count();
    let mut traffic = Traffic::new(graph);
    let mut paths: Vec<Option<Path>> = vec![None; n];
    let mut replan = Vec::new();
    for a in instance.agent_ids() {
        let agent = instance.agent(a);
        let kept = (!changed_agents.contains(&a))
            .then(|| previous.paths.get(a.index()))
            .flatten()
            .and_then(|p| p.truncate_to(agent.start))
            .filter(|p| p.last() == Some(agent.goal) && p.edges(graph).all(|e| e.is_some()));
        match kept {
            Some(p) => {
                traffic.apply_path(&p, graph)?;
                paths[a.index()] = Some(p);
            }
            None => replan.push(a),
        }
    }
    for a in replan {
        let agent = instance.agent(a);
        let p = dijkstra_min_delta(graph, traffic.flow(), agent.start, agent.goal, &[], &[])?
            .ok_or(CmppError::Infeasible(a))?;
        traffic.apply_path(&p, graph)?;
        paths[a.index()] = Some(p);
    }
    Ok(Solution::new(paths.into_iter().map(|p| p.expect("every agent has a path")).collect()))
}

fn search(instance: &CmppInstance, root: Solution, config: &SolverConfig, started: Instant) -> Result<SolverReport> {
    let graph = &instance.graph;
    let deadline = config.time_limit.map(|t| started + t);
    let root = SearchNode::root(root, graph)?;
    let initial_cost = root.cost.expect("root is feasible");
    let time_to_initial = started.elapsed();

    let mut best = root.solution.clone();
    let mut upper = initial_cost;
    let mut trace = vec![(time_to_initial, initial_cost)];
    let mut expanded = 0u64;
    let mut pruned = 0u64;
    let mut seq = 0u64;
    let mut open = BinaryHeap::new();
    open.push(Queued { key: initial_cost, seq, node: root });

    let interrupted = |expanded: u64| {
        deadline.is_some_and(|d| Instant::now() >= d) || config.node_budget.is_some_and(|b| expanded >= b)
    };

    while !open.is_empty() && !interrupted(expanded) {
        let Queued { mut node, .. } = open.pop().expect("queue is non-empty");
        let Some(cost) = node.cost else {
            pruned += 1;
            continue;
        };
        if cost < upper {
            upper = cost;
            best = node.solution.clone();
            trace.push((started.elapsed(), cost));
        }
        let Some(lb) = lower_bound(&node, instance, config.bound)? else {
            pruned += 1;
            continue;
        };
        node.lb = Some(lb);
        if within_omega(upper, lb, config.omega) {
            pruned += 1;
            continue;
        }
        let Some(v) = select_vertex(&node, graph) else {
            continue;
        };
        let (a, e) = select_agent(&node, graph, v)?.expect("a selectable vertex has a candidate agent");
        let (p, q) = expand_node(&node, instance, a, e, v)?;
        expanded += 1;
        for child in [p, q] {
            seq += 1;
            open.push(Queued { key: child.cost.unwrap_or(Cost::MAX), seq, node: child });
        }
    }

    Ok(SolverReport {
        best: (*best).clone(),
        best_cost: upper,
        initial_cost,
        nodes_expanded: expanded,
        nodes_pruned: pruned,
        time_to_initial,
        elapsed: started.elapsed(),
        improvement_trace: trace,
        exhausted: open.is_empty(),
    })
}
