use crate::congestion::Traffic;
use crate::constraints::ConstraintSet;
use crate::error::{CmppError, Result};
use crate::graph::AgentId;
use crate::instance::{CmppInstance, Path, Solution};
use crate::lowlevel::plan_with_constraints;

/// Prioritized planning: agents are planned one after another, each
/// minimizing its incremental congestion against the agents already placed.
///
/// `priority_order` must be a permutation of the agents; `None` means
/// ascending agent index.
pub fn pp_initial(instance: &CmppInstance, priority_order: Option<&[AgentId]>) -> Result<Solution> {
    let n = instance.agent_count();
    let default_order: Vec<AgentId>;
    let order = match priority_order {
        Some(order) => {
            let mut seen = vec![false; n];
            if order.len() != n || order.iter().any(|a| a.index() >= n || std::mem::replace(&mut seen[a.index()], true))
            {
                return Err(CmppError::Config("priority order is not a permutation of the agents".into()));
            }
            order
        }
        None => {
            default_order = instance.agent_ids().collect();
            &default_order
        }
    };
    let graph = &instance.graph;
    let empty = ConstraintSet::new();
    let mut traffic = Traffic::new(graph);
    let mut paths: Vec<Option<Path>> = vec![None; n];
    for &a in order {
        let agent = instance.agent(a);
        let path = plan_with_constraints(graph, traffic.flow(), a, agent.start, agent.goal, &empty)?
            .ok_or(CmppError::Infeasible(a))?;
        traffic.apply_path(&path, graph)?;
        paths[a.index()] = Some(path);
    }
    Ok(Solution::new(paths.into_iter().map(|p| p.expect("every agent planned")).collect()))
}
