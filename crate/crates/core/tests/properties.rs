use std::sync::Arc;

use cmpp_core::acmts::{expand_node, lower_bound, select_agent, select_vertex, SearchNode};
use cmpp_core::exact::constraint_set;
use cmpp_core::generate::{random_agents, random_connected_graph};
use cmpp_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_instance(seed: u64, max_vertices: usize, agents: std::ops::RangeInclusive<usize>) -> CmppInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_vertices);
    let extra = rng.gen_range(0..=n);
    let graph = Arc::new(random_connected_graph(&mut rng, n, extra).unwrap());
    let k = rng.gen_range(agents);
    random_agents(&mut rng, graph, k, false).unwrap()
}

/// Every simple path from `s` to `t`, by plain recursion.
fn all_simple_paths(g: &SparseGraph, s: VertexId, t: VertexId) -> Vec<Vec<VertexId>> {
    fn go(g: &SparseGraph, t: VertexId, stack: &mut Vec<VertexId>, out: &mut Vec<Vec<VertexId>>) {
        let v = *stack.last().unwrap();
        if v == t {
            out.push(stack.clone());
            return;
        }
        for &e in g.out_edges(v) {
            let w = g.head(e);
            if !stack.contains(&w) {
                stack.push(w);
                go(g, t, stack, out);
                stack.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(g, t, &mut vec![s], &mut out);
    out
}

/// Marginal cost of adding `path` on top of `base`, computed from scratch.
fn added_cost(g: &SparseGraph, base: &Solution, path: &[VertexId]) -> Cost {
    let before = total_cost(base, g).unwrap();
    let mut paths = base.paths.clone();
    paths.push(Path::new(path.to_vec()));
    total_cost(&Solution::new(paths), g).unwrap() - before
}

fn edges_of(g: &SparseGraph, path: &[VertexId]) -> Vec<EdgeId> {
    path.windows(2).map(|w| g.edge(w[0], w[1]).unwrap()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn incremental_ledger_matches_recomputation(seed in any::<u64>()) {
        let inst = small_instance(seed, 10, 1..=6);
        let g = &inst.graph;
        let sol = pp_initial(&inst, None).unwrap();
        let mut traffic = Traffic::new(g);
        for (_, p) in sol.iter() {
            traffic.apply_path(p, g).unwrap();
        }
        prop_assert_eq!(traffic.total(), total_cost(&sol, g).unwrap());
        let flow = compute_flow(&sol, g).unwrap();
        prop_assert_eq!(flow.total(), sol.iter().map(|(_, p)| p.edge_count() as u64).sum::<u64>());
        for v in g.vertices() {
            prop_assert_eq!(traffic.ledger().degree(v), congestion_degree(&flow, v, g).unwrap());
        }
        traffic.remove_path(sol.path(AgentId(0)), g).unwrap();
        let rest = Solution::new(sol.paths[1..].to_vec());
        prop_assert_eq!(traffic.total(), total_cost(&rest, g).unwrap());
    }

    #[test]
    fn low_level_search_is_optimal(seed in any::<u64>()) {
        let inst = small_instance(seed, 8, 2..=5);
        let g = &inst.graph;
        let others = without_first(&inst);
        let base = pp_initial(&others, None).unwrap();
        let flow = compute_flow(&base, g).unwrap();
        let a = inst.agent(AgentId(0));
        let path = dijkstra_min_delta(g, &flow, a.start, a.goal, &[], &[]).unwrap().unwrap();
        let found = added_cost(g, &base, &path);
        let best = all_simple_paths(g, a.start, a.goal)
            .iter()
            .map(|p| added_cost(g, &base, p))
            .min()
            .unwrap();
        prop_assert_eq!(found, best);
        prop_assert!(Solution::new(vec![path.clone()]).check(&first_only(&inst)).is_ok());
        let again = dijkstra_min_delta(g, &flow, a.start, a.goal, &[], &[]).unwrap().unwrap();
        prop_assert_eq!(path, again);
    }

    #[test]
    fn forbidding_an_edge_never_helps(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let inst = small_instance(seed, 10, 2..=5);
        let g = &inst.graph;
        let base = pp_initial(&without_first(&inst), None).unwrap();
        let flow = compute_flow(&base, g).unwrap();
        let a = inst.agent(AgentId(0));
        let Some(p) = dijkstra_min_delta(g, &flow, a.start, a.goal, &[], &[]).unwrap() else { return Ok(()) };
        let e = EdgeId::from_index(pick.index(g.edge_count().max(1)));
        if g.edge_count() == 0 {
            return Ok(());
        }
        if let Some(q) = dijkstra_min_delta(g, &flow, a.start, a.goal, &[e], &[]).unwrap() {
            prop_assert!(added_cost(g, &base, &q) >= added_cost(g, &base, &p));
            prop_assert!(!edges_of(g, &q).contains(&e));
        }
    }

    #[test]
    fn constrained_plans_honour_their_constraints(seed in any::<u64>()) {
        let inst = small_instance(seed, 10, 2..=4);
        let g = &inst.graph;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let sol = pp_initial(&inst, None).unwrap();
        let a = AgentId(0);
        let agent = *inst.agent(a);
        let mut set = ConstraintSet::new();
        let own = edges_of(g, sol.path(a));
        for _ in 0..rng.gen_range(0..3) {
            let e = EdgeId::from_index(rng.gen_range(0..g.edge_count().max(1)).min(g.edge_count().saturating_sub(1)));
            if g.edge_count() == 0 {
                break;
            }
            let _ = if rng.gen_bool(0.5) && !own.is_empty() {
                set.force(a, own[rng.gen_range(0..own.len())], g)
            } else {
                set.forbid(a, e, g)
            };
        }
        let flow = compute_flow(&Solution::new(sol.paths[1..].to_vec()), g).unwrap();
        let planned = plan_with_constraints(g, &flow, a, agent.start, agent.goal, &set).unwrap();
        let fallback = route_exhaustive(g, &flow, agent.start, agent.goal, set.forced(a), set.forbidden(a), 1_000_000).unwrap();
        let exists = all_simple_paths(g, agent.start, agent.goal).iter().any(|p| {
            let es = edges_of(g, p);
            set.forced(a).iter().all(|e| es.contains(e)) && !set.forbidden(a).iter().any(|e| es.contains(e))
        });
        prop_assert_eq!(fallback.is_some(), exists);
        for p in planned.iter().chain(fallback.iter()) {
            let es = edges_of(g, p);
            prop_assert!(set.forced(a).iter().all(|e| es.iter().filter(|x| *x == e).count() == 1));
            prop_assert!(!set.forbidden(a).iter().any(|e| es.contains(e)));
            prop_assert!(Solution::new(vec![p.clone()]).check(&first_only(&inst)).is_ok());
        }
    }

    #[test]
    fn exact_solver_beats_every_assignment(seed in any::<u64>()) {
        let inst = small_instance(seed, 8, 2..=3);
        let g = &inst.graph;
        let exact = exact_solve(&inst, &ExactOptions::unbounded()).unwrap();
        let options: Vec<Vec<Vec<VertexId>>> = inst
            .agent_ids()
            .map(|a| all_simple_paths(g, inst.start(a), inst.goal(a)))
            .collect();
        let mut best = Cost::MAX;
        let mut idx = vec![0; options.len()];
        'outer: loop {
            let sol = Solution::new(idx.iter().zip(&options).map(|(&i, o)| Path::new(o[i].clone())).collect());
            best = best.min(total_cost(&sol, g).unwrap());
            for k in 0..idx.len() {
                idx[k] += 1;
                if idx[k] < options[k].len() {
                    continue 'outer;
                }
                idx[k] = 0;
            }
            break;
        }
        prop_assert_eq!(exact.cost, best);
        prop_assert_eq!(total_cost(&exact.solution, g).unwrap(), exact.cost);
    }

    #[test]
    fn wider_caps_never_cost_more(seed in any::<u64>()) {
        let inst = small_instance(seed, 10, 2..=4);
        let mut last = Cost::MAX;
        for cap in [LengthCap::Slack(0), LengthCap::Slack(1), LengthCap::Slack(3), LengthCap::Unbounded] {
            let r = exact_solve(&inst, &ExactOptions { cap, ..ExactOptions::default() }).unwrap();
            prop_assert!(r.cost <= last);
            last = r.cost;
        }
    }

    #[test]
    fn solver_outputs_validate(seed in any::<u64>(), omega in prop::sample::select(vec![1.0, 1.3, 2.0])) {
        let inst = small_instance(seed, 12, 2..=5);
        let pp = pp_initial(&inst, None).unwrap();
        prop_assert!(validate_minlp(&pp, &inst).is_empty());
        let r = solve(&inst, &SolverConfig::with_omega(omega)).unwrap();
        prop_assert!(validate_claims(&r.best, &inst, None, Some(r.best_cost)).is_empty());
        prop_assert!(r.best_cost <= r.initial_cost);
        prop_assert!(r.improvement_trace.windows(2).all(|w| w[1].1 < w[0].1));
        let opt = exact_solve(&inst, &ExactOptions::unbounded()).unwrap();
        prop_assert!(validate_minlp(&opt.solution, &inst).is_empty());
        prop_assert!(r.best_cost as f64 <= omega * opt.cost as f64 + 1e-9);
        if omega == 1.0 {
            prop_assert_eq!(r.best_cost, opt.cost);
        }
    }

    #[test]
    fn search_is_deterministic(seed in any::<u64>()) {
        let inst = small_instance(seed, 12, 3..=5);
        let config = SolverConfig { node_budget: Some(20), ..SolverConfig::default() };
        let a = solve(&inst, &config).unwrap();
        let b = solve(&inst, &config).unwrap();
        prop_assert_eq!(a.best, b.best);
        prop_assert_eq!(a.nodes_expanded, b.nodes_expanded);
        prop_assert_eq!(a.nodes_pruned, b.nodes_pruned);
    }

    #[test]
    fn split_preserves_the_solution_space(seed in any::<u64>(), depth in 0usize..4) {
        // Walk a few expansions down the tree, then check that the best solution
        // under the node's constraints is the better of its two children's, and
        // that every bound stays below its node's optimum.
        let inst = small_instance(seed, 9, 2..=4);
        let g = &inst.graph;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut node = SearchNode::root(pp_initial(&inst, None).unwrap(), g).unwrap();
        for _ in 0..=depth {
            let Some(v) = select_vertex(&node, g) else { return Ok(()) };
            let (a, e) = select_agent(&node, g, v).unwrap().unwrap();
            let (p, q) = expand_node(&node, &inst, a, e, v).unwrap();
            let under = |c: &ConstraintSet| match exact_solve_constrained(&inst, c, &ExactOptions::unbounded()) {
                Ok(r) => Some(r.cost),
                Err(CmppError::NoAssignment) => None,
                Err(e) => panic!("{e}"),
            };
            let (n_opt, p_opt, q_opt) = (under(&node.constraints), under(&p.constraints), under(&q.constraints));
            prop_assert_eq!(n_opt, [p_opt, q_opt].into_iter().flatten().min());
            for (child, opt) in [(&p, p_opt), (&q, q_opt)] {
                for mode in [BoundMode::PathLength, BoundMode::ForcedFlow] {
                    match (lower_bound(child, &inst, mode).unwrap(), opt) {
                        (Some(lb), Some(opt)) => prop_assert!(lb <= opt, "{:?}: {} > {}", mode, lb, opt),
                        (None, Some(_)) => prop_assert!(false, "bound declared a feasible node dead"),
                        _ => {}
                    }
                }
                if let Some(c) = child.cost {
                    prop_assert!(child.is_sound(g));
                    prop_assert_eq!(c, total_cost(&child.solution, g).unwrap());
                }
            }
            node = if q.is_dead() || rng.gen_bool(0.5) { p } else { q };
        }
    }

    #[test]
    fn random_constraint_sets_keep_bounds_admissible(seed in any::<u64>()) {
        let inst = small_instance(seed, 9, 2..=4);
        let g = &inst.graph;
        let mut rng = ChaCha8Rng::seed_from_u64(!seed);
        let sol = pp_initial(&inst, None).unwrap();
        let mut forced = Vec::new();
        let mut forbidden = Vec::new();
        for (a, p) in sol.iter() {
            for e in edges_of(g, p) {
                match rng.gen_range(0..4) {
                    0 => forced.push((a, e)),
                    1 => forbidden.push((a, e)),
                    _ => {}
                }
            }
        }
        let set = constraint_set(g, &forced, &forbidden).unwrap();
        let mut node = SearchNode::root(sol, g).unwrap();
        node.constraints = set.clone();
        let lb = lower_bound(&node, &inst, BoundMode::ForcedFlow).unwrap();
        match exact_solve_constrained(&inst, &set, &ExactOptions::unbounded()) {
            Ok(r) => prop_assert!(lb.is_some_and(|lb| lb <= r.cost)),
            Err(CmppError::NoAssignment) => {}
            Err(e) => panic!("{e}"),
        }
    }
}

/// The instance without its first agent.
fn without_first(inst: &CmppInstance) -> CmppInstance {
    CmppInstance::new(Arc::clone(&inst.graph), inst.agents[1..].to_vec()).unwrap()
}

fn first_only(inst: &CmppInstance) -> CmppInstance {
    CmppInstance::new(Arc::clone(&inst.graph), inst.agents[..1].to_vec()).unwrap()
}
