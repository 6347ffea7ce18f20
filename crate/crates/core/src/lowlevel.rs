//! Single-agent planning against the flow of the other agents.
//!
//! Edge weights are the incremental congestion [`delta_cost`] of entering
//! the head vertex. Weights are at least one, so a label-setting search is
//! exact and its optimum is a simple path.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::congestion::{delta_cost, Cost, FlowField};
use crate::constraints::ConstraintSet;
use crate::error::{CmppError, Result};
use crate::graph::{AgentId, EdgeId, SparseGraph, VertexId};
use crate::instance::Path;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct Label {
    cost: Cost,
    hops: u32,
}

/// Label-setting search from `start` to `goal` with caller-supplied edge
/// weights. Edges for which `weight` returns `None` are unusable. Vertices
/// flagged in `excluded` are never entered (`start` is exempt).
///
/// Ties are broken on (cost, hop count, predecessor id), which makes the
/// result independent of heap internals.
pub(crate) fn best_path(
    graph: &SparseGraph,
    start: VertexId,
    goal: VertexId,
    excluded: Option<&[bool]>,
    mut weight: impl FnMut(EdgeId) -> Result<Option<Cost>>,
) -> Result<Option<(Cost, Vec<VertexId>)>> {
    if start == goal {
        return Ok(Some((0, vec![start])));
    }
    let n = graph.vertex_count();
    let mut best: Vec<Option<Label>> = vec![None; n];
    let mut pred: Vec<u32> = vec![u32::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[start.index()] = Some(Label { cost: 0, hops: 0 });
    heap.push(Reverse((Label { cost: 0, hops: 0 }, start)));

    while let Some(Reverse((label, u))) = heap.pop() {
        if done[u.index()] || best[u.index()] != Some(label) {
            continue;
        }
        done[u.index()] = true;
        if u == goal {
            break;
        }
        for &e in graph.out_edges(u) {
            let w = graph.head(e);
            if done[w.index()] || excluded.is_some_and(|x| x[w.index()]) {
                continue;
            }
            let Some(step) = weight(e)? else { continue };
            let next = Label { cost: label.cost.checked_add(step).ok_or(CmppError::Overflow)?, hops: label.hops + 1 };
            let better = match best[w.index()] {
                None => true,
                Some(cur) => match next.cmp(&cur) {
                    Ordering::Less => true,
                    Ordering::Equal => u.0 < pred[w.index()],
                    Ordering::Greater => false,
                },
            };
            if better {
                if best[w.index()] != Some(next) {
                    heap.push(Reverse((next, w)));
                }
                best[w.index()] = Some(next);
                pred[w.index()] = u.0;
            }
        }
    }

    let Some(label) = best[goal.index()].filter(|_| done[goal.index()]) else {
        return Ok(None);
    };
    let mut path = vec![goal];
    let mut cur = goal;
    while cur != start {
        cur = VertexId(pred[cur.index()]);
        path.push(cur);
    }
    path.reverse();
    Ok(Some((label.cost, path)))
}

/// Single-source variant of [`best_path`] returning the optimal cost to every vertex.
pub(crate) fn cost_tree(
    graph: &SparseGraph,
    start: VertexId,
    mut weight: impl FnMut(EdgeId) -> Option<Cost>,
) -> Vec<Option<Cost>> {
    let n = graph.vertex_count();
    let mut best: Vec<Option<Cost>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[start.index()] = Some(0);
    heap.push(Reverse((0 as Cost, start)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if done[u.index()] {
            continue;
        }
        done[u.index()] = true;
        for &e in graph.out_edges(u) {
            let w = graph.head(e);
            if done[w.index()] {
                continue;
            }
            let Some(step) = weight(e) else { continue };
            let next = d.saturating_add(step);
            if best[w.index()].is_none_or(|cur| next < cur) {
                best[w.index()] = Some(next);
                heap.push(Reverse((next, w)));
            }
        }
    }
    best
}

/// Minimum-ΔC simple path from `start` to `goal`.
///
/// `flow` must not contain the planning agent's own path. Returns `Ok(None)`
/// when no path avoids `forbidden` and `excluded`.
pub fn dijkstra_min_delta(
    graph: &SparseGraph,
    flow: &FlowField,
    start: VertexId,
    goal: VertexId,
    forbidden: &[EdgeId],
    excluded: &[VertexId],
) -> Result<Option<Path>> {
    for v in [start, goal] {
        if !graph.contains_vertex(v) {
            return Err(CmppError::UnknownVertex(v));
        }
    }
    let mask = (!excluded.is_empty()).then(|| {
        let mut mask = vec![false; graph.vertex_count()];
        for v in excluded {
            mask[v.index()] = true;
        }
        mask
    });
    let found = best_path(graph, start, goal, mask.as_deref(), |e| {
        if forbidden.contains(&e) {
            Ok(None)
        } else {
            delta_cost(flow, e, graph).map(Some)
        }
    })?;
    Ok(found.map(|(_, p)| Path::new(p)))
}

/// Plans `agent` from `start` to `goal` honouring its forced and forbidden
/// edges in `constraints`.
///
/// Forced edges are visited in order of the Euclidean distance from `start`
/// to their tail (ties by edge id); consecutive segments are joined with
/// [`dijkstra_min_delta`]. Each segment avoids vertices used by earlier
/// segments, the endpoints of forced edges still to come and the goal, so
/// the concatenation is simple. Any failing segment makes the whole plan
/// infeasible.
pub fn plan_with_constraints(
    graph: &SparseGraph,
    flow: &FlowField,
    agent: AgentId,
    start: VertexId,
    goal: VertexId,
    constraints: &ConstraintSet,
) -> Result<Option<Path>> {
    let c = constraints.agent(agent);
    plan_route(graph, flow, start, goal, &c.forced, &c.forbidden)
}

pub(crate) fn plan_route(
    graph: &SparseGraph,
    flow: &FlowField,
    start: VertexId,
    goal: VertexId,
    forced: &[EdgeId],
    forbidden: &[EdgeId],
) -> Result<Option<Path>> {
    if forced.is_empty() {
        return dijkstra_min_delta(graph, flow, start, goal, forbidden, &[]);
    }
    if start == goal {
        return Ok(None);
    }
    let mut order = forced.to_vec();
    order.sort_by(|&a, &b| {
        let da = graph.distance(start, graph.tail(a));
        let db = graph.distance(start, graph.tail(b));
        da.total_cmp(&db).then(a.cmp(&b))
    });

    let n = graph.vertex_count();
    // Reserved vertices: endpoints of pending forced edges and the goal.
    let mut reserved = vec![0u32; n];
    for &e in &order {
        let (u, v) = graph.endpoints(e);
        reserved[u.index()] += 1;
        reserved[v.index()] += 1;
    }
    reserved[goal.index()] += 1;
    let mut used = vec![false; n];
    used[start.index()] = true;

    let mut route = vec![start];
    let mut current = start;
    let mut blocked = vec![false; n];
    let mut segment =
        |from: VertexId, to: VertexId, used: &[bool], reserved: &[u32]| -> Result<Option<Vec<VertexId>>> {
            if from == to {
                return Ok(Some(vec![from]));
            }
            for v in 0..n {
                blocked[v] = used[v] || (reserved[v] > 0 && v != to.index());
            }
            let found = best_path(graph, from, to, Some(&blocked), |e| {
                if forbidden.binary_search(&e).is_ok() {
                    Ok(None)
                } else {
                    delta_cost(flow, e, graph).map(Some)
                }
            })?;
            Ok(found.map(|(_, p)| p))
        };

    for (j, &e) in order.iter().enumerate() {
        let (tail, head) = graph.endpoints(e);
        reserved[tail.index()] -= 1;
        reserved[head.index()] -= 1;
        if used[tail.index()] && tail != current {
            return Ok(None);
        }
        let Some(seg) = segment(current, tail, &used, &reserved)? else {
            return Ok(None);
        };
        for &v in &seg[1..] {
            used[v.index()] = true;
            route.push(v);
        }
        // The head may only be reserved as the tail of the very next forced
        // edge, or as the goal once no forced edge remains.
        let next_tail = order.get(j + 1).map(|&n| graph.tail(n));
        let expected = u32::from(next_tail == Some(head)) + u32::from(head == goal);
        if used[head.index()] || reserved[head.index()] != expected || (head == goal && next_tail.is_some()) {
            return Ok(None);
        }
        used[head.index()] = true;
        route.push(head);
        current = head;
    }
    reserved[goal.index()] -= 1;
    if current != goal {
        if used[goal.index()] {
            return Ok(None);
        }
        let Some(seg) = segment(current, goal, &used, &reserved)? else {
            return Ok(None);
        };
        route.extend_from_slice(&seg[1..]);
    }
    Ok(Some(Path::new(route)))
}

/// Exhaustive depth-first search for a minimum-ΔC simple path that contains
/// every forced edge and avoids every forbidden one.
///
/// Used when the ordered stitching of [`plan_with_constraints`] fails, so a
/// constraint region is only declared empty when it really is. `max_steps`
/// bounds the number of DFS extensions; when it is exhausted the best path
/// found so far (if any) is returned.
pub fn route_exhaustive(
    graph: &SparseGraph,
    flow: &FlowField,
    start: VertexId,
    goal: VertexId,
    forced: &[EdgeId],
    forbidden: &[EdgeId],
    max_steps: u64,
) -> Result<Option<Path>> {
    if forced.is_empty() {
        return dijkstra_min_delta(graph, flow, start, goal, forbidden, &[]);
    }
    if start == goal {
        return Ok(None);
    }
    let n = graph.vertex_count();
    let mut forced_out: Vec<Option<EdgeId>> = vec![None; n];
    let mut forced_in: Vec<Option<EdgeId>> = vec![None; n];
    for &e in forced {
        let (u, v) = graph.endpoints(e);
        if forced_out[u.index()].replace(e).is_some() || forced_in[v.index()].replace(e).is_some() {
            // Two forced edges leaving (or entering) one vertex cannot share a simple path.
            return Ok(None);
        }
    }
    // Hop distances to the goal give an admissible remaining-cost bound.
    let to_goal = {
        let mut reverse_hops = vec![None; n];
        let mut queue = std::collections::VecDeque::from([goal]);
        reverse_hops[goal.index()] = Some(0u32);
        while let Some(v) = queue.pop_front() {
            let d = reverse_hops[v.index()].unwrap();
            for &e in graph.in_edges(v) {
                let u = graph.tail(e);
                if reverse_hops[u.index()].is_none() && forbidden.binary_search(&e).is_err() {
                    reverse_hops[u.index()] = Some(d + 1);
                    queue.push_back(u);
                }
            }
        }
        reverse_hops
    };

    struct Dfs<'a> {
        graph: &'a SparseGraph,
        flow: &'a FlowField,
        goal: VertexId,
        forbidden: &'a [EdgeId],
        forced_out: Vec<Option<EdgeId>>,
        forced_in: Vec<Option<EdgeId>>,
        forced_total: usize,
        to_goal: Vec<Option<u32>>,
        on_path: Vec<bool>,
        path: Vec<VertexId>,
        best: Option<(Cost, Vec<VertexId>)>,
        steps: u64,
        max_steps: u64,
    }

    impl Dfs<'_> {
        fn run(&mut self, u: VertexId, cost: Cost, forced_used: usize) -> Result<()> {
            if self.steps >= self.max_steps {
                return Ok(());
            }
            self.steps += 1;
            if u == self.goal {
                if forced_used == self.forced_total && self.best.as_ref().is_none_or(|(c, _)| cost < *c) {
                    self.best = Some((cost, self.path.clone()));
                }
                return Ok(());
            }
            let Some(rest) = self.to_goal[u.index()] else { return Ok(()) };
            if let Some((c, _)) = &self.best {
                if cost + Cost::from(rest) >= *c {
                    return Ok(());
                }
            }
            let choices: Vec<EdgeId> = match self.forced_out[u.index()] {
                Some(e) => vec![e],
                None => self.graph.out_edges(u).to_vec(),
            };
            for e in choices {
                let w = self.graph.head(e);
                if self.on_path[w.index()] || self.forbidden.binary_search(&e).is_ok() {
                    continue;
                }
                let is_forced = self.forced_out[u.index()] == Some(e);
                if self.forced_in[w.index()].is_some_and(|f| f != e) {
                    continue;
                }
                let step = delta_cost(self.flow, e, self.graph)?;
                self.on_path[w.index()] = true;
                self.path.push(w);
                self.run(w, cost.checked_add(step).ok_or(CmppError::Overflow)?, forced_used + usize::from(is_forced))?;
                self.path.pop();
                self.on_path[w.index()] = false;
            }
            Ok(())
        }
    }

    let mut on_path = vec![false; n];
    on_path[start.index()] = true;
    let mut dfs = Dfs {
        graph,
        flow,
        goal,
        forbidden,
        forced_out,
        forced_in,
        forced_total: forced.len(),
        to_goal,
        on_path,
        path: vec![start],
        best: None,
        steps: 0,
        max_steps,
    };
    if dfs.forced_in[start.index()].is_some() || dfs.forced_out[goal.index()].is_some() {
        return Ok(None);
    }
    dfs.run(start, 0, 0)?;
    Ok(dfs.best.map(|(_, p)| Path::new(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congestion::Traffic;

    fn vids(v: &[u32]) -> Vec<VertexId> {
        v.iter().map(|&x| VertexId(x)).collect()
    }

    fn path(v: &[u32]) -> Path {
        Path::new(vids(v))
    }

    #[test]
    fn empty_flow_grid_corner_to_corner() {
        let g = SparseGraph::grid(3, 3);
        let flow = FlowField::zeros(&g);
        let p = dijkstra_min_delta(&g, &flow, VertexId(0), VertexId(8), &[], &[]).unwrap().unwrap();
        assert_eq!(p.edge_count(), 4);
        assert_eq!(p.vertices(), vids(&[0, 1, 2, 5, 8]));
        let again = dijkstra_min_delta(&g, &flow, VertexId(0), VertexId(8), &[], &[]).unwrap().unwrap();
        assert_eq!(p, again);
    }

    #[test]
    fn unreachable_after_forbidding_inflow() {
        let g = SparseGraph::grid(3, 1);
        let flow = FlowField::zeros(&g);
        let e = g.edge(VertexId(1), VertexId(2)).unwrap();
        assert!(dijkstra_min_delta(&g, &flow, VertexId(0), VertexId(2), &[e], &[]).unwrap().is_none());
    }

    #[test]
    fn excluded_vertices_are_avoided_but_start_is_exempt() {
        let g = SparseGraph::grid(3, 3);
        let flow = FlowField::zeros(&g);
        let p = dijkstra_min_delta(&g, &flow, VertexId(0), VertexId(2), &[], &vids(&[1, 0])).unwrap().unwrap();
        assert_eq!(p.vertices(), vids(&[0, 3, 4, 5, 2]));
        assert!(dijkstra_min_delta(&g, &flow, VertexId(0), VertexId(2), &[], &vids(&[2])).unwrap().is_none());
    }

    #[test]
    fn degenerate_start_equals_goal() {
        let g = SparseGraph::grid(2, 2);
        let flow = FlowField::zeros(&g);
        let p = dijkstra_min_delta(&g, &flow, VertexId(3), VertexId(3), &[], &[]).unwrap().unwrap();
        assert_eq!(p.vertices(), vids(&[3]));
    }

    #[test]
    fn plan_without_constraints_matches_dijkstra() {
        let g = SparseGraph::grid(3, 3);
        let mut t = Traffic::new(&g);
        t.apply_path(&path(&[3, 4, 5]), &g).unwrap();
        let c = ConstraintSet::new();
        let a = plan_with_constraints(&g, t.flow(), AgentId(0), VertexId(1), VertexId(7), &c).unwrap();
        let b = dijkstra_min_delta(&g, t.flow(), VertexId(1), VertexId(7), &[], &[]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn forced_edge_on_the_line() {
        let g = SparseGraph::grid(5, 1);
        let mut c = ConstraintSet::new();
        c.force(AgentId(0), g.edge(VertexId(2), VertexId(3)).unwrap(), &g).unwrap();
        let flow = FlowField::zeros(&g);
        let p = plan_with_constraints(&g, &flow, AgentId(0), VertexId(0), VertexId(4), &c).unwrap().unwrap();
        assert_eq!(p.vertices(), vids(&[0, 1, 2, 3, 4]));
    }

    #[test]
    fn forced_edge_detour() {
        // 3x3 grid, travel 0 -> 2 but forced through (4, 7).
        let g = SparseGraph::grid(3, 3);
        let mut c = ConstraintSet::new();
        c.force(AgentId(0), g.edge(VertexId(4), VertexId(7)).unwrap(), &g).unwrap();
        let flow = FlowField::zeros(&g);
        let p = plan_with_constraints(&g, &flow, AgentId(0), VertexId(0), VertexId(2), &c).unwrap().unwrap();
        assert_eq!(p.vertices(), vids(&[0, 1, 4, 7, 8, 5, 2]));
        let t = Traffic::new(&g);
        assert_eq!(t.path_delta(&p, &g).unwrap(), 6);
    }

    #[test]
    fn exhaustive_fallback_recovers_feasible_order() {
        // Line 0-1-2-3: forced (1,2) and (2,3); the Euclidean order is the
        // path order here, so both planners agree.
        let g = SparseGraph::grid(4, 1);
        let e12 = g.edge(VertexId(1), VertexId(2)).unwrap();
        let e23 = g.edge(VertexId(2), VertexId(3)).unwrap();
        let flow = FlowField::zeros(&g);
        let p = route_exhaustive(&g, &flow, VertexId(0), VertexId(3), &[e12, e23], &[], 1000).unwrap().unwrap();
        assert_eq!(p.vertices(), vids(&[0, 1, 2, 3]));
        let q = plan_route(&g, &flow, VertexId(0), VertexId(3), &[e12, e23], &[]).unwrap().unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn exhaustive_and_stitching_agree_on_detour_through_two_forced_edges() {
        // 4 -> 5 forced through (1,0) then (6,7): 4-1-0-3-6-7-8-5.
        let g = SparseGraph::grid(3, 3);
        let e10 = g.edge(VertexId(1), VertexId(0)).unwrap();
        let e67 = g.edge(VertexId(6), VertexId(7)).unwrap();
        let mut forced = vec![e10, e67];
        forced.sort();
        let flow = FlowField::zeros(&g);
        let p = route_exhaustive(&g, &flow, VertexId(4), VertexId(5), &forced, &[], 10_000).unwrap().unwrap();
        assert_eq!(p.vertices(), vids(&[4, 1, 0, 3, 6, 7, 8, 5]));
        let q = plan_route(&g, &flow, VertexId(4), VertexId(5), &forced, &[]).unwrap().unwrap();
        assert_eq!(q.vertices(), p.vertices());
    }
}
