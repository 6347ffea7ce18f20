//! Random instances for tests and benchmarks.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::graph::{SparseGraph, VertexId};
use crate::instance::CmppInstance;

/// Connected graph on `n` vertices: a random spanning tree plus `extra`
/// further random undirected edges (fewer if the graph saturates).
/// Vertices sit at random points of the unit square scaled by 10.
pub fn random_connected_graph(rng: &mut impl Rng, n: usize, extra: usize) -> Result<SparseGraph> {
    let positions: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push((order[i].min(order[j]), order[i].max(order[j])));
    }
    let max_edges = n * n.saturating_sub(1) / 2;
    let target = (edges.len() + extra).min(max_edges);
    while edges.len() < target {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let pair = (u.min(v), u.max(v));
        if u != v && !edges.contains(&pair) {
            edges.push(pair);
        }
    }
    SparseGraph::from_positions(&positions, edges)
}

/// `k` agents with uniformly random start and goal vertices. With
/// `distinct`, each agent's start differs from its goal.
pub fn random_agents(rng: &mut impl Rng, graph: Arc<SparseGraph>, k: usize, distinct: bool) -> Result<CmppInstance> {
    let n = graph.vertex_count() as u32;
    let pairs: Vec<(VertexId, VertexId)> = (0..k)
        .map(|_| loop {
            let s = rng.gen_range(0..n);
            let g = rng.gen_range(0..n);
            if !distinct || s != g || n < 2 {
                break (VertexId(s), VertexId(g));
            }
        })
        .collect();
    CmppInstance::from_pairs(graph, &pairs)
}
