//! Symmetric directed graphs with planar vertex coordinates.
//!
//! Vertices and edges are addressed by dense indices. Edges are ordered
//! lexicographically by `(tail, head)`, so edge ids and the per-vertex
//! adjacency lists are stable for a given edge set.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{CmppError, Result};

macro_rules! index_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }

            #[inline]
            pub fn from_index(i: usize) -> Self {
                Self(i as u32)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt(f)
            }
        }
    };
}

index_type!(
    /// Dense vertex index into a [`SparseGraph`].
    VertexId
);
index_type!(
    /// Dense index of a directed edge.
    EdgeId
);
index_type!(
    /// Dense agent index into a [`crate::CmppInstance`].
    AgentId
);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vertex {
    /// External identifier, as used in instance files.
    pub label: i64,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug)]
pub struct SparseGraph {
    vertices: Vec<Vertex>,
    edges: Vec<(VertexId, VertexId)>,
    out_edges: Vec<Vec<EdgeId>>,
    in_edges: Vec<Vec<EdgeId>>,
    lookup: HashMap<(VertexId, VertexId), EdgeId>,
    labels: HashMap<i64, VertexId>,
}

impl SparseGraph {
    /// Builds a graph from vertices and directed edges given as index pairs.
    ///
    /// With `symmetrize` every edge is added in both directions; otherwise the
    /// edge list must already be symmetric. Self-loops and duplicate labels
    /// are rejected; duplicate edges are merged.
    pub fn new(
        vertices: Vec<Vertex>,
        edges: impl IntoIterator<Item = (usize, usize)>,
        symmetrize: bool,
    ) -> Result<Self> {
        let n = vertices.len();
        let mut labels = HashMap::with_capacity(n);
        for (i, v) in vertices.iter().enumerate() {
            if labels.insert(v.label, VertexId::from_index(i)).is_some() {
                return Err(CmppError::Graph(format!("duplicate vertex id {}", v.label)));
            }
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(CmppError::Graph(format!("edge ({u}, {v}) references a missing vertex")));
            }
            if u == v {
                return Err(CmppError::Graph(format!("self-loop at vertex {}", vertices[u].label)));
            }
            set.insert((u, v));
            if symmetrize {
                set.insert((v, u));
            }
        }
        if !symmetrize {
            if let Some(&(u, v)) = set.iter().find(|&&(u, v)| !set.contains(&(v, u))) {
                return Err(CmppError::Graph(format!(
                    "edge ({}, {}) has no reverse edge",
                    vertices[u].label, vertices[v].label
                )));
            }
        }

        let edges: Vec<(VertexId, VertexId)> =
            set.into_iter().map(|(u, v)| (VertexId::from_index(u), VertexId::from_index(v))).collect();
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        let mut lookup = HashMap::with_capacity(edges.len());
        for (i, &(u, v)) in edges.iter().enumerate() {
            let e = EdgeId::from_index(i);
            out_edges[u.index()].push(e);
            in_edges[v.index()].push(e);
            lookup.insert((u, v), e);
        }
        Ok(Self { vertices, edges, out_edges, in_edges, lookup, labels })
    }

    /// Builds a graph whose vertex labels equal their indices.
    pub fn from_positions(
        positions: &[(f64, f64)],
        undirected_edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let vertices = positions.iter().enumerate().map(|(i, &(x, y))| Vertex { label: i as i64, x, y }).collect();
        Self::new(vertices, undirected_edges, true)
    }

    /// 4-connected `width` x `height` grid; vertex `row * width + col` sits at `(col, row)`.
    pub fn grid(width: usize, height: usize) -> Self {
        let mut positions = Vec::with_capacity(width * height);
        let mut edges = Vec::new();
        for row in 0..height {
            for col in 0..width {
                let id = row * width + col;
                positions.push((col as f64, row as f64));
                if col + 1 < width {
                    edges.push((id, id + 1));
                }
                if row + 1 < height {
                    edges.push((id, id + width));
                }
            }
        }
        Self::from_positions(&positions, edges).expect("grid construction is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl ExactSizeIterator<Item = VertexId> + '_ {
        (0..self.vertices.len()).map(VertexId::from_index)
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v.index()]
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        v.index() < self.vertices.len()
    }

    pub fn position(&self, v: VertexId) -> (f64, f64) {
        let p = &self.vertices[v.index()];
        (p.x, p.y)
    }

    pub fn by_label(&self, label: i64) -> Option<VertexId> {
        self.labels.get(&label).copied()
    }

    pub fn label(&self, v: VertexId) -> i64 {
        self.vertices[v.index()].label
    }

    #[inline]
    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        self.edges[e.index()]
    }

    #[inline]
    pub fn tail(&self, e: EdgeId) -> VertexId {
        self.edges[e.index()].0
    }

    #[inline]
    pub fn head(&self, e: EdgeId) -> VertexId {
        self.edges[e.index()].1
    }

    #[inline]
    pub fn edge(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        self.lookup.get(&(u, v)).copied()
    }

    pub fn reverse(&self, e: EdgeId) -> EdgeId {
        let (u, v) = self.endpoints(e);
        self.lookup[&(v, u)]
    }

    /// Outgoing edges δ+(v), sorted by head.
    #[inline]
    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out_edges[v.index()]
    }

    /// Incoming edges δ−(v), sorted by tail.
    #[inline]
    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.in_edges[v.index()]
    }

    pub fn edge_ids(&self) -> impl ExactSizeIterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId::from_index)
    }

    pub fn distance(&self, a: VertexId, b: VertexId) -> f64 {
        let (ax, ay) = self.position(a);
        let (bx, by) = self.position(b);
        (ax - bx).hypot(ay - by)
    }

    /// Hop distances from `source`, skipping edges for which `blocked` holds.
    pub fn bfs_hops(&self, source: VertexId, blocked: impl Fn(EdgeId) -> bool) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[source.index()] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let d = dist[u.index()].unwrap();
            for &e in self.out_edges(u) {
                let w = self.head(e);
                if dist[w.index()].is_none() && !blocked(e) {
                    dist[w.index()] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Hop-shortest path from `source` to `target`, preferring smaller vertex ids on ties.
    pub fn bfs_path(&self, source: VertexId, target: VertexId) -> Option<Vec<VertexId>> {
        // Distances from the target let us walk forward greedily from the source.
        let dist = self.bfs_hops(target, |_| false);
        dist[source.index()]?;
        let mut path = vec![source];
        let mut cur = source;
        while cur != target {
            let d = dist[cur.index()].unwrap();
            let next = self.out_edges(cur).iter().map(|&e| self.head(e)).find(|w| dist[w.index()] == Some(d - 1))?;
            path.push(next);
            cur = next;
        }
        Some(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric_and_loop_free() {
        let g = SparseGraph::grid(3, 3);
        assert_eq!(g.vertex_count(), 9);
        assert_eq!(g.edge_count(), 24);
        for e in g.edge_ids() {
            let (u, v) = g.endpoints(e);
            assert_ne!(u, v);
            assert!(g.edge(v, u).is_some());
            assert!(g.out_edges(u).contains(&e));
            assert!(g.in_edges(v).contains(&e));
        }
        assert_eq!(g.in_edges(VertexId(4)).len(), 4);
    }

    #[test]
    fn rejects_self_loops_and_asymmetric_lists() {
        let verts = |n: usize| -> Vec<Vertex> { (0..n).map(|i| Vertex { label: i as i64, x: 0.0, y: 0.0 }).collect() };
        assert!(SparseGraph::new(verts(2), [(0, 0)], true).is_err());
        assert!(SparseGraph::new(verts(2), [(0, 1)], false).is_err());
        assert!(SparseGraph::new(verts(2), [(0, 1), (1, 0)], false).is_ok());
        assert!(SparseGraph::new(verts(2), [(0, 2)], true).is_err());
    }

    #[test]
    fn bfs_path_prefers_small_ids() {
        let g = SparseGraph::grid(3, 3);
        let p = g.bfs_path(VertexId(0), VertexId(8)).unwrap();
        assert_eq!(p, [0, 1, 2, 5, 8].map(VertexId));
    }
}
