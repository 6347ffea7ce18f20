//! Sparse graph over a grid map, with the cell-to-vertex map `f` and the
//! vertex-to-cell map `g`.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use cmpp_core::{Agent, CmppInstance, SparseGraph, Vertex, VertexId};

use crate::error::{Result, SimError};
use crate::map::{Cell, GridMap};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SparsifyOptions {
    /// Anchor spacing in cells.
    pub interval: usize,
    /// Drop edges whose representative cells are more than
    /// `factor * interval` grid steps apart. `None` keeps every edge.
    pub max_edge_factor: Option<f64>,
}

impl SparsifyOptions {
    pub fn new(interval: usize) -> Self {
        Self { interval, max_edge_factor: None }
    }
}

#[derive(Clone, Debug)]
pub struct Abstraction {
    pub sparse: Arc<SparseGraph>,
    /// `f`: sparse vertex of every open cell.
    to_sparse: Vec<Option<VertexId>>,
    /// `g`: representative cell of every vertex.
    to_grid: Vec<Cell>,
}

impl Abstraction {
    pub fn f(&self, c: Cell) -> Option<VertexId> {
        self.to_sparse.get(c).copied().flatten()
    }

    pub fn g(&self, v: VertexId) -> Cell {
        self.to_grid[v.index()]
    }

    pub fn vertex_count(&self) -> usize {
        self.to_grid.len()
    }

    /// `|V| / |V*|`.
    pub fn reduction_ratio(&self, grid: &GridMap) -> f64 {
        self.to_grid.len() as f64 / grid.open_count() as f64
    }
}

/// Open cell nearest to `anchor` in grid steps, ignoring walls; ties go to the
/// smaller cell index.
fn snap(grid: &GridMap, anchor: Cell) -> Option<Cell> {
    let (ax, ay) = grid.coords(anchor);
    let (w, h) = (grid.width() as isize, grid.height() as isize);
    for r in 0..(w + h) {
        let mut best = None;
        for dy in -r..=r {
            let y = ay as isize + dy;
            if y < 0 || y >= h {
                continue;
            }
            let rest = r - dy.abs();
            for dx in [-rest, rest] {
                let x = ax as isize + dx;
                if x < 0 || x >= w {
                    continue;
                }
                let c = grid.cell(x as usize, y as usize);
                if grid.is_open(c) && best.is_none_or(|b| c < b) {
                    best = Some(c);
                }
            }
        }
        if best.is_some() {
            return best;
        }
    }
    None
}

/// Samples anchors every `interval` rows and columns, snaps them to open
/// cells and assigns every open cell to its nearest vertex by grid BFS (ties
/// to the smaller vertex id). Two vertices are joined when their regions
/// touch, so `interval = 1` reproduces the 4-connected grid.
pub fn sparsify(grid: &GridMap, options: &SparsifyOptions) -> Result<Abstraction> {
    let k = options.interval;
    if k == 0 {
        return Err(SimError::Interval);
    }
    if grid.open_count() == 0 {
        return Err(SimError::Empty);
    }
    let mut reps = BTreeSet::new();
    for row in (0..grid.height()).step_by(k) {
        for col in (0..grid.width()).step_by(k) {
            if let Some(c) = snap(grid, grid.cell(col, row)) {
                reps.insert(c);
            }
        }
    }
    let comps = grid.components();
    let mut covered = BTreeSet::new();
    for &c in &reps {
        covered.insert(comps[c]);
    }
    for c in grid.open_cells() {
        if covered.insert(comps[c]) {
            reps.insert(c);
        }
    }
    let to_grid: Vec<Cell> = reps.into_iter().collect();

    // Multi-source BFS; a cell joins the smallest region among its neighbours
    // one step closer, which is the smallest id among its nearest vertices.
    let mut dist = vec![u32::MAX; grid.cell_count()];
    let mut region: Vec<Option<VertexId>> = vec![None; grid.cell_count()];
    let mut queue = VecDeque::new();
    for (i, &c) in to_grid.iter().enumerate() {
        dist[c] = 0;
        region[c] = Some(VertexId::from_index(i));
        queue.push_back(c);
    }
    while let Some(c) = queue.pop_front() {
        for n in grid.neighbors(c) {
            if dist[n] == u32::MAX {
                dist[n] = dist[c] + 1;
                queue.push_back(n);
            }
            if dist[n] == dist[c] + 1 && region[n].is_none_or(|r| region[c].is_some_and(|rc| rc < r)) {
                region[n] = region[c];
            }
        }
    }

    let mut edges = BTreeSet::new();
    for c in grid.open_cells() {
        let a = region[c].expect("every open cell has a region");
        for n in grid.neighbors(c) {
            let b = region[n].expect("every open cell has a region");
            if a < b {
                edges.insert((a.index(), b.index()));
            }
        }
    }
    if let Some(factor) = options.max_edge_factor {
        let limit = (factor * k as f64).floor() as u32;
        let hops: Vec<Vec<Option<u32>>> = to_grid.iter().map(|&c| grid.bfs(&[c])).collect();
        edges.retain(|&(a, b)| hops[a][to_grid[b]].is_some_and(|d| d <= limit));
    }

    let vertices = to_grid
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let (x, y) = grid.coords(c);
            Vertex { label: i as i64, x: x as f64, y: y as f64 }
        })
        .collect();
    let sparse = SparseGraph::new(vertices, edges, true)?;
    Ok(Abstraction { sparse: Arc::new(sparse), to_sparse: region, to_grid })
}

/// CMPP instance over the sparse graph for agents at `starts` heading to
/// `goals`, both mapped through `f`.
pub fn lift_instance(
    abstraction: &Abstraction,
    starts: &[Cell],
    goals: &[Cell],
    grid: &GridMap,
) -> Result<CmppInstance> {
    let lift = |c: Cell| {
        abstraction.f(c).ok_or_else(|| {
            let (x, y) = if c < grid.cell_count() { grid.coords(c) } else { (c, 0) };
            SimError::Blocked { x, y }
        })
    };
    let agents = starts
        .iter()
        .zip(goals)
        .enumerate()
        .map(|(i, (&s, &g))| Ok(Agent { label: i as i64, start: lift(s)?, goal: lift(g)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(CmppInstance::new(Arc::clone(&abstraction.sparse), agents)?)
}
