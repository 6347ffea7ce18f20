//! One-step collision-free moves by priority inheritance with backtracking.

use std::collections::HashMap;
use std::sync::Arc;

use crate::map::{Cell, GridMap};

/// Candidate tie-breaking among moves of equal distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TieBias {
    /// Up, right, down, left.
    Fixed,
    /// Prefer up at odd x and down at even x; right at odd y and left at even y.
    Parity,
}

/// Cached BFS distance tables keyed by target cell.
#[derive(Debug)]
pub struct DistanceCache {
    grid: Arc<GridMap>,
    tables: HashMap<Cell, Arc<[u32]>>,
    capacity: usize,
}

impl DistanceCache {
    pub fn new(grid: Arc<GridMap>) -> Self {
        Self { grid, tables: HashMap::new(), capacity: 4096 }
    }

    /// Hop distance table towards `target`; unreachable cells hold `u32::MAX`.
    pub fn to(&mut self, target: Cell) -> Arc<[u32]> {
        if let Some(t) = self.tables.get(&target) {
            return Arc::clone(t);
        }
        if self.tables.len() >= self.capacity {
            self.tables.clear();
        }
        let table: Arc<[u32]> = self.grid.bfs(&[target]).into_iter().map(|d| d.unwrap_or(u32::MAX)).collect();
        self.tables.insert(target, Arc::clone(&table));
        table
    }

    pub fn grid(&self) -> &GridMap {
        &self.grid
    }
}

fn parity_rank(grid: &GridMap, from: Cell, d: usize) -> u8 {
    let (x, y) = grid.coords(from);
    let preferred = [
        x % 2 == 1, // up
        y % 2 == 1, // right
        x % 2 == 0, // down
        y % 2 == 0, // left
    ];
    u8::from(!preferred[d])
}

struct Step<'a> {
    grid: &'a GridMap,
    now: &'a [Cell],
    next: Vec<Option<Cell>>,
    occupied_now: HashMap<Cell, usize>,
    occupied_next: HashMap<Cell, usize>,
    candidates: Vec<Vec<Cell>>,
}

impl Step<'_> {
    fn pibt(&mut self, i: usize) -> bool {
        let here = self.now[i];
        for k in 0..self.candidates[i].len() {
            let u = self.candidates[i][k];
            if self.occupied_next.contains_key(&u) {
                continue;
            }
            let holder = self.occupied_now.get(&u).copied();
            if let Some(j) = holder {
                if self.next[j] == Some(here) {
                    continue;
                }
            }
            self.occupied_next.insert(u, i);
            self.next[i] = Some(u);
            if let Some(j) = holder {
                if j != i && self.next[j].is_none() && !self.pibt(j) {
                    continue;
                }
            }
            return true;
        }
        self.occupied_next.insert(here, i);
        self.next[i] = Some(here);
        false
    }
}

/// Next cell of every agent. `order` lists agents from highest to lowest
/// priority. Agents must start on distinct open cells.
pub fn pibt_step(
    cache: &mut DistanceCache,
    positions: &[Cell],
    targets: &[Cell],
    order: &[usize],
    bias: TieBias,
) -> Vec<Cell> {
    let n = positions.len();
    let candidates: Vec<Vec<Cell>> = (0..n)
        .map(|i| {
            let table = cache.to(targets[i]);
            let grid = cache.grid();
            let here = positions[i];
            let mut c: Vec<(u32, u8, usize, Cell)> = (0..4)
                .filter_map(|d| grid.step(here, d).map(|u| (d, u)))
                .map(|(d, u)| {
                    let rank = match bias {
                        TieBias::Fixed => 0,
                        TieBias::Parity => parity_rank(grid, here, d),
                    };
                    (table[u], rank, d, u)
                })
                .collect();
            c.push((table[here], 0, 4, here));
            c.sort_unstable();
            c.into_iter().map(|t| t.3).collect()
        })
        .collect();

    let grid = cache.grid();
    let mut step = Step {
        grid,
        now: positions,
        next: vec![None; n],
        occupied_now: positions.iter().enumerate().map(|(i, &c)| (c, i)).collect(),
        occupied_next: HashMap::with_capacity(n),
        candidates,
    };
    for &i in order {
        if step.next[i].is_none() {
            step.pibt(i);
        }
    }
    debug_assert!(step
        .next
        .iter()
        .zip(positions)
        .all(|(nx, &p)| { nx.is_some_and(|c| c == p || step.grid.neighbors(p).any(|q| q == c)) }));
    step.next.into_iter().map(|c| c.expect("every agent is assigned")).collect()
}

/// Vertex and swap conflicts between two consecutive configurations.
pub fn conflicts(before: &[Cell], after: &[Cell]) -> Vec<String> {
    let mut out = Vec::new();
    let mut at: HashMap<Cell, usize> = HashMap::with_capacity(after.len());
    for (i, &c) in after.iter().enumerate() {
        if let Some(j) = at.insert(c, i) {
            out.push(format!("agents {j} and {i} share cell {c}"));
        }
    }
    let was: HashMap<Cell, usize> = before.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    for (i, (&b, &a)) in before.iter().zip(after).enumerate() {
        if a == b {
            continue;
        }
        if let Some(&j) = was.get(&a) {
            if j != i && after[j] == b && i < j {
                out.push(format!("agents {i} and {j} swap cells {b} and {a}"));
            }
        }
    }
    out
}
