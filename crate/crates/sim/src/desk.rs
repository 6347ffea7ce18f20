//! Small benchmark maps: a warehouse with shelf blocks and narrow aisles, and
//! a random map with scattered obstacles.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::map::GridMap;

/// Shipped warehouse map, equal to [`warehouse`] with [`WarehouseLayout::default`].
pub const WAREHOUSE_MAP: &str = include_str!("../maps/warehouse-small.map");
/// Shipped random map, equal to [`random_map`]`(32, 32, 0.1, 1)`.
pub const RANDOM_MAP: &str = include_str!("../maps/random-32-32-10.map");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WarehouseLayout {
    /// Shelf blocks per row of blocks.
    pub blocks_x: usize,
    /// Rows of shelf blocks.
    pub blocks_y: usize,
    /// Cells per shelf block along x.
    pub shelf_len: usize,
    /// Aisle width between blocks, both axes.
    pub aisle: usize,
    /// Open margin around the shelf area.
    pub margin: usize,
}

impl Default for WarehouseLayout {
    fn default() -> Self {
        Self { blocks_x: 4, blocks_y: 6, shelf_len: 5, aisle: 1, margin: 2 }
    }
}

/// Shelf blocks one cell tall separated by aisles, inside an open margin.
pub fn warehouse(layout: &WarehouseLayout) -> GridMap {
    let WarehouseLayout { blocks_x, blocks_y, shelf_len, aisle, margin } = *layout;
    let width = 2 * margin + blocks_x * shelf_len + blocks_x.saturating_sub(1) * aisle;
    let height = 2 * margin + blocks_y + blocks_y.saturating_sub(1) * aisle;
    let mut open = vec![true; width * height];
    for by in 0..blocks_y {
        let row = margin + by * (1 + aisle);
        for bx in 0..blocks_x {
            let col = margin + bx * (shelf_len + aisle);
            for c in col..col + shelf_len {
                open[row * width + c] = false;
            }
        }
    }
    GridMap::new(width, height, open).expect("non-empty layout")
}

/// Blocks `round(ratio * cells)` cells chosen by a seeded shuffle, then closes
/// everything outside the largest component (ties to the component holding
/// the smallest cell).
pub fn random_map(width: usize, height: usize, ratio: f64, seed: u64) -> GridMap {
    let n = width * height;
    let mut cells: Vec<usize> = (0..n).collect();
    cells.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let blocked = ((ratio * n as f64).round() as usize).min(n.saturating_sub(1));
    let mut open = vec![true; n];
    for &c in &cells[..blocked] {
        open[c] = false;
    }
    let grid = GridMap::new(width, height, open).expect("non-empty grid");
    let labels = grid.components();
    let mut sizes = Vec::new();
    for l in labels.iter().flatten() {
        if sizes.len() <= *l {
            sizes.resize(l + 1, 0usize);
        }
        sizes[*l] += 1;
    }
    let keep = (0..sizes.len()).max_by_key(|&l| (sizes[l], std::cmp::Reverse(l))).unwrap_or(0);
    let open = labels.iter().map(|l| *l == Some(keep)).collect();
    GridMap::new(width, height, open).expect("same dimensions")
}
