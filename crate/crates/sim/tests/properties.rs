use std::sync::Arc;

use cmpp_sim::pibt::conflicts;
use cmpp_sim::{pibt_step, sparsify, DistanceCache, GridMap, SparsifyOptions, TieBias};
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = GridMap> {
    (2usize..12, 2usize..12)
        .prop_flat_map(|(w, h)| (Just(w), Just(h), proptest::collection::vec(prop::bool::weighted(0.8), w * h)))
        .prop_filter_map("needs an open cell", |(w, h, mut open)| {
            if !open.iter().any(|&o| o) {
                open[0] = true;
            }
            GridMap::new(w, h, open).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn abstraction_maps_are_consistent(grid in grid_strategy(), interval in 1usize..7) {
        let abs = sparsify(&grid, &SparsifyOptions::new(interval)).unwrap();
        for v in abs.sparse.vertices() {
            prop_assert!(grid.is_open(abs.g(v)));
            prop_assert_eq!(abs.f(abs.g(v)), Some(v));
        }
        for c in 0..grid.cell_count() {
            prop_assert_eq!(abs.f(c).is_some(), grid.is_open(c));
        }
        // Cells joined on the grid map to vertices joined in the sparse graph.
        let labels = grid.components();
        for c in grid.open_cells() {
            let here = abs.f(c).unwrap();
            let reach = abs.sparse.bfs_hops(here, |_| false);
            for n in grid.neighbors(c) {
                prop_assert!(reach[abs.f(n).unwrap().index()].is_some());
            }
            prop_assert_eq!(labels[abs.g(here)], labels[c]);
        }
        if interval == 1 {
            prop_assert_eq!(abs.vertex_count(), grid.open_count());
        }
    }

    #[test]
    fn pibt_never_collides(grid in grid_strategy(), seed in any::<u64>(), density in 0.1f64..1.0) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let open: Vec<usize> = grid.open_cells().collect();
        let k = ((open.len() as f64 * density).ceil() as usize).clamp(1, open.len());
        let mut pos: Vec<usize> = open.choose_multiple(&mut rng, k).copied().collect();
        let targets: Vec<usize> = (0..k).map(|_| *open.choose(&mut rng).unwrap()).collect();
        let order: Vec<usize> = (0..k).collect();
        let mut cache = DistanceCache::new(Arc::new(grid.clone()));
        for step in 0..10 {
            let bias = if step % 2 == 0 { TieBias::Fixed } else { TieBias::Parity };
            let next = pibt_step(&mut cache, &pos, &targets, &order, bias);
            prop_assert!(conflicts(&pos, &next).is_empty());
            for (&a, &b) in pos.iter().zip(&next) {
                prop_assert!(a == b || grid.neighbors(a).any(|n| n == b));
            }
            pos = next;
        }
    }
}
