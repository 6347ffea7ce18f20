use std::sync::Arc;

use cmpp_sim::desk::WAREHOUSE_MAP;
use cmpp_sim::{parse_map, run_lifelong, GuidanceMode, SimConfig, SparsifyOptions};

#[test]
fn guidance_beats_vanilla_with_sixty_agents() {
    let grid = Arc::new(parse_map(WAREHOUSE_MAP).unwrap());
    let mean = |mode: GuidanceMode| {
        let total: f64 = (0..25)
            .map(|seed| {
                let config =
                    SimConfig { agents: 60, steps: 200, seed, sparsify: SparsifyOptions::new(2), mode: mode.clone() };
                let r = run_lifelong(Arc::clone(&grid), &config).unwrap();
                assert_eq!(r.conflicts, 0);
                r.throughput
            })
            .sum();
        total / 25.0
    };
    let (none, cmpp) = (mean(GuidanceMode::None), mean(GuidanceMode::cmpp(1.3, 5, 5)));
    assert!(cmpp > none, "cmpp {cmpp} vs none {none}");
}
