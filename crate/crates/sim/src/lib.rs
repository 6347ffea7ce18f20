//! Lifelong grid navigation guided by congestion-mitigating routes.
//!
//! A MovingAI map is reduced to a sparse graph ([`abstraction`]); agents
//! follow CMPP routes on that graph one waypoint at a time while PIBT
//! ([`pibt`]) resolves one-step collisions on the grid.

pub mod abstraction;
pub mod desk;
pub mod error;
pub mod map;
pub mod pibt;
pub mod sim;
pub mod stats;

pub use abstraction::{lift_instance, sparsify, Abstraction, SparsifyOptions};
pub use error::{Result, SimError};
pub use map::{parse_map, parse_scen, Cell, GridMap, ScenEntry};
pub use pibt::{pibt_step, DistanceCache, TieBias};
pub use sim::{run_lifelong, GuidanceMode, SimConfig, SimReport, SimWorld};
pub use stats::{paired_t_test, PairedTest};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
