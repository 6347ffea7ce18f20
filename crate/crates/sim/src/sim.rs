//! Lifelong navigation: agents receive a new random goal on every arrival and
//! move one cell per step under PIBT, optionally guided by CMPP routes on the
//! sparse graph.

use std::collections::BTreeSet;
use std::sync::Arc;

use cmpp_core::acmts::solve_lifelong_step;
use cmpp_core::{total_cost, AgentId, CmppInstance, Cost, Path, Solution, SolverConfig, VertexId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::abstraction::{sparsify, Abstraction, SparsifyOptions};
use crate::error::{Result, SimError};
use crate::map::{Cell, GridMap};
use crate::pibt::{conflicts, pibt_step, DistanceCache, TieBias};

#[derive(Clone, Debug)]
pub enum GuidanceMode {
    /// Head straight for the goal.
    None,
    /// Head for the goal with parity tie-breaking.
    Parity,
    /// Follow CMPP routes on the sparse graph.
    Cmpp {
        solver: SolverConfig,
        /// Steps between solver calls, at least 1.
        replan_period: u64,
    },
}

impl GuidanceMode {
    pub fn name(&self) -> &'static str {
        match self {
            GuidanceMode::None => "none",
            GuidanceMode::Parity => "parity",
            GuidanceMode::Cmpp { .. } => "cmpp",
        }
    }

    /// CMPP guidance with a deterministic expansion budget per solver call.
    pub fn cmpp(omega: f64, node_budget: u64, replan_period: u64) -> Self {
        GuidanceMode::Cmpp {
            solver: SolverConfig { omega, node_budget: Some(node_budget), ..SolverConfig::default() },
            replan_period,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub agents: usize,
    pub steps: u64,
    pub seed: u64,
    pub sparsify: SparsifyOptions,
    pub mode: GuidanceMode,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimReport {
    pub mode: String,
    pub seed: u64,
    pub agents: usize,
    pub steps: u64,
    pub arrivals: u64,
    /// Arrivals per step.
    pub throughput: f64,
    /// Always zero: a conflict aborts the run with [`SimError::Conflict`].
    pub conflicts: u64,
    pub sparse_vertices: usize,
    pub solver_calls: u64,
    pub nodes_expanded: u64,
    /// Total congestion of the agents' intended sparse routes after each step.
    pub congestion_trace: Vec<Cost>,
    /// Agent-steps spent in each cell, row-major.
    pub occupancy: Vec<u64>,
}

struct AgentState {
    pos: Cell,
    goal: Cell,
    /// Sparse route, front = current vertex.
    route: Option<Vec<VertexId>>,
    since_arrival: u64,
    arrivals: u64,
}

/// Simulator state; [`run_lifelong`] drives it to completion.
pub struct SimWorld {
    abstraction: Abstraction,
    mode: GuidanceMode,
    agents: Vec<AgentState>,
    /// Open cells of each agent's component.
    reachable: Vec<Arc<[Cell]>>,
    changed: BTreeSet<AgentId>,
    cache: DistanceCache,
    rng: ChaCha8Rng,
    clock: u64,
    solver_calls: u64,
    nodes_expanded: u64,
    trace: Vec<Cost>,
    occupancy: Vec<u64>,
}

impl SimWorld {
    pub fn new(grid: Arc<GridMap>, config: &SimConfig) -> Result<Self> {
        if let GuidanceMode::Cmpp { replan_period: 0, .. } = config.mode {
            return Err(SimError::ReplanPeriod);
        }
        if let GuidanceMode::Cmpp { solver, .. } = &config.mode {
            solver.validate()?;
        }
        let open: Vec<Cell> = grid.open_cells().collect();
        if config.agents > open.len() {
            return Err(SimError::Placement { agents: config.agents, cells: open.len() });
        }
        let abstraction = sparsify(&grid, &config.sparsify)?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

        let labels = grid.components();
        let mut members: Vec<Vec<Cell>> = Vec::new();
        for &c in &open {
            let l = labels[c].expect("open cells are labelled");
            if members.len() <= l {
                members.resize_with(l + 1, Vec::new);
            }
            members[l].push(c);
        }
        let members: Vec<Arc<[Cell]>> = members.into_iter().map(Arc::from).collect();

        let starts: Vec<Cell> = open.choose_multiple(&mut rng, config.agents).copied().collect();
        let mut agents = Vec::with_capacity(starts.len());
        let mut reachable = Vec::with_capacity(starts.len());
        for &s in &starts {
            let pool = Arc::clone(&members[labels[s].expect("open")]);
            let goal = random_goal(&mut rng, &pool, s);
            agents.push(AgentState { pos: s, goal, route: None, since_arrival: 0, arrivals: 0 });
            reachable.push(pool);
        }
        let changed = (0..agents.len()).map(AgentId::from_index).collect();
        Ok(Self {
            cache: DistanceCache::new(Arc::clone(&grid)),
            occupancy: vec![0; grid.cell_count()],
            abstraction,
            mode: config.mode.clone(),
            agents,
            reachable,
            changed,
            rng,
            clock: 0,
            solver_calls: 0,
            nodes_expanded: 0,
            trace: Vec::new(),
        })
    }

    pub fn abstraction(&self) -> &Abstraction {
        &self.abstraction
    }

    pub fn positions(&self) -> Vec<Cell> {
        self.agents.iter().map(|a| a.pos).collect()
    }

    pub fn goals(&self) -> Vec<Cell> {
        self.agents.iter().map(|a| a.goal).collect()
    }

    pub fn routes(&self) -> Vec<Option<Vec<VertexId>>> {
        self.agents.iter().map(|a| a.route.clone()).collect()
    }

    /// Drops visited route vertices and invalidates routes the agent left.
    fn advance_routes(&mut self) {
        for (i, a) in self.agents.iter_mut().enumerate() {
            let Some(route) = a.route.as_mut() else { continue };
            let here = self.abstraction.f(a.pos).expect("agents stand on open cells");
            if route.len() >= 2 && route[1] == here {
                route.remove(0);
            } else if route[0] != here {
                match route.iter().position(|&v| v == here) {
                    Some(k) => {
                        route.drain(..k);
                    }
                    None => {
                        a.route = None;
                        self.changed.insert(AgentId::from_index(i));
                    }
                }
            }
        }
    }

    fn replan(&mut self, solver: &SolverConfig) -> Result<()> {
        let abs = &self.abstraction;
        let mut pairs = Vec::with_capacity(self.agents.len());
        let mut previous = Vec::with_capacity(self.agents.len());
        for a in &self.agents {
            let s = abs.f(a.pos).expect("open");
            pairs.push((s, abs.f(a.goal).expect("open")));
            previous.push(match &a.route {
                Some(r) => Path::new(r.clone()),
                None => Path::single(s),
            });
        }
        let instance = CmppInstance::from_pairs(Arc::clone(&abs.sparse), &pairs)?;
        let report = solve_lifelong_step(&instance, &Solution::new(previous), &self.changed, solver)?;
        self.solver_calls += 1;
        self.nodes_expanded += report.nodes_expanded;
        for (a, (_, p)) in self.agents.iter_mut().zip(report.best.iter()) {
            a.route = Some(p.vertices().to_vec());
        }
        self.changed.clear();
        Ok(())
    }

    fn targets(&self) -> Vec<Cell> {
        self.agents
            .iter()
            .map(|a| match &a.route {
                Some(r) if matches!(self.mode, GuidanceMode::Cmpp { .. }) && r.len() >= 3 => self.abstraction.g(r[1]),
                _ => a.goal,
            })
            .collect()
    }

    /// Congestion of the routes agents currently intend to follow: their CMPP
    /// routes, or BFS-shortest sparse paths without guidance.
    fn intended_congestion(&self) -> Result<Cost> {
        let abs = &self.abstraction;
        let g = &abs.sparse;
        let paths: Vec<Path> = match self.mode {
            GuidanceMode::Cmpp { .. } => {
                self.agents.iter().filter_map(|a| a.route.as_ref().map(|r| Path::new(r.clone()))).collect()
            }
            _ => self
                .agents
                .iter()
                .filter_map(|a| {
                    let (s, t) = (abs.f(a.pos)?, abs.f(a.goal)?);
                    g.bfs_path(s, t).map(Path::new)
                })
                .collect(),
        };
        Ok(total_cost(&Solution::new(paths), g)?)
    }

    /// Advances the world by one step.
    pub fn step(&mut self) -> Result<()> {
        let bias = match &self.mode {
            GuidanceMode::Cmpp { solver, replan_period } => {
                let (solver, period) = (solver.clone(), *replan_period);
                if self.clock.is_multiple_of(period) {
                    self.replan(&solver)?;
                }
                TieBias::Fixed
            }
            GuidanceMode::Parity => TieBias::Parity,
            GuidanceMode::None => TieBias::Fixed,
        };
        let targets = self.targets();
        let mut order: Vec<usize> = (0..self.agents.len()).collect();
        order.sort_by_key(|&i| (std::cmp::Reverse(self.agents[i].since_arrival), i));
        let before = self.positions();
        let after = pibt_step(&mut self.cache, &before, &targets, &order, bias);
        if let Some(what) = conflicts(&before, &after).into_iter().next() {
            return Err(SimError::Conflict { step: self.clock + 1, what });
        }

        self.clock += 1;
        for (i, a) in self.agents.iter_mut().enumerate() {
            a.pos = after[i];
            a.since_arrival += 1;
            self.occupancy[a.pos] += 1;
            if a.pos == a.goal && self.reachable[i].len() > 1 {
                a.arrivals += 1;
                a.since_arrival = 0;
                a.goal = random_goal(&mut self.rng, &self.reachable[i], a.pos);
                a.route = None;
                self.changed.insert(AgentId::from_index(i));
            }
        }
        if let GuidanceMode::Cmpp { .. } = self.mode {
            self.advance_routes();
        }
        let c = self.intended_congestion()?;
        self.trace.push(c);
        Ok(())
    }

    pub fn report(&self, seed: u64) -> SimReport {
        let arrivals = self.agents.iter().map(|a| a.arrivals).sum();
        SimReport {
            mode: self.mode.name().to_string(),
            seed,
            agents: self.agents.len(),
            steps: self.clock,
            arrivals,
            throughput: if self.clock == 0 { 0.0 } else { arrivals as f64 / self.clock as f64 },
            conflicts: 0,
            sparse_vertices: self.abstraction.vertex_count(),
            solver_calls: self.solver_calls,
            nodes_expanded: self.nodes_expanded,
            congestion_trace: self.trace.clone(),
            occupancy: self.occupancy.clone(),
        }
    }
}

fn random_goal(rng: &mut impl Rng, pool: &[Cell], current: Cell) -> Cell {
    if pool.len() < 2 {
        return current;
    }
    loop {
        let c = pool[rng.gen_range(0..pool.len())];
        if c != current {
            return c;
        }
    }
}

/// Runs a full simulation.
pub fn run_lifelong(grid: Arc<GridMap>, config: &SimConfig) -> Result<SimReport> {
    let mut world = SimWorld::new(grid, config)?;
    for _ in 0..config.steps {
        world.step()?;
    }
    Ok(world.report(config.seed))
}
