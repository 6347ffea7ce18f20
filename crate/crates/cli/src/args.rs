use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "cmpp", version, about = "Congestion mitigation path planning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Solve a CMPP instance.
    Solve(SolveArgs),
    /// Check a solution against an instance.
    Validate(ValidateArgs),
    /// Run one lifelong simulation.
    Simulate(SimulateArgs),
    /// Run a seed x mode grid of simulations.
    Bench(BenchArgs),
    /// Build the sparse graph of a map.
    Sparsify(SparsifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Acmts,
    Pp,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    None,
    Parity,
    Cmpp,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = 10.0)]
    pub time_limit: f64,
    #[arg(long, value_enum, default_value_t = SolverKind::Acmts)]
    pub solver: SolverKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Solution JSON; the report, congestion CSV and run metadata go next to it.
    #[arg(long)]
    pub out: PathBuf,
    /// Run the exact solver on instances above its size guard.
    #[arg(long)]
    pub force: bool,
    /// Exact solver path-length slack over the shortest path; omit for no cap.
    #[arg(long)]
    pub cap: Option<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub solution: PathBuf,
    /// Optional JSON verdict; run metadata goes next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub interval: usize,
    #[arg(long)]
    pub agents: usize,
    #[arg(long, default_value_t = 500)]
    pub steps: u64,
    #[arg(long, default_value_t = 1.3)]
    pub omega: f64,
    /// Node expansions per solver call.
    #[arg(long, default_value_t = 1000)]
    pub budget: u64,
    #[arg(long, default_value_t = 1)]
    pub replan_period: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ModeKind::Cmpp)]
    pub mode: ModeKind,
    /// Report JSON; CSV series and run metadata go next to it.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct BenchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub sim: SimArgs,
    /// Number of seeds, starting at `--first-seed`.
    #[arg(long, default_value_t = 25)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub first_seed: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [ModeKind::None, ModeKind::Parity, ModeKind::Cmpp])]
    pub modes: Vec<ModeKind>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SparsifyArgs {
    #[arg(long)]
    pub map: PathBuf,
    #[arg(long)]
    pub interval: usize,
    /// Drop edges longer than this many intervals.
    #[arg(long)]
    pub max_edge_factor: Option<f64>,
    /// Instance JSON; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
