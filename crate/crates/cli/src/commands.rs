use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, Context};
use cmpp_core::{
    congestion_csv, exact_solve, pp_initial, solve, validate_minlp, CmppError, CmppInstance, CongestionLedger,
    ExactOptions, InstanceDoc, LengthCap, Solution, SolutionDoc, SolverConfig,
};
use cmpp_sim::{
    paired_t_test, parse_map, run_lifelong, sparsify, GridMap, GuidanceMode, SimConfig, SimError, SimReport,
    SparsifyOptions,
};
use rayon::prelude::*;
use serde_json::json;

use crate::args::{
    BenchArgs, Command, ModeKind, SimArgs, SimulateArgs, SolveArgs, SolverKind, SparsifyArgs, ValidateArgs,
};

/// Outcome classes, mapped to exit codes 1, 2 and 3.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Rejected(anyhow::Error),
    Internal(anyhow::Error),
}

type Outcome<T = ()> = Result<T, Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn internal(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Internal(e.into())
}

fn from_core(e: CmppError) -> Failure {
    match e {
        CmppError::Infeasible(_) | CmppError::NoAssignment | CmppError::LengthCap(_) => Failure::Rejected(e.into()),
        CmppError::Graph(_)
        | CmppError::Instance(_)
        | CmppError::Config(_)
        | CmppError::Json(_)
        | CmppError::TooLarge { .. } => Failure::Usage(e.into()),
        other => Failure::Internal(other.into()),
    }
}

fn from_sim(e: SimError) -> Failure {
    match e {
        SimError::Cmpp(inner) => from_core(inner),
        SimError::Placement { .. } => Failure::Rejected(e.into()),
        SimError::Conflict { .. } => Failure::Internal(e.into()),
        other => Failure::Usage(other.into()),
    }
}

pub fn run(command: &Command) -> Outcome {
    match command {
        Command::Solve(a) => run_solve(a, command),
        Command::Validate(a) => run_validate(a, command),
        Command::Simulate(a) => run_simulate(a, command),
        Command::Bench(a) => run_bench(a, command),
        Command::Sparsify(a) => run_sparsify(a, command),
    }
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(usage)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display())).map_err(internal)?;
    }
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display())).map_err(internal)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(internal)?;
    write(path, text + "\n")
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent().unwrap_or(Path::new("")).join(name)
}

/// `out.json` -> `out.<suffix>`.
fn beside(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    sibling(path, &format!("{stem}.{suffix}"))
}

fn write_meta(dir_hint: &Path, command: &Command, seed: Option<u64>, artifacts: &[&Path]) -> Outcome {
    let meta = json!({
        "config": command,
        "seed": seed,
        "versions": {
            "cmpp-cli": env!("CARGO_PKG_VERSION"),
            "cmpp-core": cmpp_core::VERSION,
            "cmpp-sim": cmpp_sim::VERSION,
        },
        "artifacts": artifacts.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });
    write_json(dir_hint, &meta)
}

fn load_instance(path: &Path) -> Outcome<CmppInstance> {
    InstanceDoc::parse(&read(path)?)
        .and_then(|d| d.to_instance())
        .with_context(|| format!("invalid instance {}", path.display()))
        .map_err(|e| match e.downcast::<CmppError>() {
            Ok(inner) => from_core(inner),
            Err(e) => usage(e),
        })
}

fn run_solve(a: &SolveArgs, command: &Command) -> Outcome {
    let instance = load_instance(&a.instance)?;
    if !(a.time_limit.is_finite() && a.time_limit > 0.0) {
        return Err(usage(anyhow!("--time-limit must be a positive number of seconds")));
    }
    let (solution, cost, report) = match a.solver {
        SolverKind::Acmts => {
            let config = SolverConfig {
                omega: a.omega,
                time_limit: Some(Duration::from_secs_f64(a.time_limit)),
                seed: a.seed,
                ..SolverConfig::default()
            };
            config.validate().map_err(from_core)?;
            let r = solve(&instance, &config).map_err(from_core)?;
            let report = json!({
                "solver": "acmts",
                "omega": a.omega,
                "best_cost": r.best_cost,
                "initial_cost": r.initial_cost,
                "improvement_percent": r.improvement_percent(),
                "nodes_expanded": r.nodes_expanded,
                "nodes_pruned": r.nodes_pruned,
                "time_to_initial_s": r.time_to_initial.as_secs_f64(),
                "elapsed_s": r.elapsed.as_secs_f64(),
                "exhausted": r.exhausted,
                "improvement_trace": r.improvement_trace.iter()
                    .map(|(t, c)| json!({"t_s": t.as_secs_f64(), "cost": c}))
                    .collect::<Vec<_>>(),
            });
            (r.best, r.best_cost, report)
        }
        SolverKind::Pp => {
            let s = pp_initial(&instance, None).map_err(from_core)?;
            let cost = cmpp_core::total_cost(&s, &instance.graph).map_err(from_core)?;
            (s, cost, json!({"solver": "pp", "best_cost": cost}))
        }
        SolverKind::Exact => {
            let options = ExactOptions {
                cap: a.cap.map_or(LengthCap::Unbounded, LengthCap::Slack),
                force: a.force,
                ..ExactOptions::default()
            };
            let r = exact_solve(&instance, &options).map_err(from_core)?;
            let report = json!({
                "solver": "exact",
                "best_cost": r.cost,
                "paths_enumerated": r.paths_enumerated,
                "leaves": r.leaves,
            });
            (r.solution, r.cost, report)
        }
    };
    let violations = validate_minlp(&solution, &instance);
    if !violations.is_empty() {
        return Err(internal(anyhow!("solver produced an invalid solution: {}", violations[0].describe(&instance))));
    }
    write_outputs(a, &instance, &solution, cost, &report, command)
}

fn write_outputs(
    a: &SolveArgs,
    instance: &CmppInstance,
    solution: &Solution,
    cost: cmpp_core::Cost,
    report: &serde_json::Value,
    command: &Command,
) -> Outcome {
    let flow = cmpp_core::compute_flow(solution, &instance.graph).map_err(from_core)?;
    let ledger = CongestionLedger::from_flow(&flow, &instance.graph).map_err(from_core)?;
    let report_path = beside(&a.out, "report.json");
    let csv_path = beside(&a.out, "congestion.csv");
    write_json(&a.out, &SolutionDoc::from_solution(solution, instance, Some(cost)))?;
    write_json(&report_path, report)?;
    write(&csv_path, congestion_csv(&instance.graph, &ledger))?;
    write_meta(&sibling(&a.out, "run_meta.json"), command, Some(a.seed), &[&a.out, &report_path, &csv_path])?;
    println!("cost {cost}");
    Ok(())
}

fn run_validate(a: &ValidateArgs, command: &Command) -> Outcome {
    let instance = load_instance(&a.instance)?;
    let doc = SolutionDoc::parse(&read(&a.solution)?).map_err(usage)?;
    let solution = doc.to_solution(&instance).map_err(usage)?;
    let mut violations: Vec<String> =
        validate_minlp(&solution, &instance).iter().map(|v| v.describe(&instance)).collect();
    if let Some(claimed) = doc.total_cost {
        if violations.is_empty() {
            let actual = cmpp_core::total_cost(&solution, &instance.graph).map_err(from_core)?;
            if actual != claimed {
                violations.push(format!("claimed total cost {claimed} but the paths cost {actual}"));
            }
        }
    }
    if let Some(out) = &a.out {
        write_json(out, &json!({"valid": violations.is_empty(), "violations": violations}))?;
        write_meta(&sibling(out, "run_meta.json"), command, None, &[out])?;
    }
    if violations.is_empty() {
        println!("valid");
        return Ok(());
    }
    for v in &violations {
        println!("violation: {v}");
    }
    Err(Failure::Rejected(anyhow!("{} violation(s)", violations.len())))
}

fn load_map(path: &Path) -> Outcome<Arc<GridMap>> {
    let text = read(path)?;
    parse_map(&text).map(Arc::new).with_context(|| format!("invalid map {}", path.display())).map_err(usage)
}

fn guidance(mode: ModeKind, sim: &SimArgs) -> GuidanceMode {
    match mode {
        ModeKind::None => GuidanceMode::None,
        ModeKind::Parity => GuidanceMode::Parity,
        ModeKind::Cmpp => GuidanceMode::cmpp(sim.omega, sim.budget, sim.replan_period),
    }
}

fn sim_config(sim: &SimArgs, seed: u64, mode: ModeKind) -> SimConfig {
    SimConfig {
        agents: sim.agents,
        steps: sim.steps,
        seed,
        sparsify: SparsifyOptions::new(sim.interval),
        mode: guidance(mode, sim),
    }
}

fn run_simulate(a: &SimulateArgs, command: &Command) -> Outcome {
    let grid = load_map(&a.sim.map)?;
    let report = run_lifelong(Arc::clone(&grid), &sim_config(&a.sim, a.seed, a.mode)).map_err(from_sim)?;
    let throughput = sibling(&a.out, "throughput.csv");
    let trace = sibling(&a.out, "congestion_trace.csv");
    let occupancy = sibling(&a.out, "occupancy.csv");
    write_json(&a.out, &report)?;
    write(&throughput, throughput_csv(std::slice::from_ref(&report)))?;
    let mut text = String::from("step,total_C\n");
    for (i, c) in report.congestion_trace.iter().enumerate() {
        let _ = writeln!(text, "{},{c}", i + 1);
    }
    write(&trace, text)?;
    let mut text = String::from("cell,x,y,visits\n");
    for (c, n) in report.occupancy.iter().enumerate() {
        if grid.is_open(c) {
            let (x, y) = grid.coords(c);
            let _ = writeln!(text, "{c},{x},{y},{n}");
        }
    }
    write(&occupancy, text)?;
    write_meta(&sibling(&a.out, "run_meta.json"), command, Some(a.seed), &[&a.out, &throughput, &trace, &occupancy])?;
    println!("throughput {:.4} arrivals {} conflicts {}", report.throughput, report.arrivals, report.conflicts);
    Ok(())
}

fn throughput_csv(reports: &[SimReport]) -> String {
    let mut text = String::from("seed,mode,throughput\n");
    for r in reports {
        let _ = writeln!(text, "{},{},{}", r.seed, r.mode, r.throughput);
    }
    text
}

fn run_bench(a: &BenchArgs, command: &Command) -> Outcome {
    let grid = load_map(&a.sim.map)?;
    let threads = match std::env::var("CMPP_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| usage(anyhow!("CMPP_THREADS must be a positive integer, got `{v}`")))?,
        Err(_) => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(internal)?;
    let jobs: Vec<(u64, ModeKind)> =
        (a.first_seed..a.first_seed + a.seeds).flat_map(|s| a.modes.iter().map(move |&m| (s, m))).collect();
    let reports: Vec<SimReport> = pool
        .install(|| {
            jobs.par_iter()
                .map(|&(seed, mode)| run_lifelong(Arc::clone(&grid), &sim_config(&a.sim, seed, mode)))
                .collect::<Result<Vec<_>, _>>()
        })
        .map_err(from_sim)?;

    let mut summary = serde_json::Map::new();
    let by_mode = |m: ModeKind| -> Vec<f64> {
        let name = guidance(m, &a.sim).name();
        reports.iter().filter(|r| r.mode == name).map(|r| r.throughput).collect()
    };
    for &m in &a.modes {
        let t = by_mode(m);
        let mean = t.iter().sum::<f64>() / t.len().max(1) as f64;
        summary.insert(guidance(m, &a.sim).name().into(), json!({"runs": t.len(), "mean_throughput": mean}));
    }
    if a.modes.contains(&ModeKind::Cmpp) && a.modes.contains(&ModeKind::None) {
        if let Some(t) = paired_t_test(&by_mode(ModeKind::Cmpp), &by_mode(ModeKind::None)) {
            summary.insert(
                "cmpp_vs_none".into(),
                json!({"mean_diff": t.mean_diff, "sd": t.sd, "t": t.t, "p_one_sided": t.p}),
            );
        }
    }
    let csv = a.out_dir.join("throughput.csv");
    let json_path = a.out_dir.join("bench.json");
    write(&csv, throughput_csv(&reports))?;
    write_json(&json_path, &summary)?;
    write_meta(&a.out_dir.join("run_meta.json"), command, Some(a.first_seed), &[&csv, &json_path])?;
    for (mode, s) in &summary {
        println!("{mode}: {s}");
    }
    Ok(())
}

fn run_sparsify(a: &SparsifyArgs, command: &Command) -> Outcome {
    let grid = load_map(&a.map)?;
    let options = SparsifyOptions { interval: a.interval, max_edge_factor: a.max_edge_factor };
    let abs = sparsify(&grid, &options).map_err(from_sim)?;
    let doc = InstanceDoc::from_graph(&abs.sparse);
    match &a.out {
        Some(out) => {
            write_json(out, &doc)?;
            write_meta(&sibling(out, "run_meta.json"), command, None, &[out])?;
            println!("{} vertices, reduction ratio {:.4}", abs.vertex_count(), abs.reduction_ratio(&grid));
        }
        None => println!("{}", serde_json::to_string_pretty(&doc).map_err(internal)?),
    }
    Ok(())
}
