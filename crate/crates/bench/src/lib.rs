//! Benchmark harness comparing start-location strategies for multi-agent
//! ergodic search: single random (SR), multiple random (MR), single
//! optimized (SO) and multiple optimized (MO) starts.

pub mod config;
pub mod dataset;
mod error;
pub mod experiment;
pub mod export;
pub mod gradcheck;
pub mod stats;
pub mod svg;

use std::path::Path;

use ergoplan::agents::{write_trajectories, TrajectoryRecord};
use ergoplan::optimizer::{plan, ProblemSpec, Solution, StartMode};
use ergoplan::spectral::BasisSpec;
use ergoplan::{derive_seed, seeded_rng};
use serde::Serialize;

pub use config::{ExperimentConfig, Strategy};
pub use error::{BenchError, Result};
pub use experiment::{run_benchmark, BenchmarkResult};

use dataset::MapCase;

pub const SUMMARY_FILE: &str = "summary.json";

fn trajectory_text(solution: &Solution, agent_types: &[u32]) -> String {
    let records: Vec<TrajectoryRecord> = solution
        .trajectories
        .iter()
        .enumerate()
        .map(|(i, t)| TrajectoryRecord::from_trajectory(i, agent_types[i], t))
        .collect();
    write_trajectories(&records)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))
}

/// Runs the benchmark and writes CSV files, plus SVG pictures and
/// trajectories of the first trial on every map when enabled.
pub fn bench(config: &ExperimentConfig, cases: &[MapCase], out: &Path) -> Result<BenchmarkResult> {
    let result = run_benchmark(config, cases)?;
    export::export_csv(&result, out)?;
    if config.render_svg {
        let dir = out.join("figures");
        create_dir(&dir)?;
        let agent_types: Vec<u32> = config.agents().iter().map(|a| a.type_id).collect();
        for (m, strategy, solution) in &result.showcase {
            let case = &cases[*m];
            let stem = format!("{}_{}", case.name, strategy.name());
            let picture = svg::render_svg(&case.map, &case.regions, Some((solution, &agent_types)));
            svg::write_svg(&dir.join(format!("{stem}.svg")), &picture)?;
            export::write(&dir.join(format!("{stem}.ergtraj")), &trajectory_text(solution, &agent_types))?;
        }
    }
    Ok(result)
}

#[derive(Clone, Debug, Serialize)]
pub struct PlanSummary {
    pub mode: StartMode,
    pub team_phi: f64,
    pub type_phi: Vec<(u32, f64)>,
    pub starts: Vec<[f64; 3]>,
    pub iterations: usize,
    pub restart: usize,
    pub feasible: bool,
}

/// Plans one team on one map and writes `trajectories.ergtraj`,
/// `plan.svg` and `summary.json` into `out`.
pub fn plan_command(config: &ExperimentConfig, case: &MapCase, mode: StartMode, out: &Path) -> Result<PlanSummary> {
    let agents = config.agents();
    let fixed_starts = match mode {
        StartMode::FixedStart => Some(match &config.fixed_starts {
            Some(starts) => starts.clone(),
            None => {
                let mut rng = seeded_rng(derive_seed(config.master_seed, 0));
                experiment::multi_random_starts(&case.regions, &agents, &mut rng)?
            }
        }),
        _ => None,
    };
    let problem = ProblemSpec {
        map: case.map.clone(),
        basis: BasisSpec::new(case.map.lengths(), config.max_index)?,
        agents,
        regions: case.regions.clone(),
        mode,
        fixed_starts,
    };
    problem.validate().map_err(|e| match e {
        ergoplan::Error::Io(_) => BenchError::Plan(e),
        other => BenchError::Config {
            path: "<config>".into(),
            message: other.to_string(),
        },
    })?;
    let optimizer = ergoplan::optimizer::OptimizerConfig {
        seed: config.master_seed,
        ..config.optimizer.clone()
    };
    let solution = plan(&problem, &optimizer)?;
    let agent_types: Vec<u32> = problem.agents.iter().map(|a| a.type_id).collect();
    create_dir(out)?;
    export::write(&out.join("trajectories.ergtraj"), &trajectory_text(&solution, &agent_types))?;
    let picture = svg::render_svg(&case.map, &case.regions, Some((&solution, &agent_types)));
    svg::write_svg(&out.join("plan.svg"), &picture)?;
    let summary = PlanSummary {
        mode,
        team_phi: solution.team_metric,
        type_phi: solution.type_metrics.clone(),
        starts: solution
            .starts
            .iter()
            .map(|s| [s.position[0], s.position[1], s.heading])
            .collect(),
        iterations: solution.iterations,
        restart: solution.restart,
        feasible: experiment::solution_feasible(&problem, &solution),
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    export::write(&out.join(SUMMARY_FILE), &(json + "\n"))?;
    Ok(summary)
}
