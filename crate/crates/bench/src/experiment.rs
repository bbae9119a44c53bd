//! Paired trials of the four start strategies.

use std::time::Instant;

use ergoplan::agents::{controls_feasible, AgentSpec};
use ergoplan::maps::StartRegionSet;
use ergoplan::optimizer::{plan, OptimizerConfig, ProblemSpec, Solution, StartMode};
use ergoplan::spectral::BasisSpec;
use ergoplan::{derive_seed, seeded_rng, Error, Point, Rng};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Strategy};
use crate::dataset::MapCase;
use crate::error::{BenchError, Result};
use crate::stats;

const STREAM_SINGLE_RANDOM: u64 = 101;
const STREAM_MULTI_RANDOM: u64 = 102;
const STREAM_OPTIMIZER: u64 = 103;

/// One strategy on one (map, trial) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub map: String,
    pub map_index: usize,
    pub trial: usize,
    pub strategy: Strategy,
    /// NaN when the strategy had no feasible start.
    pub team_phi: f64,
    pub type_metrics: Vec<(u32, f64)>,
    pub iterations: usize,
    pub wall_ms: u64,
    pub feasible: bool,
    /// Control-initialization fingerprint of every restart.
    pub control_draws: Vec<u64>,
}

/// Per-(map, trial) metadata shared by all strategies.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialInfo {
    pub map: String,
    pub trial: usize,
    pub seed: u64,
    /// The single random start had to be projected per type because no
    /// point feasible for every type was found.
    pub single_start_fallback: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub strategy: Strategy,
    pub mean_phi: f64,
    pub std_phi: f64,
    /// `None` when SR was not run.
    pub improvement_pct_vs_sr: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct BenchmarkResult {
    /// Ordered by map, trial, then strategy in configuration order.
    pub records: Vec<TrialRecord>,
    pub trials: Vec<TrialInfo>,
    pub aggregates: Vec<Aggregate>,
    /// Solutions of the first trial on every map, for rendering.
    pub showcase: Vec<(usize, Strategy, Solution)>,
}

impl BenchmarkResult {
    /// Team metrics of one strategy in record order.
    pub fn phis(&self, strategy: Strategy) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.strategy == strategy)
            .map(|r| r.team_phi)
            .collect()
    }

    pub fn aggregate(&self, strategy: Strategy) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.strategy == strategy)
    }

    pub fn violations(&self) -> usize {
        self.records.iter().filter(|r| !r.feasible).count()
    }
}

pub fn trial_seed(master_seed: u64, map_index: usize, trial: usize) -> u64 {
    derive_seed(derive_seed(master_seed, map_index as u64), trial as u64)
}

/// Draws one start shared by the team: rejection sampling from the first
/// type's regions, then cyclic projection, then per-type projection of a
/// single draw. The flag reports the last case.
pub fn single_random_starts(
    regions: &StartRegionSet,
    agents: &[AgentSpec],
    rounds: usize,
    rng: &mut Rng,
) -> ergoplan::Result<(Vec<Point>, bool)> {
    let mut types: Vec<u32> = agents.iter().map(|a| a.type_id).collect();
    types.sort_unstable();
    types.dedup();
    let first = types[0];
    let shared = |p: Point| vec![p; agents.len()];
    for _ in 0..1000 {
        let p = regions.sample_start(first, rng)?;
        if regions.contains_all(&types, p)? {
            return Ok((shared(p), false));
        }
    }
    for _ in 0..100 {
        let p = regions.sample_start(first, rng)?;
        if let Some(q) = regions.cyclic_projection(&types, p, rounds)? {
            return Ok((shared(q), false));
        }
    }
    let p = regions.sample_start(first, rng)?;
    let starts = agents
        .iter()
        .map(|a| regions.project(a.type_id, p))
        .collect::<ergoplan::Result<_>>()?;
    Ok((starts, true))
}

/// One start per agent, each drawn from its own type's regions.
pub fn multi_random_starts(
    regions: &StartRegionSet,
    agents: &[AgentSpec],
    rng: &mut Rng,
) -> ergoplan::Result<Vec<Point>> {
    agents.iter().map(|a| regions.sample_start(a.type_id, rng)).collect()
}

/// Whether a solution respects the start regions and control limits.
/// Starts must be fixed points of the region projection; shared-start plans
/// must use one location; fixed-start plans must keep the given starts.
pub fn solution_feasible(problem: &ProblemSpec, solution: &Solution) -> bool {
    if solution.starts.len() != problem.agents.len() || solution.controls.len() != problem.agents.len() {
        return false;
    }
    for (i, spec) in problem.agents.iter().enumerate() {
        let p = solution.starts[i].position;
        match problem.regions.project(spec.type_id, p) {
            Ok(q) if q == p => {}
            _ => return false,
        }
        if !controls_feasible(spec, &solution.controls[i]) {
            return false;
        }
        if solution.controls[i].controls.len() != spec.horizon_steps {
            return false;
        }
    }
    match problem.mode {
        StartMode::SharedOptimizedStart => {
            let p0 = solution.starts[0].position;
            solution.starts.iter().all(|s| s.position == p0)
        }
        StartMode::FixedStart => match &problem.fixed_starts {
            Some(given) => given.iter().zip(&solution.starts).all(|(g, s)| *g == s.position),
            None => false,
        },
        StartMode::PerAgentOptimizedStart => true,
    }
}

struct TrialOutput {
    info: TrialInfo,
    records: Vec<TrialRecord>,
    solutions: Vec<(Strategy, Solution)>,
}

fn run_trial(
    config: &ExperimentConfig,
    case: &MapCase,
    map_index: usize,
    trial: usize,
) -> Result<TrialOutput> {
    let agents = config.agents();
    let basis = BasisSpec::new(case.map.lengths(), config.max_index)?;
    let seed = trial_seed(config.master_seed, map_index, trial);
    let optimizer = OptimizerConfig {
        seed: derive_seed(seed, STREAM_OPTIMIZER),
        ..config.optimizer.clone()
    };

    let mut rng = seeded_rng(derive_seed(seed, STREAM_SINGLE_RANDOM));
    let (single, fallback) =
        single_random_starts(&case.regions, &agents, optimizer.projection_rounds, &mut rng)?;
    let mut rng = seeded_rng(derive_seed(seed, STREAM_MULTI_RANDOM));
    let multi = multi_random_starts(&case.regions, &agents, &mut rng)?;

    let mut records = Vec::with_capacity(config.strategies.len());
    let mut solutions = Vec::new();
    for &strategy in &config.strategies {
        let fixed_starts = match strategy {
            Strategy::SR => Some(single.clone()),
            Strategy::MR => Some(multi.clone()),
            Strategy::SO | Strategy::MO => None,
        };
        let problem = ProblemSpec {
            map: case.map.clone(),
            basis: basis.clone(),
            agents: agents.clone(),
            regions: case.regions.clone(),
            mode: strategy.mode(),
            fixed_starts,
        };
        let clock = Instant::now();
        let outcome = plan(&problem, &optimizer);
        let elapsed = clock.elapsed().as_millis() as u64;
        let wall_ms = if config.record_timing { elapsed } else { 0 };
        let record = match outcome {
            Ok(solution) => {
                let record = TrialRecord {
                    map: case.name.clone(),
                    map_index,
                    trial,
                    strategy,
                    team_phi: solution.team_metric,
                    type_metrics: solution.type_metrics.clone(),
                    iterations: solution.iterations,
                    wall_ms,
                    feasible: solution_feasible(&problem, &solution),
                    control_draws: solution.restarts.iter().map(|r| r.control_draws).collect(),
                };
                solutions.push((strategy, solution));
                record
            }
            Err(Error::Infeasible { .. }) => TrialRecord {
                map: case.name.clone(),
                map_index,
                trial,
                strategy,
                team_phi: f64::NAN,
                type_metrics: Vec::new(),
                iterations: 0,
                wall_ms,
                feasible: false,
                control_draws: Vec::new(),
            },
            Err(e) => return Err(BenchError::Plan(e)),
        };
        records.push(record);
    }
    Ok(TrialOutput {
        info: TrialInfo {
            map: case.name.clone(),
            trial,
            seed,
            single_start_fallback: fallback,
        },
        records,
        solutions,
    })
}

pub fn aggregate(records: &[TrialRecord], strategies: &[Strategy]) -> Vec<Aggregate> {
    let phis = |s: Strategy| -> Vec<f64> {
        records
            .iter()
            .filter(|r| r.strategy == s)
            .map(|r| r.team_phi)
            .collect()
    };
    let baseline = strategies
        .contains(&Strategy::SR)
        .then(|| stats::mean(&phis(Strategy::SR)));
    strategies
        .iter()
        .map(|&s| {
            let xs = phis(s);
            let mean_phi = stats::mean(&xs);
            Aggregate {
                strategy: s,
                mean_phi,
                std_phi: stats::std_dev(&xs),
                improvement_pct_vs_sr: baseline.map(|b| stats::improvement_pct(b, mean_phi)),
            }
        })
        .collect()
}

/// Runs every strategy on every (map, trial) pair.
///
/// Trials run on `config.workers` threads; the output order is fixed.
pub fn run_benchmark(config: &ExperimentConfig, cases: &[MapCase]) -> Result<BenchmarkResult> {
    config.validate().map_err(|message| BenchError::Config {
        path: "<config>".into(),
        message,
    })?;
    let jobs: Vec<(usize, usize)> = (0..cases.len())
        .flat_map(|m| (0..config.trials_per_map).map(move |t| (m, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| BenchError::Config {
            path: "<config>".into(),
            message: format!("cannot start {} workers: {e}", config.workers),
        })?;
    let outputs: Vec<TrialOutput> = pool.install(|| {
        jobs.par_iter()
            .map(|&(m, t)| run_trial(config, &cases[m], m, t))
            .collect::<Result<_>>()
    })?;

    let mut records = Vec::new();
    let mut trials = Vec::new();
    let mut showcase = Vec::new();
    for (out, &(m, t)) in outputs.into_iter().zip(&jobs) {
        records.extend(out.records);
        trials.push(out.info);
        if t == 0 {
            showcase.extend(out.solutions.into_iter().map(|(s, sol)| (m, s, sol)));
        }
    }
    let aggregates = aggregate(&records, &config.strategies);
    Ok(BenchmarkResult {
        records,
        trials,
        aggregates,
        showcase,
    })
}
