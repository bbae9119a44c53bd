//! Joint optimization of start locations and controls.
//!
//! The decision variables are every agent's control sequence and, depending
//! on [`StartMode`], the start states. Each iteration takes a projected
//! gradient step: controls are projected onto their admissible sets and
//! start positions onto the start rectangles of the agent's type. Step
//! lengths come from Armijo backtracking on the true objective, so every
//! accepted iterate lowers the objective.
//!
//! For a team with one agent type the objective is the ergodic metric of
//! the whole team against the map. With several types, each type plans
//! against its own band-limited target (see [`crate::allocation`]) and the
//! objective is the sum of the per-type metrics. Plans are always scored by
//! the team metric against the full map.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{
    project_controls_in_place, rollout_into, vjp_into, AgentSpec, ControlSequence, MotionModel,
    StartState, Trajectory,
};
use crate::allocation::{band_targets, partition_bands, BandPartition};
use crate::error::{precondition, Error, Result};
use crate::maps::{GridMap, StartRegionSet};
use crate::spectral::{gradient_weights, map_coefficients, weighted_distance, BasisSpec, CoefficientVector, TrigTables};
use crate::{derive_seed, seeded_rng, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StartMode {
    /// Starts are given and not optimized.
    FixedStart,
    /// One start location shared by every agent, optimized.
    SharedOptimizedStart,
    /// One optimized start per agent, each inside its type's regions.
    PerAgentOptimizedStart,
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub map: GridMap,
    pub basis: BasisSpec,
    pub agents: Vec<AgentSpec>,
    pub regions: StartRegionSet,
    pub mode: StartMode,
    /// Start positions, one per agent; required for [`StartMode::FixedStart`].
    pub fixed_starts: Option<Vec<Point>>,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.agents.first() else {
            return Err(Error::Config("the team needs at least one agent".into()));
        };
        for a in &self.agents {
            a.validate()?;
            if a.horizon_steps != first.horizon_steps || a.dt != first.dt {
                return Err(Error::Config(
                    "all agents must share the same dt and horizon".into(),
                ));
            }
            self.regions.rects(a.type_id)?;
        }
        if self.map.lengths() != self.basis.lengths() {
            return precondition("map and basis domains differ");
        }
        self.regions.check_within(self.map.lengths())?;
        match (&self.mode, &self.fixed_starts) {
            (StartMode::FixedStart, None) => {
                return precondition("fixed-start mode needs one start per agent")
            }
            (_, Some(starts)) => {
                if starts.len() != self.agents.len() {
                    return Err(Error::DimensionMismatch {
                        expected: self.agents.len(),
                        found: starts.len(),
                    });
                }
                for (i, (p, a)) in starts.iter().zip(&self.agents).enumerate() {
                    if !self.regions.contains(a.type_id, *p)? {
                        return precondition(format!(
                            "start of agent {i} lies outside the regions of type {}",
                            a.type_id
                        ));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Distinct agent types in ascending order.
    pub fn type_ids(&self) -> Vec<u32> {
        let mut t: Vec<u32> = self.agents.iter().map(|a| a.type_id).collect();
        t.sort_unstable();
        t.dedup();
        t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    pub initial_step: f64,
    /// Step shrink factor per backtrack.
    pub backtrack: f64,
    /// Sufficient-decrease parameter of the Armijo test.
    pub armijo_slope: f64,
    /// Stop when an accepted step lowers the objective by less than this
    /// fraction.
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Initial controls are drawn with magnitude at most this fraction of
    /// `u_max`.
    pub init_control_scale: f64,
    pub max_backtracks: usize,
    /// Relative step length applied to start variables.
    pub start_step_scale: f64,
    /// Cycles of alternating projection for a shared start.
    pub projection_rounds: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 300,
            initial_step: 1.0,
            backtrack: 0.5,
            armijo_slope: 1e-4,
            tol: 1e-7,
            restarts: 8,
            seed: 0,
            init_control_scale: 0.1,
            max_backtracks: 40,
            start_step_scale: 1.0,
            projection_rounds: 50,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.initial_step > 0.0
            && self.armijo_slope > 0.0
            && self.armijo_slope < 1.0
            && self.tol >= 0.0
            && self.restarts >= 1
            && self.start_step_scale > 0.0
            && self.projection_rounds >= 1
            && (0.0..=1.0).contains(&self.init_control_scale);
        if !positive {
            return Err(Error::Config("optimizer parameters out of range".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::Config(format!(
                "backtrack factor must lie in (0, 1), got {}",
                self.backtrack
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    MaxIterations,
    /// Relative decrease fell below the tolerance.
    Converged,
    /// No step length satisfied the sufficient-decrease test.
    LineSearchFailed,
    /// The projected gradient step is zero.
    Stationary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestartSummary {
    pub seed: u64,
    pub initial_starts: Vec<StartState>,
    /// Fingerprint of the random draws used to initialize controls.
    pub control_draws: u64,
    pub team_metric: f64,
    pub objective: f64,
    pub iterations: usize,
    pub termination: Termination,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub starts: Vec<StartState>,
    pub controls: Vec<ControlSequence>,
    pub trajectories: Vec<Trajectory>,
    /// Ergodic metric of the whole team against the full map.
    pub team_metric: f64,
    /// Metric of each type against its own target, by ascending type id.
    pub type_metrics: Vec<(u32, f64)>,
    /// Objective after every accepted iteration, starting with the initial
    /// value.
    pub objective_trace: Vec<f64>,
    /// Projected-gradient step norm per iteration (at the initial step).
    pub step_norms: Vec<f64>,
    pub clamp_flags: Vec<bool>,
    pub iterations: usize,
    pub termination: Termination,
    /// Index of the winning restart.
    pub restart: usize,
    pub restarts: Vec<RestartSummary>,
}

/// One group of agents scored against a common target.
#[derive(Clone, Debug)]
struct Group {
    type_id: u32,
    agents: Vec<usize>,
    target: CoefficientVector,
}

/// Problem data that does not change across iterations.
#[derive(Clone, Debug)]
pub struct Prepared<'a> {
    problem: &'a ProblemSpec,
    xi: CoefficientVector,
    partition: Option<BandPartition>,
    groups: Vec<Group>,
    team: Group,
    types: Vec<u32>,
    centroid: Point,
}

impl<'a> Prepared<'a> {
    pub fn new(problem: &'a ProblemSpec) -> Result<Self> {
        problem.validate()?;
        let xi = map_coefficients(&problem.map, &problem.basis)?;
        let types = problem.type_ids();
        let all: Vec<usize> = (0..problem.agents.len()).collect();
        let team = Group {
            type_id: types[0],
            agents: all,
            target: xi.clone(),
        };
        let (partition, groups) = if types.len() == 1 {
            (None, vec![team.clone()])
        } else {
            let partition = partition_bands(&problem.basis, &xi, &problem.agents)?;
            let targets = band_targets(
                &xi,
                &partition,
                &problem.basis,
                problem.map.nx(),
                problem.map.ny(),
            )?;
            let groups = types
                .iter()
                .map(|&t| {
                    let band = partition.band_of_type(t).expect("every type has a band");
                    Group {
                        type_id: t,
                        agents: (0..problem.agents.len())
                            .filter(|&i| problem.agents[i].type_id == t)
                            .collect(),
                        target: targets[band].clone(),
                    }
                })
                .collect();
            (Some(partition), groups)
        };
        Ok(Self {
            problem,
            xi,
            partition,
            groups,
            team,
            types,
            centroid: problem.map.centroid(),
        })
    }

    pub fn xi(&self) -> &CoefficientVector {
        &self.xi
    }

    pub fn partition(&self) -> Option<&BandPartition> {
        self.partition.as_ref()
    }

    /// Target coefficients per type, by ascending type id.
    pub fn targets(&self) -> Vec<(u32, &CoefficientVector)> {
        self.groups.iter().map(|g| (g.type_id, &g.target)).collect()
    }
}

/// Decision variables.
#[derive(Clone, Debug, PartialEq)]
struct Vars {
    starts: Vec<StartState>,
    controls: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug)]
struct Grad {
    starts: Vec<[f64; 3]>,
    controls: Vec<Vec<[f64; 2]>>,
}

/// Reusable buffers for rollouts and gradient evaluation.
struct Workspace {
    positions: Vec<Vec<Point>>,
    headings: Vec<Vec<f64>>,
    clamped: Vec<Vec<bool>>,
    tables: TrigTables,
    acc: Vec<f64>,
    point_grads: Vec<Point>,
}

impl Workspace {
    fn new(problem: &ProblemSpec) -> Self {
        let n = problem.agents.len();
        let s = problem.agents[0].samples();
        Self {
            positions: vec![Vec::with_capacity(s); n],
            headings: vec![Vec::with_capacity(s); n],
            clamped: vec![Vec::with_capacity(s); n],
            tables: problem.basis.tables(),
            acc: vec![0.0; problem.basis.len()],
            point_grads: vec![[0.0; 2]; s],
        }
    }
}

fn rollout_all(problem: &ProblemSpec, vars: &Vars, ws: &mut Workspace) {
    let lengths = problem.map.lengths();
    for (i, spec) in problem.agents.iter().enumerate() {
        rollout_into(
            spec,
            lengths,
            vars.starts[i],
            &vars.controls[i],
            &mut ws.positions[i],
            &mut ws.headings[i],
            &mut ws.clamped[i],
        );
    }
}


/// Metric of one group from rolled-out positions. With `grad`, the group's
/// gradient with respect to its agents' starts and controls is written
/// into it.
fn group_metric(
    problem: &ProblemSpec,
    group: &Group,
    vars: &Vars,
    ws: &mut Workspace,
    grad: Option<&mut Grad>,
) -> Result<f64> {
    let basis = &problem.basis;
    ws.acc.iter_mut().for_each(|v| *v = 0.0);
    for &i in &group.agents {
        basis.accumulate_products(&ws.positions[i], &mut ws.tables, &mut ws.acc)?;
    }
    let samples = ws.positions[group.agents[0]].len();
    let count = (group.agents.len() * samples) as f64;
    let c: Vec<f64> = ws
        .acc
        .iter()
        .zip(basis.normalizations())
        .map(|(a, h)| a / (count * h))
        .collect();
    let phi = weighted_distance(&c, group.target.values(), basis.weights());
    if let Some(grad) = grad {
        let w = gradient_weights(basis, &c, group.target.values(), 2.0 / count);
        for &i in &group.agents {
            for (g, &p) in ws.point_grads.iter_mut().zip(&ws.positions[i]) {
                basis.fill_tables(p, &mut ws.tables);
                *g = basis.weighted_gradient(&w, &ws.tables);
            }
            let g0 = vjp_into(
                &problem.agents[i],
                &ws.headings[i],
                &vars.controls[i],
                &ws.point_grads,
                &mut grad.controls[i],
            );
            grad.starts[i] = [g0.position[0], g0.position[1], g0.heading];
        }
    }
    Ok(phi)
}

fn zero_grad(problem: &ProblemSpec) -> Grad {
    Grad {
        starts: vec![[0.0; 3]; problem.agents.len()],
        controls: problem
            .agents
            .iter()
            .map(|a| vec![[0.0; 2]; a.horizon_steps])
            .collect(),
    }
}

/// Planning objective: the sum of the group metrics.
fn objective(prep: &Prepared, vars: &Vars, ws: &mut Workspace, mut grad: Option<&mut Grad>) -> Result<f64> {
    rollout_all(prep.problem, vars, ws);
    let mut total = 0.0;
    for group in &prep.groups {
        total += group_metric(prep.problem, group, vars, ws, grad.as_deref_mut())?;
    }
    Ok(total)
}

fn team_metric(prep: &Prepared, vars: &Vars, ws: &mut Workspace) -> Result<f64> {
    rollout_all(prep.problem, vars, ws);
    group_metric(prep.problem, &prep.team, vars, ws, None)
}

fn type_metrics(prep: &Prepared, vars: &Vars, ws: &mut Workspace) -> Result<Vec<(u32, f64)>> {
    rollout_all(prep.problem, vars, ws);
    prep.groups
        .iter()
        .map(|g| Ok((g.type_id, group_metric(prep.problem, g, vars, ws, None)?)))
        .collect()
}

fn optimizes_starts(mode: StartMode) -> bool {
    !matches!(mode, StartMode::FixedStart)
}

/// Projected gradient candidate at step `alpha`, or `None` when a shared
/// start cannot be projected into every type's regions.
fn candidate(prep: &Prepared, config: &OptimizerConfig, vars: &Vars, grad: &Grad, alpha: f64) -> Result<Option<Vars>> {
    let problem = prep.problem;
    let mut next = vars.clone();
    for (i, spec) in problem.agents.iter().enumerate() {
        for (c, g) in next.controls[i].iter_mut().zip(&grad.controls[i]) {
            c[0] -= alpha * g[0];
            c[1] -= alpha * g[1];
        }
        project_controls_in_place(spec, &mut next.controls[i]);
    }
    let beta = alpha * config.start_step_scale;
    match problem.mode {
        StartMode::FixedStart => {}
        StartMode::PerAgentOptimizedStart => {
            for (i, spec) in problem.agents.iter().enumerate() {
                let s = &mut next.starts[i];
                let g = grad.starts[i];
                let moved = [s.position[0] - beta * g[0], s.position[1] - beta * g[1]];
                s.position = problem.regions.project(spec.type_id, moved)?;
            }
        }
        StartMode::SharedOptimizedStart => {
            let mut g = [0.0, 0.0];
            for gs in &grad.starts {
                g[0] += gs[0];
                g[1] += gs[1];
            }
            let p = vars.starts[0].position;
            let moved = [p[0] - beta * g[0], p[1] - beta * g[1]];
            let Some(q) = problem
                .regions
                .cyclic_projection(&prep.types, moved, config.projection_rounds)?
            else {
                return Ok(None);
            };
            next.starts.iter_mut().for_each(|s| s.position = q);
        }
    }
    if optimizes_starts(problem.mode) {
        for (i, spec) in problem.agents.iter().enumerate() {
            if spec.is_diff_drive() {
                next.starts[i].heading -= beta * grad.starts[i][2];
            }
        }
    }
    Ok(Some(next))
}

/// Squared step length and directional derivative `grad . (next - vars)`.
fn step_stats(vars: &Vars, next: &Vars, grad: &Grad) -> (f64, f64) {
    let mut norm_sq = 0.0;
    let mut slope = 0.0;
    for i in 0..vars.starts.len() {
        let a = vars.starts[i];
        let b = next.starts[i];
        let d = [
            b.position[0] - a.position[0],
            b.position[1] - a.position[1],
            b.heading - a.heading,
        ];
        for (dk, gk) in d.iter().zip(&grad.starts[i]) {
            norm_sq += dk * dk;
            slope += dk * gk;
        }
        for ((ca, cb), g) in vars.controls[i].iter().zip(&next.controls[i]).zip(&grad.controls[i]) {
            for k in 0..2 {
                let dk = cb[k] - ca[k];
                norm_sq += dk * dk;
                slope += dk * g[k];
            }
        }
    }
    (norm_sq, slope)
}

/// A start location inside every type's regions.
fn shared_start<R: Rng>(prep: &Prepared, config: &OptimizerConfig, rng: &mut R) -> Result<Point> {
    let regions = &prep.problem.regions;
    let first = prep.types[0];
    for _ in 0..1000 {
        let p = regions.sample_start(first, rng)?;
        if regions.contains_all(&prep.types, p)? {
            return Ok(p);
        }
    }
    for _ in 0..100 {
        let p = regions.sample_start(first, rng)?;
        if let Some(q) = regions.cyclic_projection(&prep.types, p, config.projection_rounds)? {
            return Ok(q);
        }
    }
    Err(Error::Infeasible {
        types: prep.types.clone(),
    })
}

fn initial_starts<R: Rng>(prep: &Prepared, config: &OptimizerConfig, rng: &mut R) -> Result<Vec<StartState>> {
    let problem = prep.problem;
    let facing = |p: Point| StartState::facing(p, prep.centroid);
    Ok(match problem.mode {
        StartMode::FixedStart => problem
            .fixed_starts
            .as_ref()
            .expect("validated")
            .iter()
            .map(|&p| facing(p))
            .collect(),
        StartMode::PerAgentOptimizedStart => problem
            .agents
            .iter()
            .map(|a| Ok(facing(problem.regions.sample_start(a.type_id, rng)?)))
            .collect::<Result<_>>()?,
        StartMode::SharedOptimizedStart => {
            let p = shared_start(prep, config, rng)?;
            vec![facing(p); problem.agents.len()]
        }
    })
}

/// Small random feasible controls. Every agent and step consumes exactly two
/// draws, whatever the mode, so paired runs see identical controls.
fn initial_controls<R: Rng>(problem: &ProblemSpec, scale: f64, rng: &mut R) -> (Vec<Vec<[f64; 2]>>, u64) {
    let mut checksum = 0u64;
    let controls = problem
        .agents
        .iter()
        .map(|spec| {
            let mut u: Vec<[f64; 2]> = (0..spec.horizon_steps)
                .map(|_| {
                    let a: f64 = rng.gen();
                    let b: f64 = rng.gen();
                    checksum = checksum.rotate_left(7) ^ a.to_bits() ^ b.to_bits().rotate_left(32);
                    let cap = scale * spec.u_max;
                    match spec.motion {
                        MotionModel::Integrator => {
                            let (s, c) = (std::f64::consts::TAU * b).sin_cos();
                            [a * cap * c, a * cap * s]
                        }
                        MotionModel::DiffDrive { kappa_max, v_min } => {
                            let v = v_min + a * (cap.max(v_min) - v_min);
                            [v, (2.0 * b - 1.0) * kappa_max * v]
                        }
                    }
                })
                .collect();
            project_controls_in_place(spec, &mut u);
            u
        })
        .collect();
    (controls, checksum)
}

struct RestartRun {
    vars: Vars,
    summary: RestartSummary,
    trace: Vec<f64>,
    step_norms: Vec<f64>,
}

fn run_restart(prep: &Prepared, config: &OptimizerConfig, seed: u64) -> Result<RestartRun> {
    let problem = prep.problem;
    let mut start_rng = seeded_rng(derive_seed(seed, 1));
    let mut control_rng = seeded_rng(derive_seed(seed, 2));
    let starts = initial_starts(prep, config, &mut start_rng)?;
    let (controls, control_draws) = initial_controls(problem, config.init_control_scale, &mut control_rng);
    let mut vars = Vars { starts, controls };
    let initial_starts = vars.starts.clone();

    let mut ws = Workspace::new(problem);
    let mut grad = zero_grad(problem);
    let mut value = objective(prep, &vars, &mut ws, Some(&mut grad))?;
    let mut trace = vec![value];
    let mut step_norms = Vec::new();
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    'outer: while iterations < config.max_iters {
        let mut alpha = config.initial_step;
        let mut accepted = None;
        for attempt in 0..=config.max_backtracks {
            if let Some(next) = candidate(prep, config, &vars, &grad, alpha)? {
                let (norm_sq, slope) = step_stats(&vars, &next, &grad);
                if attempt == 0 {
                    step_norms.push(norm_sq.sqrt() / alpha);
                    if norm_sq == 0.0 {
                        termination = Termination::Stationary;
                        break 'outer;
                    }
                }
                if slope < 0.0 {
                    let trial = objective(prep, &next, &mut ws, None)?;
                    if trial <= value + config.armijo_slope * slope {
                        accepted = Some(next);
                        break;
                    }
                }
            }
            alpha *= config.backtrack;
        }
        let Some(next) = accepted else {
            termination = Termination::LineSearchFailed;
            break;
        };
        vars = next;
        let new_value = objective(prep, &vars, &mut ws, Some(&mut grad))?;
        debug_assert!(new_value <= value);
        trace.push(new_value);
        iterations += 1;
        let decrease = value - new_value;
        value = new_value;
        if decrease <= config.tol * (value + decrease) {
            termination = Termination::Converged;
            break;
        }
    }

    let team = team_metric(prep, &vars, &mut ws)?;
    Ok(RestartRun {
        summary: RestartSummary {
            seed,
            initial_starts,
            control_draws,
            team_metric: team,
            objective: value,
            iterations,
            termination,
        },
        vars,
        trace,
        step_norms,
    })
}

fn trajectories(problem: &ProblemSpec, vars: &Vars, ws: &mut Workspace) -> Vec<Trajectory> {
    rollout_all(problem, vars, ws);
    problem
        .agents
        .iter()
        .enumerate()
        .map(|(i, spec)| Trajectory {
            positions: ws.positions[i].clone(),
            headings: if spec.is_diff_drive() {
                ws.headings[i].clone()
            } else {
                Vec::new()
            },
            dt: spec.dt,
            clamped: ws.clamped[i].clone(),
        })
        .collect()
}

/// Plans starts and controls for the team.
///
/// Runs `config.restarts` independent restarts and returns the one with the
/// lowest team metric (earliest restart on ties).
pub fn plan(problem: &ProblemSpec, config: &OptimizerConfig) -> Result<Solution> {
    config.validate()?;
    let prep = Prepared::new(problem)?;
    plan_prepared(&prep, config)
}

/// [`plan`] with targets already computed.
pub fn plan_prepared(prep: &Prepared, config: &OptimizerConfig) -> Result<Solution> {
    config.validate()?;
    let problem = prep.problem;
    let mut best: Option<RestartRun> = None;
    let mut best_index = 0;
    let mut summaries = Vec::with_capacity(config.restarts);
    for r in 0..config.restarts {
        let run = run_restart(prep, config, derive_seed(config.seed, r as u64))?;
        summaries.push(run.summary.clone());
        let better = best
            .as_ref()
            .map_or(true, |b| run.summary.team_metric < b.summary.team_metric);
        if better {
            best = Some(run);
            best_index = r;
        }
    }
    let best = best.expect("at least one restart");
    let mut ws = Workspace::new(problem);
    let trajectories = trajectories(problem, &best.vars, &mut ws);
    let type_metrics = type_metrics(prep, &best.vars, &mut ws)?;
    let dt = problem.agents[0].dt;
    Ok(Solution {
        starts: best.vars.starts.clone(),
        controls: best
            .vars
            .controls
            .iter()
            .map(|c| ControlSequence {
                controls: c.clone(),
                dt,
            })
            .collect(),
        clamp_flags: trajectories.iter().map(Trajectory::clamp_active).collect(),
        trajectories,
        team_metric: best.summary.team_metric,
        type_metrics,
        objective_trace: best.trace,
        step_norms: best.step_norms,
        iterations: best.summary.iterations,
        termination: best.summary.termination,
        restart: best_index,
        restarts: summaries,
    })
}

fn vars_from(problem: &ProblemSpec, starts: &[StartState], controls: &[ControlSequence]) -> Result<Vars> {
    let n = problem.agents.len();
    if starts.len() != n || controls.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: starts.len().min(controls.len()),
        });
    }
    for (i, spec) in problem.agents.iter().enumerate() {
        if !problem.regions.contains(spec.type_id, starts[i].position)? {
            return precondition(format!("start of agent {i} is outside its regions"));
        }
        let u = &controls[i];
        if u.controls.len() != spec.horizon_steps || u.dt != spec.dt {
            return precondition(format!("controls of agent {i} do not match its horizon"));
        }
        if !crate::agents::controls_feasible(spec, u) {
            return precondition(format!("controls of agent {i} violate its limits"));
        }
    }
    Ok(Vars {
        starts: starts.to_vec(),
        controls: controls.iter().map(|c| c.controls.clone()).collect(),
    })
}

/// Scores a candidate plan: the team metric against the full map and the
/// metric of each type against its own target.
pub fn evaluate(
    problem: &ProblemSpec,
    starts: &[StartState],
    controls: &[ControlSequence],
) -> Result<(f64, Vec<(u32, f64)>)> {
    let prep = Prepared::new(problem)?;
    evaluate_prepared(&prep, starts, controls)
}

pub fn evaluate_prepared(
    prep: &Prepared,
    starts: &[StartState],
    controls: &[ControlSequence],
) -> Result<(f64, Vec<(u32, f64)>)> {
    let vars = vars_from(prep.problem, starts, controls)?;
    let mut ws = Workspace::new(prep.problem);
    let team = team_metric(prep, &vars, &mut ws)?;
    let per_type = type_metrics(prep, &vars, &mut ws)?;
    Ok((team, per_type))
}

/// Outcome of comparing the analytic team-metric gradient against central
/// finite differences.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientReport {
    /// Largest absolute deviation divided by the largest finite-difference
    /// entry.
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub gradient_scale: f64,
    pub entries: usize,
    /// Whether any sample hit the domain boundary (the check is only exact
    /// when this is false).
    pub clamp_active: bool,
}

/// Finite-difference step used by [`gradient_check`].
pub const FD_STEP: f64 = 1e-5;

/// Compares the analytic gradient of the team metric with respect to every
/// start coordinate and control against central differences, at random
/// starts inside the regions and random admissible controls.
pub fn gradient_check(problem: &ProblemSpec, seed: u64) -> Result<GradientReport> {
    let prep = Prepared::new(problem)?;
    let mut rng = seeded_rng(seed);
    let mut starts = Vec::with_capacity(problem.agents.len());
    for spec in &problem.agents {
        let p = problem.regions.sample_start(spec.type_id, &mut rng)?;
        let heading = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        starts.push(StartState { position: p, heading });
    }
    let (controls, _) = initial_controls(problem, 1.0, &mut rng);
    let mut vars = Vars { starts, controls };

    let mut ws = Workspace::new(problem);
    let mut grad = zero_grad(problem);
    rollout_all(problem, &vars, &mut ws);
    group_metric(problem, &prep.team, &vars, &mut ws, Some(&mut grad))?;
    let clamp_active = ws.clamped.iter().flatten().any(|c| *c);

    let eval = |v: &Vars, ws: &mut Workspace| -> Result<f64> { team_metric(&prep, v, ws) };
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for i in 0..problem.agents.len() {
        let coords = if problem.agents[i].is_diff_drive() { 3 } else { 2 };
        for k in 0..coords {
            let orig = vars.starts[i];
            let bump = |s: &mut StartState, h: f64| match k {
                0 => s.position[0] += h,
                1 => s.position[1] += h,
                _ => s.heading += h,
            };
            bump(&mut vars.starts[i], FD_STEP);
            let plus = eval(&vars, &mut ws)?;
            vars.starts[i] = orig;
            bump(&mut vars.starts[i], -FD_STEP);
            let minus = eval(&vars, &mut ws)?;
            vars.starts[i] = orig;
            pairs.push((grad.starts[i][k], (plus - minus) / (2.0 * FD_STEP)));
        }
        for j in 0..vars.controls[i].len() {
            for k in 0..2 {
                let orig = vars.controls[i][j][k];
                vars.controls[i][j][k] = orig + FD_STEP;
                let plus = eval(&vars, &mut ws)?;
                vars.controls[i][j][k] = orig - FD_STEP;
                let minus = eval(&vars, &mut ws)?;
                vars.controls[i][j][k] = orig;
                pairs.push((grad.controls[i][j][k], (plus - minus) / (2.0 * FD_STEP)));
            }
        }
    }
    let scale = pairs.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let max_abs = pairs.iter().map(|p| (p.0 - p.1).abs()).fold(0.0, f64::max);
    Ok(GradientReport {
        max_rel_error: max_abs / scale.max(f64::MIN_POSITIVE),
        max_abs_error: max_abs,
        gradient_scale: scale,
        entries: pairs.len(),
        clamp_active,
    })
}
