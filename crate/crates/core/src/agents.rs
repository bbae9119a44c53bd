//! Agent motion and sensor models.
//!
//! Two motion models are supported, both discretized with explicit Euler
//! steps of length `dt`:
//!
//! - `Integrator`: state `(x, y)`, control `(u_x, u_y)` with `|u| <= u_max`,
//!   `p[j+1] = p[j] + dt * u[j]`.
//! - `DiffDrive`: state `(x, y, theta)`, control `(v, omega)` with
//!   `v_min <= v <= u_max` and `|omega| <= kappa_max * v`, so the path
//!   curvature `omega / v` never exceeds `kappa_max`.
//!
//! Positions are clamped to the domain after every step. The backward pass
//! treats the clamp as the identity, which makes [`rollout_vjp`] exact
//! whenever no clamp was active.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::maps::GridMap;
use crate::Point;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MotionModel {
    Integrator,
    DiffDrive { kappa_max: f64, v_min: f64 },
}

/// Gaussian sensor footprint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    pub sigma: f64,
    pub peak_prob: f64,
}

impl SensorModel {
    /// Narrow footprint, high detection probability (`sigma = 0.02 L`).
    pub fn high_fidelity(domain_length: f64) -> Self {
        Self {
            sigma: 0.02 * domain_length,
            peak_prob: 0.95,
        }
    }

    /// Wide footprint, low detection probability (`sigma = 0.08 L`).
    pub fn low_fidelity(domain_length: f64) -> Self {
        Self {
            sigma: 0.08 * domain_length,
            peak_prob: 0.6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sensor sigma must be positive, got {}", self.sigma)));
        }
        if !(self.peak_prob > 0.0 && self.peak_prob <= 1.0) {
            return Err(Error::Config(format!(
                "sensor peak probability must lie in (0, 1], got {}",
                self.peak_prob
            )));
        }
        Ok(())
    }

    /// Detection likelihood at squared distance `d2` from the sensor.
    pub fn likelihood(&self, d2: f64) -> f64 {
        self.peak_prob * (-d2 / (2.0 * self.sigma * self.sigma)).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub type_id: u32,
    pub motion: MotionModel,
    pub sensor: SensorModel,
    pub u_max: f64,
    pub dt: f64,
    pub horizon_steps: usize,
}

pub const DEFAULT_DT: f64 = 0.1;
pub const DEFAULT_HORIZON: usize = 100;

impl AgentSpec {
    pub fn integrator(type_id: u32, sensor: SensorModel, u_max: f64) -> Self {
        Self {
            type_id,
            motion: MotionModel::Integrator,
            sensor,
            u_max,
            dt: DEFAULT_DT,
            horizon_steps: DEFAULT_HORIZON,
        }
    }

    pub fn diff_drive(type_id: u32, sensor: SensorModel, u_max: f64, kappa_max: f64, v_min: f64) -> Self {
        Self {
            type_id,
            motion: MotionModel::DiffDrive { kappa_max, v_min },
            sensor,
            u_max,
            dt: DEFAULT_DT,
            horizon_steps: DEFAULT_HORIZON,
        }
    }

    pub fn with_horizon(mut self, dt: f64, horizon_steps: usize) -> Self {
        self.dt = dt;
        self.horizon_steps = horizon_steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.sensor.validate()?;
        if !(self.u_max > 0.0 && self.u_max.is_finite()) {
            return Err(Error::Config(format!("u_max must be positive, got {}", self.u_max)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) || self.horizon_steps == 0 {
            return Err(Error::Config("dt and horizon_steps must be positive".into()));
        }
        if let MotionModel::DiffDrive { kappa_max, v_min } = self.motion {
            if !(kappa_max > 0.0 && kappa_max.is_finite()) {
                return Err(Error::Config(format!("kappa_max must be positive, got {kappa_max}")));
            }
            if !(v_min >= 0.0 && v_min <= self.u_max) {
                return Err(Error::Config(format!("v_min must lie in [0, u_max], got {v_min}")));
            }
        }
        Ok(())
    }

    pub fn is_diff_drive(&self) -> bool {
        matches!(self.motion, MotionModel::DiffDrive { .. })
    }

    /// Number of position samples in a rollout: the start plus one per step.
    pub fn samples(&self) -> usize {
        self.horizon_steps + 1
    }
}

/// Initial state. The heading is only meaningful for differential drives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartState {
    pub position: Point,
    pub heading: f64,
}

impl StartState {
    pub fn at(position: Point) -> Self {
        Self {
            position,
            heading: 0.0,
        }
    }

    /// Start at `position` facing `target` (heading 0 if they coincide).
    pub fn facing(position: Point, target: Point) -> Self {
        let dx = target[0] - position[0];
        let dy = target[1] - position[1];
        let heading = if dx == 0.0 && dy == 0.0 { 0.0 } else { dy.atan2(dx) };
        Self { position, heading }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControlSequence {
    pub controls: Vec<[f64; 2]>,
    pub dt: f64,
}

impl ControlSequence {
    pub fn zeros(spec: &AgentSpec) -> Self {
        let mut controls = vec![[0.0; 2]; spec.horizon_steps];
        if let MotionModel::DiffDrive { v_min, .. } = spec.motion {
            controls.iter_mut().for_each(|c| c[0] = v_min);
        }
        Self {
            controls,
            dt: spec.dt,
        }
    }

    pub fn constant(spec: &AgentSpec, control: [f64; 2]) -> Self {
        Self {
            controls: vec![control; spec.horizon_steps],
            dt: spec.dt,
        }
    }
}

/// Sampled agent path: the start followed by one state per step.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub positions: Vec<Point>,
    /// Headings per sample for differential drives, empty for integrators.
    pub headings: Vec<f64>,
    pub dt: f64,
    /// Per sample, whether the domain clamp changed the position.
    pub clamped: Vec<bool>,
}

impl Trajectory {
    pub fn clamp_active(&self) -> bool {
        self.clamped.iter().any(|c| *c)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

impl AsRef<[Point]> for Trajectory {
    fn as_ref(&self) -> &[Point] {
        &self.positions
    }
}

const FEASIBILITY_SLACK: f64 = 1e-12;

fn project_one(spec: &AgentSpec, c: [f64; 2]) -> [f64; 2] {
    match spec.motion {
        MotionModel::Integrator => {
            let norm = c[0].hypot(c[1]);
            if norm > spec.u_max * (1.0 + FEASIBILITY_SLACK) {
                let s = spec.u_max / norm;
                [c[0] * s, c[1] * s]
            } else {
                c
            }
        }
        MotionModel::DiffDrive { kappa_max, v_min } => {
            let v = c[0].clamp(v_min, spec.u_max);
            let w_max = kappa_max * v;
            [v, c[1].clamp(-w_max, w_max)]
        }
    }
}

fn feasible_one(spec: &AgentSpec, c: [f64; 2]) -> bool {
    match spec.motion {
        MotionModel::Integrator => c[0].hypot(c[1]) <= spec.u_max * (1.0 + FEASIBILITY_SLACK),
        MotionModel::DiffDrive { kappa_max, v_min } => {
            c[0] >= v_min && c[0] <= spec.u_max && c[1].abs() <= kappa_max * c[0]
        }
    }
}

pub(crate) fn project_controls_in_place(spec: &AgentSpec, controls: &mut [[f64; 2]]) {
    for c in controls {
        *c = project_one(spec, *c);
    }
}

/// Projects every control onto the admissible set of `spec`. Integrator
/// controls are scaled radially into the `u_max` ball; differential-drive
/// controls have `v` clamped first and then `omega`.
pub fn project_controls(spec: &AgentSpec, u: &ControlSequence) -> ControlSequence {
    let mut out = u.clone();
    project_controls_in_place(spec, &mut out.controls);
    out
}

pub fn controls_feasible(spec: &AgentSpec, u: &ControlSequence) -> bool {
    u.controls.iter().all(|c| feasible_one(spec, *c))
}

fn check_inputs(spec: &AgentSpec, u: &ControlSequence) -> Result<()> {
    spec.validate()?;
    if u.controls.len() != spec.horizon_steps {
        return Err(Error::DimensionMismatch {
            expected: spec.horizon_steps,
            found: u.controls.len(),
        });
    }
    if u.dt != spec.dt {
        return precondition(format!("control dt {} differs from agent dt {}", u.dt, spec.dt));
    }
    Ok(())
}

/// Integrates the dynamics from `x0` under the controls `u`.
pub fn rollout(spec: &AgentSpec, lengths: [f64; 2], x0: StartState, u: &ControlSequence) -> Result<Trajectory> {
    check_inputs(spec, u)?;
    if let Some(j) = u.controls.iter().position(|c| !feasible_one(spec, *c)) {
        return precondition(format!("control {j} violates the agent limits"));
    }
    let p = x0.position;
    if !((0.0..=lengths[0]).contains(&p[0]) && (0.0..=lengths[1]).contains(&p[1])) {
        return Err(Error::DomainViolation { point: p, lengths });
    }
    let mut positions = Vec::new();
    let mut headings = Vec::new();
    let mut clamped = Vec::new();
    rollout_into(spec, lengths, x0, &u.controls, &mut positions, &mut headings, &mut clamped);
    if !spec.is_diff_drive() {
        headings.clear();
    }
    Ok(Trajectory {
        positions,
        headings,
        dt: spec.dt,
        clamped,
    })
}

/// Unchecked rollout into reusable buffers. Headings are always filled.
pub(crate) fn rollout_into(
    spec: &AgentSpec,
    lengths: [f64; 2],
    x0: StartState,
    controls: &[[f64; 2]],
    positions: &mut Vec<Point>,
    headings: &mut Vec<f64>,
    clamped: &mut Vec<bool>,
) {
    positions.clear();
    headings.clear();
    clamped.clear();
    let mut p = x0.position;
    let mut theta = x0.heading;
    positions.push(p);
    headings.push(theta);
    clamped.push(false);
    let dt = spec.dt;
    for c in controls {
        let next = match spec.motion {
            MotionModel::Integrator => [p[0] + dt * c[0], p[1] + dt * c[1]],
            MotionModel::DiffDrive { .. } => {
                let (s, co) = theta.sin_cos();
                let q = [p[0] + dt * c[0] * co, p[1] + dt * c[0] * s];
                theta += dt * c[1];
                q
            }
        };
        p = [next[0].clamp(0.0, lengths[0]), next[1].clamp(0.0, lengths[1])];
        positions.push(p);
        headings.push(theta);
        clamped.push(p != next);
    }
}

/// Gradient with respect to the start state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StartGradient {
    pub position: Point,
    pub heading: f64,
}

/// Pulls per-sample position gradients back through the rollout,
/// returning the gradient with respect to the start state and to every
/// control.
pub fn rollout_vjp(
    spec: &AgentSpec,
    x0: StartState,
    u: &ControlSequence,
    point_gradients: &[Point],
) -> Result<(StartGradient, Vec<[f64; 2]>)> {
    check_inputs(spec, u)?;
    if point_gradients.len() != spec.samples() {
        return Err(Error::DimensionMismatch {
            expected: spec.samples(),
            found: point_gradients.len(),
        });
    }
    let mut headings = Vec::with_capacity(spec.samples());
    headings.push(x0.heading);
    let mut theta = x0.heading;
    for c in &u.controls {
        theta += spec.dt * c[1];
        headings.push(theta);
    }
    let mut grad_u = vec![[0.0; 2]; spec.horizon_steps];
    let g0 = vjp_into(spec, &headings, &u.controls, point_gradients, &mut grad_u);
    Ok((g0, grad_u))
}

/// Adjoint recursion. `headings` holds one heading per sample.
pub(crate) fn vjp_into(
    spec: &AgentSpec,
    headings: &[f64],
    controls: &[[f64; 2]],
    point_gradients: &[Point],
    grad_u: &mut [[f64; 2]],
) -> StartGradient {
    let dt = spec.dt;
    let last = controls.len();
    // costate of the state after the final step
    let mut lx = point_gradients[last][0];
    let mut ly = point_gradients[last][1];
    let mut lt = 0.0;
    for j in (0..last).rev() {
        match spec.motion {
            MotionModel::Integrator => {
                grad_u[j] = [dt * lx, dt * ly];
            }
            MotionModel::DiffDrive { .. } => {
                let (s, c) = headings[j].sin_cos();
                let v = controls[j][0];
                grad_u[j] = [dt * (lx * c + ly * s), dt * lt];
                lt += dt * v * (ly * c - lx * s);
            }
        }
        lx += point_gradients[j][0];
        ly += point_gradients[j][1];
    }
    StartGradient {
        position: [lx, ly],
        heading: if spec.is_diff_drive() { lt } else { 0.0 },
    }
}

/// Average sensor detection likelihood over the trajectory, per cell of an
/// `nx` by `ny` grid.
pub fn coverage_reconstruction(
    trajectory: &Trajectory,
    sensor: &SensorModel,
    nx: usize,
    ny: usize,
    lengths: [f64; 2],
) -> Result<GridMap> {
    sensor.validate()?;
    if nx < 2 || ny < 2 {
        return precondition(format!("resolution must be at least 2x2, got {nx}x{ny}"));
    }
    if trajectory.is_empty() {
        return precondition("trajectory has no samples");
    }
    let dx = lengths[0] / nx as f64;
    let dy = lengths[1] / ny as f64;
    let n = trajectory.len() as f64;
    let mut cells = vec![0.0; nx * ny];
    for &p in &trajectory.positions {
        // separable Gaussian: exp(-(a^2 + b^2) / 2s^2) = exp(-a^2/..) exp(-b^2/..)
        let ex: Vec<f64> = (0..nx)
            .map(|ix| {
                let a = (ix as f64 + 0.5) * dx - p[0];
                (-a * a / (2.0 * sensor.sigma * sensor.sigma)).exp()
            })
            .collect();
        for iy in 0..ny {
            let b = (iy as f64 + 0.5) * dy - p[1];
            let ey = sensor.peak_prob * (-b * b / (2.0 * sensor.sigma * sensor.sigma)).exp() / n;
            for (cell, e) in cells[iy * nx..(iy + 1) * nx].iter_mut().zip(&ex) {
                *cell += ey * e;
            }
        }
    }
    GridMap::new(nx, ny, lengths, cells)
}

const TRAJ_MAGIC: &str = "ERGTRAJ 1";

/// One agent's entry in a trajectory export.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub agent_id: usize,
    pub type_id: u32,
    /// Control steps; the block holds `steps + 1` state lines.
    pub steps: usize,
    /// `(x, y)` or `(x, y, theta)` per line.
    pub states: Vec<Vec<f64>>,
}

impl TrajectoryRecord {
    pub fn from_trajectory(agent_id: usize, type_id: u32, t: &Trajectory) -> Self {
        let states = t
            .positions
            .iter()
            .enumerate()
            .map(|(j, p)| match t.headings.get(j) {
                Some(h) => vec![p[0], p[1], *h],
                None => vec![p[0], p[1]],
            })
            .collect();
        Self {
            agent_id,
            type_id,
            steps: t.len().saturating_sub(1),
            states,
        }
    }
}

/// Writes the `ERGTRAJ 1` text format: a header line, then per agent a line
/// `agent <id> <type> <T_steps>` followed by `T_steps + 1` state lines (the
/// start and one per step).
pub fn write_trajectories(records: &[TrajectoryRecord]) -> String {
    let mut out = format!("{TRAJ_MAGIC}\n");
    for r in records {
        let _ = writeln!(out, "agent {} {} {}", r.agent_id, r.type_id, r.steps);
        for s in &r.states {
            let line: Vec<String> = s.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
    }
    out
}

pub fn parse_trajectories(text: &str) -> Result<Vec<TrajectoryRecord>> {
    let perr = |line: usize, message: &str| Error::Parse {
        line,
        message: message.to_string(),
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();
    match lines.next() {
        Some((_, l)) if l.trim() == TRAJ_MAGIC => {}
        _ => return Err(perr(1, "expected header `ERGTRAJ 1`")),
    }
    let mut records = Vec::new();
    while let Some((line_no, line)) = lines.next() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.is_empty() {
            continue;
        }
        if f.len() != 4 || f[0] != "agent" {
            return Err(perr(line_no, "expected `agent <id> <type> <T_steps>`"));
        }
        let agent_id = f[1].parse().map_err(|_| perr(line_no, "bad agent id"))?;
        let type_id = f[2].parse().map_err(|_| perr(line_no, "bad type id"))?;
        let steps: usize = f[3].parse().map_err(|_| perr(line_no, "bad step count"))?;
        let mut states = Vec::with_capacity(steps + 1);
        for _ in 0..=steps {
            let (n, l) = lines.next().ok_or_else(|| perr(line_no, "truncated agent block"))?;
            let values: std::result::Result<Vec<f64>, _> = l.split_whitespace().map(str::parse).collect();
            let values = values.map_err(|_| perr(n, "bad state value"))?;
            if !(values.len() == 2 || values.len() == 3) {
                return Err(perr(n, "state must have 2 or 3 values"));
            }
            states.push(values);
        }
        records.push(TrajectoryRecord {
            agent_id,
            type_id,
            steps,
            states,
        });
    }
    Ok(records)
}
