//! Batch finite-difference check of the planning gradient.

use ergoplan::agents::{AgentSpec, SensorModel};
use ergoplan::maps::{generate_gmm_map, random_gmm_spec, Rect, StartRegionSet};
use ergoplan::optimizer::{gradient_check, ProblemSpec, StartMode};
use ergoplan::spectral::BasisSpec;
use ergoplan::derive_seed;

use crate::config::DEFAULT_KAPPA_MAX;
use crate::error::Result;

/// Instances per motion model.
pub const INSTANCES: usize = 100;
pub const INTEGRATOR_TOLERANCE: f64 = 1e-5;
pub const DIFF_DRIVE_TOLERANCE: f64 = 1e-3;

/// Short horizon keeps every instance away from the domain boundary: starts
/// lie in the central square and agents travel at most `u_max * dt * steps`.
const STEPS: usize = 20;
const U_MAX: f64 = 0.1;
const MAX_INDEX: usize = 8;
const RESOLUTION: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckSummary {
    pub integrator_max_rel_error: f64,
    pub diff_drive_max_rel_error: f64,
    pub instances: usize,
    /// Instances where some sample touched the boundary.
    pub clamped_instances: usize,
}

impl GradCheckSummary {
    pub fn passed(&self) -> bool {
        self.integrator_max_rel_error <= INTEGRATOR_TOLERANCE
            && self.diff_drive_max_rel_error <= DIFF_DRIVE_TOLERANCE
    }
}

/// Gradient-check instance `index` for one motion model: a random mixture
/// map and two agents starting in the central square.
pub fn instance(seed: u64, index: usize, diff_drive: bool) -> Result<ProblemSpec> {
    let lengths = [1.0, 1.0];
    let s = derive_seed(seed, index as u64);
    let map = generate_gmm_map(&random_gmm_spec(s, lengths), RESOLUTION, RESOLUTION, lengths)?;
    let agent = if diff_drive {
        AgentSpec::diff_drive(0, SensorModel::high_fidelity(1.0), U_MAX, DEFAULT_KAPPA_MAX, 0.0)
    } else {
        AgentSpec::integrator(0, SensorModel::low_fidelity(1.0), U_MAX)
    }
    .with_horizon(0.1, STEPS);
    Ok(ProblemSpec {
        map,
        basis: BasisSpec::new(lengths, MAX_INDEX)?,
        agents: vec![agent; 2],
        regions: StartRegionSet::new([(0, Rect::new(0.3, 0.3, 0.7, 0.7))])?,
        mode: StartMode::PerAgentOptimizedStart,
        fixed_starts: None,
    })
}

pub fn run_gradient_checks(seed: u64) -> Result<GradCheckSummary> {
    let mut summary = GradCheckSummary {
        integrator_max_rel_error: 0.0,
        diff_drive_max_rel_error: 0.0,
        instances: 2 * INSTANCES,
        clamped_instances: 0,
    };
    for (model, diff_drive) in [(0u64, false), (1, true)] {
        let model_seed = derive_seed(seed, model);
        for i in 0..INSTANCES {
            let problem = instance(model_seed, i, diff_drive)?;
            let report = gradient_check(&problem, derive_seed(model_seed, (INSTANCES + i) as u64))?;
            if report.clamp_active {
                summary.clamped_instances += 1;
            }
            let slot = if diff_drive {
                &mut summary.diff_drive_max_rel_error
            } else {
                &mut summary.integrator_max_rel_error
            };
            *slot = slot.max(report.max_rel_error);
        }
    }
    Ok(summary)
}
