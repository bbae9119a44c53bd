//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "maps": { "count": 10, "seed": 1, "resolution": 200 },
//!   "trials_per_map": 5,
//!   "team": [
//!     { "count": 4, "agent": { "type_id": 0, "motion": { "kind": "integrator" },
//!       "sensor": { "sigma": 0.08, "peak_prob": 0.6 },
//!       "u_max": 0.1, "dt": 0.1, "horizon_steps": 100 } }
//!   ],
//!   "strategies": ["SR", "MR", "SO", "MO"],
//!   "optimizer": { "max_iters": 300, "restarts": 8 },
//!   "max_index": 10,
//!   "master_seed": 7
//! }
//! ```
//!
//! Every field except `team` has a default. `maps` may instead list files:
//! `{ "files": [{ "map": "a.ergmap", "regions": "a.ergstart" }] }`.

use std::path::{Path, PathBuf};

use ergoplan::agents::{AgentSpec, SensorModel};
use ergoplan::maps::RegionLayout;
use ergoplan::optimizer::{OptimizerConfig, StartMode};
use ergoplan::Point;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Start-location strategies compared by the benchmark.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    /// One random start shared by the whole team.
    SR,
    /// One random start per agent.
    MR,
    /// One optimized start shared by the whole team.
    SO,
    /// One optimized start per agent.
    MO,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::SR, Strategy::MR, Strategy::SO, Strategy::MO];

    pub fn mode(self) -> StartMode {
        match self {
            Strategy::SR | Strategy::MR => StartMode::FixedStart,
            Strategy::SO => StartMode::SharedOptimizedStart,
            Strategy::MO => StartMode::PerAgentOptimizedStart,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::SR => "SR",
            Strategy::MR => "MR",
            Strategy::SO => "SO",
            Strategy::MO => "MO",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapFiles {
    pub map: PathBuf,
    pub regions: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapSource {
    Synthetic {
        count: usize,
        #[serde(default = "default_map_seed")]
        seed: u64,
        #[serde(default = "default_resolution")]
        resolution: usize,
    },
    Files {
        files: Vec<MapFiles>,
    },
}

fn default_map_seed() -> u64 {
    1
}

fn default_resolution() -> usize {
    crate::dataset::DEFAULT_RESOLUTION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TeamEntry {
    pub count: usize,
    pub agent: AgentSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_maps")]
    pub maps: MapSource,
    #[serde(default = "default_trials")]
    pub trials_per_map: usize,
    pub team: Vec<TeamEntry>,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_max_index")]
    pub max_index: usize,
    #[serde(default = "default_domain")]
    pub domain: [f64; 2],
    #[serde(default)]
    pub region_layout: RegionLayout,
    #[serde(default)]
    pub master_seed: u64,
    /// Worker threads for trials; results are ordered independently of it.
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Write measured wall times instead of zeros. Off by default so that
    /// output files are reproducible byte for byte.
    #[serde(default)]
    pub record_timing: bool,
    /// Render one SVG per map and strategy (first trial).
    #[serde(default = "default_true")]
    pub render_svg: bool,
    /// Start positions for `plan --mode fixed`, one per agent. When absent
    /// they are drawn from the regions with `master_seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_starts: Option<Vec<Point>>,
}

fn default_maps() -> MapSource {
    MapSource::Synthetic {
        count: 10,
        seed: default_map_seed(),
        resolution: default_resolution(),
    }
}

fn default_trials() -> usize {
    5
}

fn default_strategies() -> Vec<Strategy> {
    Strategy::ALL.to_vec()
}

fn default_max_index() -> usize {
    10
}

fn default_domain() -> [f64; 2] {
    [1.0, 1.0]
}

fn default_workers() -> usize {
    1
}

fn default_true() -> bool {
    true
}

/// Speed limit of the default agents, in domain lengths per time unit.
pub const DEFAULT_U_MAX: f64 = 0.1;
/// Maximum path curvature of the default differential drives.
pub const DEFAULT_KAPPA_MAX: f64 = 10.0;

impl ExperimentConfig {
    fn with_team(team: Vec<TeamEntry>, maps: usize) -> Self {
        Self {
            maps: MapSource::Synthetic {
                count: maps,
                seed: default_map_seed(),
                resolution: default_resolution(),
            },
            trials_per_map: default_trials(),
            team,
            strategies: default_strategies(),
            optimizer: OptimizerConfig::default(),
            max_index: default_max_index(),
            domain: default_domain(),
            region_layout: RegionLayout::default(),
            master_seed: 0,
            workers: default_workers(),
            record_timing: false,
            render_svg: true,
            fixed_starts: None,
        }
    }

    /// Four integrator agents of one type, 10 maps by 5 trials.
    pub fn homogeneous() -> Self {
        let agent = AgentSpec::integrator(0, SensorModel::low_fidelity(1.0), DEFAULT_U_MAX);
        Self::with_team(vec![TeamEntry { count: 4, agent }], 10)
    }

    /// Two wide low-fidelity integrators and two narrow high-fidelity
    /// differential drives, 5 maps by 5 trials.
    pub fn heterogeneous() -> Self {
        let wide = AgentSpec::integrator(0, SensorModel::low_fidelity(1.0), DEFAULT_U_MAX);
        let narrow = AgentSpec::diff_drive(
            1,
            SensorModel::high_fidelity(1.0),
            DEFAULT_U_MAX,
            DEFAULT_KAPPA_MAX,
            0.0,
        );
        Self::with_team(
            vec![
                TeamEntry { count: 2, agent: wide },
                TeamEntry { count: 2, agent: narrow },
            ],
            5,
        )
    }

    /// Agents in team order.
    pub fn agents(&self) -> Vec<AgentSpec> {
        self.team
            .iter()
            .flat_map(|e| std::iter::repeat(e.agent.clone()).take(e.count))
            .collect()
    }

    /// Distinct agent types in ascending order.
    pub fn type_ids(&self) -> Vec<u32> {
        let mut t: Vec<u32> = self.team.iter().map(|e| e.agent.type_id).collect();
        t.sort_unstable();
        t.dedup();
        t
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.strategies.is_empty() {
            return Err("at least one strategy is required".into());
        }
        if self.trials_per_map == 0 {
            return Err("trials_per_map must be at least 1".into());
        }
        let agents = self.agents();
        if agents.is_empty() {
            return Err("the team has no agents".into());
        }
        for a in &agents {
            a.validate().map_err(|e| e.to_string())?;
        }
        self.optimizer.validate().map_err(|e| e.to_string())?;
        if let MapSource::Synthetic { count, resolution, .. } = self.maps {
            if count == 0 || resolution < 2 {
                return Err("synthetic maps need count >= 1 and resolution >= 2".into());
            }
        }
        if self.workers == 0 {
            return Err("workers must be at least 1".into());
        }
        Ok(())
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| BenchError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        config.validate().map_err(|message| BenchError::Config {
            path: path.to_path_buf(),
            message,
        })?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_json(&text, path)
    }
}
