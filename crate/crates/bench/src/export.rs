//! CSV output.

use std::fmt::Write as _;
use std::path::Path;

use crate::experiment::{Aggregate, BenchmarkResult, TrialInfo, TrialRecord};
use crate::error::{BenchError, Result};

pub const RECORD_HEADER: &str = "map,trial,strategy,team_phi,iters,wall_ms,feasible";
pub const AGGREGATE_HEADER: &str = "strategy,mean_phi,std_phi,improvement_pct_vs_SR";
pub const TYPE_METRIC_HEADER: &str = "map,trial,strategy,type_id,phi";
pub const TRIAL_HEADER: &str = "map,trial,seed,single_start_fallback";

pub const RECORDS_FILE: &str = "results.csv";
pub const AGGREGATES_FILE: &str = "aggregate.csv";
pub const TYPE_METRICS_FILE: &str = "type_metrics.csv";
pub const TRIALS_FILE: &str = "trials.csv";

pub fn records_csv(records: &[TrialRecord]) -> String {
    let mut s = String::from(RECORD_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.map,
            r.trial,
            r.strategy.name(),
            r.team_phi,
            r.iterations,
            r.wall_ms,
            r.feasible
        );
    }
    s
}

pub fn aggregates_csv(aggregates: &[Aggregate]) -> String {
    let mut s = String::from(AGGREGATE_HEADER);
    s.push('\n');
    for a in aggregates {
        let improvement = a.improvement_pct_vs_sr.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{}", a.strategy.name(), a.mean_phi, a.std_phi, improvement);
    }
    s
}

pub fn type_metrics_csv(records: &[TrialRecord]) -> String {
    let mut s = String::from(TYPE_METRIC_HEADER);
    s.push('\n');
    for r in records {
        for (t, phi) in &r.type_metrics {
            let _ = writeln!(s, "{},{},{},{},{}", r.map, r.trial, r.strategy.name(), t, phi);
        }
    }
    s
}

pub fn trials_csv(trials: &[TrialInfo]) -> String {
    let mut s = String::from(TRIAL_HEADER);
    s.push('\n');
    for t in trials {
        let _ = writeln!(s, "{},{},{},{}", t.map, t.trial, t.seed, t.single_start_fallback);
    }
    s
}

pub(crate) fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| BenchError::io(path, e))
}

/// Writes the four CSV files into `dir`.
pub fn export_csv(result: &BenchmarkResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    write(&dir.join(RECORDS_FILE), &records_csv(&result.records))?;
    write(&dir.join(AGGREGATES_FILE), &aggregates_csv(&result.aggregates))?;
    write(&dir.join(TYPE_METRICS_FILE), &type_metrics_csv(&result.records))?;
    write(&dir.join(TRIALS_FILE), &trials_csv(&result.trials))
}
