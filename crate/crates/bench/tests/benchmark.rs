mod common;

use common::tiny_config;
use ergoplan_bench::config::Strategy;
use ergoplan_bench::dataset::load_cases;
use ergoplan_bench::export::{self, AGGREGATES_FILE, RECORDS_FILE};
use ergoplan_bench::{bench, run_benchmark};

fn parse_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn aggregates_match_recomputation_from_rows() {
    let config = tiny_config(false);
    let cases = load_cases(&config, ".".as_ref()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    bench(&config, &cases, dir.path()).unwrap();
    let rows = parse_rows(&std::fs::read_to_string(dir.path().join(RECORDS_FILE)).unwrap());
    let aggregates = parse_rows(&std::fs::read_to_string(dir.path().join(AGGREGATES_FILE)).unwrap());
    assert_eq!(rows.len(), 2 * 2 * 4);
    assert_eq!(aggregates.len(), 4);

    let values = |s: &str| -> Vec<f64> {
        rows.iter().filter(|r| r[2] == s).map(|r| r[3].parse().unwrap()).collect()
    };
    let sr: Vec<f64> = values("SR");
    let sr_mean = sr.iter().sum::<f64>() / sr.len() as f64;
    for agg in &aggregates {
        let xs = values(&agg[0]);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        let improvement = 100.0 * (sr_mean - mean) / sr_mean;
        let got: Vec<f64> = agg[1..].iter().map(|v| v.parse().unwrap()).collect();
        assert!((got[0] - mean).abs() <= 1e-9);
        assert!((got[1] - var.sqrt()).abs() <= 1e-9);
        assert!((got[2] - improvement).abs() <= 1e-9);
    }
    assert_eq!(aggregates[0][0], "SR");
    assert_eq!(aggregates[0][3], "0");
    assert!(rows.iter().all(|r| r[6] == "true"));
}

#[test]
fn single_row_benchmark_writes_one_row_per_file() {
    let mut config = tiny_config(false);
    config.strategies = vec![Strategy::SR];
    config.trials_per_map = 1;
    config.maps = ergoplan_bench::config::MapSource::Synthetic {
        count: 1,
        seed: 1,
        resolution: 40,
    };
    let cases = load_cases(&config, ".".as_ref()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let result = bench(&config, &cases, dir.path()).unwrap();
    assert_eq!(result.records.len(), 1);
    let rows = std::fs::read_to_string(dir.path().join(RECORDS_FILE)).unwrap();
    let agg = std::fs::read_to_string(dir.path().join(AGGREGATES_FILE)).unwrap();
    assert_eq!(rows.lines().count(), 2);
    assert_eq!(agg.lines().count(), 2);
    assert_eq!(rows.lines().next().unwrap(), export::RECORD_HEADER);
    assert_eq!(agg.lines().next().unwrap(), export::AGGREGATE_HEADER);
    assert_eq!(result.aggregates[0].improvement_pct_vs_sr, Some(0.0));
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let config = tiny_config(true);
    let cases = load_cases(&config, ".".as_ref()).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    bench(&config, &cases, a.path()).unwrap();
    let mut parallel = config.clone();
    parallel.workers = 3;
    bench(&parallel, &cases, b.path()).unwrap();
    for file in [RECORDS_FILE, AGGREGATES_FILE, export::TYPE_METRICS_FILE, export::TRIALS_FILE] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert_eq!(x, y, "{file} differs");
    }
    let figure = "figures/map_000_MO.svg";
    assert_eq!(
        std::fs::read(a.path().join(figure)).unwrap(),
        std::fs::read(b.path().join(figure)).unwrap()
    );
}

#[test]
fn strategies_share_control_draws_within_a_trial() {
    let config = tiny_config(true);
    let cases = load_cases(&config, ".".as_ref()).unwrap();
    let result = run_benchmark(&config, &cases).unwrap();
    for chunk in result.records.chunks(config.strategies.len()) {
        let draws = &chunk[0].control_draws;
        assert_eq!(draws.len(), config.optimizer.restarts);
        assert!(chunk.iter().all(|r| &r.control_draws == draws));
        assert!(chunk.iter().all(|r| r.map == chunk[0].map && r.trial == chunk[0].trial));
    }
    // different trials draw differently
    assert_ne!(result.records[0].control_draws, result.records[4].control_draws);
}

#[test]
fn heterogeneous_records_carry_per_type_metrics() {
    let config = tiny_config(true);
    let cases = load_cases(&config, ".".as_ref()).unwrap();
    let result = run_benchmark(&config, &cases).unwrap();
    assert_eq!(result.violations(), 0);
    for r in &result.records {
        let types: Vec<u32> = r.type_metrics.iter().map(|t| t.0).collect();
        assert_eq!(types, vec![0, 1]);
    }
}
