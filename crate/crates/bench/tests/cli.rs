use std::path::Path;
use std::process::Command;

fn ergoplan(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ergoplan")).args(args).output().unwrap()
}

const TEAM: &str = r#"{
  "team": [ { "count": 2, "agent": { "type_id": 0, "motion": { "kind": "integrator" },
    "sensor": { "sigma": 0.08, "peak_prob": 0.6 }, "u_max": 0.1, "dt": 0.1, "horizon_steps": 20 } } ],
  "optimizer": { "max_iters": 10, "restarts": 1 },
  "max_index": 5
}"#;

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn generated_maps_can_be_planned_in_every_mode() {
    let dir = tempfile::tempdir().unwrap();
    let maps = dir.path().join("maps");
    let out = ergoplan(&["gen-maps", "--count", "2", "--seed", "4", "--out", maps.to_str().unwrap(), "--resolution", "40"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["map_000.ergmap", "map_000.ergstart", "map_001.ergmap", "map_001.ergstart"] {
        assert!(maps.join(name).exists(), "{name} missing");
    }
    let text = std::fs::read_to_string(maps.join("map_001.ergmap")).unwrap();
    assert!(text.starts_with("ERGMAP 1\n40 40 "));

    let config = dir.path().join("team.json");
    write(&config, TEAM);
    for mode in ["fixed", "shared", "per-agent"] {
        let plan_dir = dir.path().join(mode);
        let out = ergoplan(&[
            "plan",
            "--map",
            maps.join("map_000.ergmap").to_str().unwrap(),
            "--regions",
            maps.join("map_000.ergstart").to_str().unwrap(),
            "--config",
            config.to_str().unwrap(),
            "--mode",
            mode,
            "--out",
            plan_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{mode}: {}", String::from_utf8_lossy(&out.stderr));
        let traj = std::fs::read_to_string(plan_dir.join("trajectories.ergtraj")).unwrap();
        let records = ergoplan::agents::parse_trajectories(&traj).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].states.len(), 21);
        assert!(plan_dir.join("plan.svg").exists());
        let summary = std::fs::read_to_string(plan_dir.join("summary.json")).unwrap();
        assert!(summary.contains("\"feasible\": true"));
    }
}

#[test]
fn bench_reads_map_files_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = ergoplan(&["gen-maps", "--count", "1", "--seed", "2", "--out", dir.path().join("m").to_str().unwrap(), "--resolution", "30"]);
    assert!(out.status.success());
    let config = TEAM.replacen(
        "{",
        r#"{ "maps": { "files": [ { "map": "m/map_000.ergmap", "regions": "m/map_000.ergstart" } ] },
            "trials_per_map": 1, "strategies": ["SR", "MO"], "render_svg": false,"#,
        1,
    );
    let path = dir.path().join("bench.json");
    write(&path, &config);
    let results = dir.path().join("results");
    let out = ergoplan(&["bench", "--config", path.to_str().unwrap(), "--out", results.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = std::fs::read_to_string(results.join("results.csv")).unwrap();
    assert_eq!(rows.lines().count(), 3);
    assert!(rows.lines().nth(1).unwrap().starts_with("map_000,0,SR,"));
    assert!(!results.join("figures").exists());
}

#[test]
fn configuration_problems_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    write(&bad, "{ \"team\": [] }");
    let out = ergoplan(&["bench", "--config", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json"));

    let missing = ergoplan(&["bench", "--config", "/nonexistent/config.json", "--out", "x"]);
    assert_eq!(missing.status.code(), Some(1));

    let usage = ergoplan(&["plan", "--mode", "sideways"]);
    assert_eq!(usage.status.code(), Some(1));

    let broken_map = dir.path().join("broken.ergmap");
    write(&broken_map, "ERGMAP 1\n2 2 1 1\n0.5\n");
    let regions = dir.path().join("r.ergstart");
    write(&regions, "ERGSTART 1\n0 0.1 0.1 0.2 0.2\n");
    let team = dir.path().join("team.json");
    write(&team, TEAM);
    let out = ergoplan(&[
        "plan",
        "--map",
        broken_map.to_str().unwrap(),
        "--regions",
        regions.to_str().unwrap(),
        "--config",
        team.to_str().unwrap(),
        "--mode",
        "fixed",
        "--out",
        dir.path().join("p").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.ergmap"));
}

#[test]
fn gradient_check_command_succeeds() {
    let out = ergoplan(&["check-grad", "--seed", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("integrator max rel error"));
    assert!(text.contains("diff-drive max rel error"));
}

#[test]
fn unnormalized_map_files_are_rescaled() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("raw.ergmap");
    // y-major: the bright cells are the top row
    write(&map, "ERGMAP 1\n4 2 1 1\n1 1 1 1\n9 9 9 9\n");
    let regions = dir.path().join("raw.ergstart");
    write(&regions, "ERGSTART 1\n0 0.1 0.1 0.3 0.3\n");
    let case = ergoplan_bench::dataset::load_case(&map, &regions).unwrap();
    assert!((case.map.integral() - 1.0).abs() < 1e-12);
    assert!(case.map.get(0, 1) > case.map.get(0, 0));

    let team = dir.path().join("team.json");
    write(&team, TEAM);
    let out = ergoplan(&[
        "plan",
        "--map",
        map.to_str().unwrap(),
        "--regions",
        regions.to_str().unwrap(),
        "--config",
        team.to_str().unwrap(),
        "--mode",
        "per-agent",
        "--out",
        dir.path().join("p").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
