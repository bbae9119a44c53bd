use ergoplan::agents::{controls_feasible, AgentSpec, ControlSequence, SensorModel, StartState};
use ergoplan::maps::{generate_gmm_map, random_gmm_spec, random_start_regions, GmmComponent, GmmSpec, GridMap, Rect, RegionLayout, StartRegionSet};
use ergoplan::optimizer::{evaluate, plan, OptimizerConfig, ProblemSpec, StartMode, Termination};
use ergoplan::spectral::{ergodic_metric, map_coefficients, trajectory_coefficients, BasisSpec};
use ergoplan::{seeded_rng, Error};

const UNIT: [f64; 2] = [1.0, 1.0];

fn small_config(seed: u64) -> OptimizerConfig {
    OptimizerConfig {
        max_iters: 60,
        restarts: 3,
        seed,
        ..OptimizerConfig::default()
    }
}

/// Random problem: mixture map, random regions, one or two agent types.
fn random_problem(seed: u64, mode: StartMode) -> ProblemSpec {
    let mut rng = seeded_rng(seed);
    let map = generate_gmm_map(&random_gmm_spec(seed, UNIT), 50, 50, UNIT).unwrap();
    let heterogeneous = seed % 2 == 1;
    let mut agents = vec![AgentSpec::integrator(0, SensorModel::low_fidelity(1.0), 0.15).with_horizon(0.1, 30); 2];
    if heterogeneous {
        agents.push(
            AgentSpec::diff_drive(1, SensorModel::high_fidelity(1.0), 0.15, 8.0, 0.0).with_horizon(0.1, 30),
        );
    }
    let types: Vec<u32> = if heterogeneous { vec![0, 1] } else { vec![0] };
    let regions = random_start_regions(&mut rng, UNIT, &types, &RegionLayout::default()).unwrap();
    let fixed_starts = (mode == StartMode::FixedStart).then(|| {
        agents
            .iter()
            .map(|a| regions.sample_start(a.type_id, &mut rng).unwrap())
            .collect()
    });
    ProblemSpec {
        map,
        basis: BasisSpec::unit(6),
        agents,
        regions,
        mode,
        fixed_starts,
    }
}

const MODES: [StartMode; 3] = [
    StartMode::FixedStart,
    StartMode::SharedOptimizedStart,
    StartMode::PerAgentOptimizedStart,
];

#[test]
fn accepted_iterations_never_increase_the_objective() {
    for seed in 0..20 {
        let problem = random_problem(seed, MODES[seed as usize % 3]);
        let sol = plan(&problem, &small_config(seed)).unwrap();
        assert_eq!(sol.objective_trace.len(), sol.iterations + 1);
        for w in sol.objective_trace.windows(2) {
            assert!(w[1] <= w[0], "seed {seed}: {} then {}", w[0], w[1]);
        }
    }
}

#[test]
fn solutions_are_feasible() {
    for seed in 0..9 {
        let mode = MODES[seed as usize % 3];
        let problem = random_problem(seed, mode);
        let sol = plan(&problem, &small_config(seed)).unwrap();
        for (i, a) in problem.agents.iter().enumerate() {
            let p = sol.starts[i].position;
            assert_eq!(problem.regions.project(a.type_id, p).unwrap(), p);
            assert!(controls_feasible(a, &sol.controls[i]));
        }
        match mode {
            StartMode::SharedOptimizedStart => {
                assert!(sol.starts.iter().all(|s| s.position == sol.starts[0].position))
            }
            StartMode::FixedStart => {
                let given = problem.fixed_starts.as_ref().unwrap();
                assert!(given.iter().zip(&sol.starts).all(|(g, s)| *g == s.position));
            }
            StartMode::PerAgentOptimizedStart => {}
        }
    }
}

#[test]
fn planning_is_deterministic() {
    let problem = random_problem(5, StartMode::PerAgentOptimizedStart);
    let a = plan(&problem, &small_config(11)).unwrap();
    let b = plan(&problem, &small_config(11)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn best_restart_dominates_the_first() {
    for seed in 0..6 {
        let problem = random_problem(seed, MODES[seed as usize % 3]);
        let sol = plan(&problem, &small_config(seed)).unwrap();
        assert!(sol.team_metric <= sol.restarts[0].team_metric);
        let min = sol.restarts.iter().map(|r| r.team_metric).fold(f64::INFINITY, f64::min);
        assert_eq!(sol.team_metric, min);
        assert_eq!(sol.restarts[sol.restart].team_metric, sol.team_metric);
    }
}

#[test]
fn re_evaluating_a_plan_reproduces_its_metrics() {
    for seed in [2, 3] {
        let problem = random_problem(seed, StartMode::PerAgentOptimizedStart);
        let sol = plan(&problem, &small_config(seed)).unwrap();
        let (team, per_type) = evaluate(&problem, &sol.starts, &sol.controls).unwrap();
        assert_eq!(team.to_bits(), sol.team_metric.to_bits());
        assert_eq!(per_type, sol.type_metrics);
    }
}

#[test]
fn team_metric_ignores_agent_order() {
    let problem = random_problem(4, StartMode::PerAgentOptimizedStart);
    let sol = plan(&problem, &small_config(4)).unwrap();
    let (team, _) = evaluate(&problem, &sol.starts, &sol.controls).unwrap();
    let mut swapped = problem.clone();
    swapped.agents.reverse();
    let starts: Vec<StartState> = sol.starts.iter().rev().copied().collect();
    let controls: Vec<ControlSequence> = sol.controls.iter().rev().cloned().collect();
    let (team_swapped, _) = evaluate(&swapped, &starts, &controls).unwrap();
    assert!((team - team_swapped).abs() <= 1e-12 * team);
}

#[test]
fn zero_controls_score_the_stationary_starts() {
    let problem = random_problem(6, StartMode::PerAgentOptimizedStart);
    let mut rng = seeded_rng(1);
    let starts: Vec<StartState> = problem
        .agents
        .iter()
        .map(|a| StartState::at(problem.regions.sample_start(a.type_id, &mut rng).unwrap()))
        .collect();
    let controls: Vec<ControlSequence> = problem.agents.iter().map(ControlSequence::zeros).collect();
    let (team, _) = evaluate(&problem, &starts, &controls).unwrap();
    let samples: Vec<Vec<[f64; 2]>> = starts.iter().map(|s| vec![s.position; 31]).collect();
    let xi = map_coefficients(&problem.map, &problem.basis).unwrap();
    let c = trajectory_coefficients(&samples, &problem.basis).unwrap();
    let direct = ergodic_metric(&c, &xi, &problem.basis).unwrap();
    assert!((team - direct).abs() <= 1e-12);
}

#[test]
fn zero_iterations_pass_the_initial_plan_through() {
    let agent = AgentSpec::integrator(0, SensorModel::low_fidelity(1.0), 0.1).with_horizon(0.1, 10);
    let problem = ProblemSpec {
        map: GridMap::uniform(20, 20, UNIT),
        basis: BasisSpec::unit(2),
        agents: vec![agent],
        regions: StartRegionSet::new([(0, Rect::new(0.4, 0.4, 0.6, 0.6))]).unwrap(),
        mode: StartMode::FixedStart,
        fixed_starts: Some(vec![[0.5, 0.5]]),
    };
    let config = OptimizerConfig {
        max_iters: 0,
        restarts: 1,
        init_control_scale: 0.0,
        ..OptimizerConfig::default()
    };
    let sol = plan(&problem, &config).unwrap();
    let expected = 2.0 * 2.0 * 5f64.powf(-1.5) + 4.0 * 9f64.powf(-1.5);
    assert!((sol.team_metric - expected).abs() <= 1e-12);
    assert_eq!(sol.iterations, 0);
    assert_eq!(sol.termination, Termination::MaxIterations);
}

#[test]
fn optimized_start_reaches_a_distant_target_better() {
    let target = GmmSpec {
        components: vec![GmmComponent {
            weight: 1.0,
            mean: [0.8, 0.8],
            covariance: [[0.003, 0.0], [0.0, 0.003]],
        }],
        seed: 0,
    };
    let map = generate_gmm_map(&target, 60, 60, UNIT).unwrap();
    let region = Rect::new(0.1, 0.1, 0.2, 0.2);
    let agent = AgentSpec::integrator(0, SensorModel::low_fidelity(1.0), 0.1).with_horizon(0.1, 40);
    let base = ProblemSpec {
        map,
        basis: BasisSpec::unit(8),
        agents: vec![agent],
        regions: StartRegionSet::new([(0, region)]).unwrap(),
        mode: StartMode::FixedStart,
        fixed_starts: Some(vec![region.min]),
    };
    let config = small_config(3);
    let fixed = plan(&base, &config).unwrap();
    let optimized = plan(
        &ProblemSpec {
            mode: StartMode::PerAgentOptimizedStart,
            fixed_starts: None,
            ..base.clone()
        },
        &config,
    )
    .unwrap();
    assert!(optimized.team_metric <= fixed.team_metric);
    // the optimized start moves towards the target corner of the region
    let p = optimized.starts[0].position;
    assert!(p[0] > 0.15 && p[1] > 0.15, "start {p:?}");
}

#[test]
fn disjoint_shared_regions_are_infeasible() {
    let map = GridMap::uniform(10, 10, UNIT);
    let problem = ProblemSpec {
        map,
        basis: BasisSpec::unit(3),
        agents: vec![
            AgentSpec::integrator(0, SensorModel::low_fidelity(1.0), 0.1).with_horizon(0.1, 5),
            AgentSpec::integrator(1, SensorModel::high_fidelity(1.0), 0.1).with_horizon(0.1, 5),
        ],
        regions: StartRegionSet::new([(0, Rect::new(0.0, 0.0, 0.2, 0.2)), (1, Rect::new(0.7, 0.7, 0.9, 0.9))]).unwrap(),
        mode: StartMode::SharedOptimizedStart,
        fixed_starts: None,
    };
    match plan(&problem, &small_config(0)) {
        Err(Error::Infeasible { types }) => assert_eq!(types, vec![0, 1]),
        other => panic!("expected infeasibility, got {other:?}"),
    }
}

#[test]
fn converged_plan_has_a_vanishing_step() {
    let map = generate_gmm_map(&random_gmm_spec(12, UNIT), 40, 40, UNIT).unwrap();
    let agent = AgentSpec::integrator(0, SensorModel::low_fidelity(1.0), 0.3).with_horizon(0.1, 10);
    let problem = ProblemSpec {
        map,
        basis: BasisSpec::unit(2),
        agents: vec![agent],
        regions: StartRegionSet::new([(0, Rect::new(0.45, 0.45, 0.55, 0.55))]).unwrap(),
        mode: StartMode::FixedStart,
        fixed_starts: Some(vec![[0.5, 0.5]]),
    };
    let config = OptimizerConfig {
        max_iters: 3000,
        restarts: 1,
        tol: 0.0,
        ..OptimizerConfig::default()
    };
    let sol = plan(&problem, &config).unwrap();
    assert!(!sol.clamp_flags[0]);
    let first = sol.step_norms[0];
    let last = *sol.step_norms.last().unwrap();
    assert!(last <= 1e-4 * first, "step norm {last:e} vs initial {first:e} ({:?})", sol.termination);
}

#[test]
fn invalid_problems_are_rejected() {
    let mut problem = random_problem(0, StartMode::FixedStart);
    problem.fixed_starts = Some(vec![[0.5, 0.5]]);
    assert!(plan(&problem, &small_config(0)).is_err());
    problem.fixed_starts = None;
    assert!(plan(&problem, &small_config(0)).is_err());

    let bad = OptimizerConfig {
        backtrack: 1.5,
        ..OptimizerConfig::default()
    };
    let ok = random_problem(0, StartMode::PerAgentOptimizedStart);
    assert!(matches!(plan(&ok, &bad), Err(Error::Config(_))));
}
