mod common;

use common::check_xml;
use ergoplan::agents::{AgentSpec, SensorModel};
use ergoplan::maps::{generate_gmm_map, random_gmm_spec, Rect, StartRegionSet};
use ergoplan::optimizer::{plan, OptimizerConfig, ProblemSpec, StartMode};
use ergoplan::spectral::BasisSpec;
use ergoplan_bench::svg::render_svg;

fn problem() -> ProblemSpec {
    let lengths = [1.0, 1.0];
    ProblemSpec {
        map: generate_gmm_map(&random_gmm_spec(3, lengths), 250, 250, lengths).unwrap(),
        basis: BasisSpec::unit(5),
        agents: vec![
            AgentSpec::integrator(0, SensorModel::low_fidelity(1.0), 0.1).with_horizon(0.1, 20),
            AgentSpec::diff_drive(1, SensorModel::high_fidelity(1.0), 0.1, 10.0, 0.0).with_horizon(0.1, 20),
        ],
        regions: StartRegionSet::new([
            (0, Rect::new(0.1, 0.1, 0.3, 0.3)),
            (1, Rect::new(0.2, 0.2, 0.4, 0.5)),
        ])
        .unwrap(),
        mode: StartMode::PerAgentOptimizedStart,
        fixed_starts: None,
    }
}

#[test]
fn rendered_plan_is_well_formed_and_deterministic() {
    let p = problem();
    let config = OptimizerConfig {
        max_iters: 10,
        restarts: 1,
        ..OptimizerConfig::default()
    };
    let sol = plan(&p, &config).unwrap();
    let types = [0, 1];
    let a = render_svg(&p.map, &p.regions, Some((&sol, &types)));
    let b = render_svg(&p.map, &p.regions, Some((&sol, &types)));
    assert_eq!(a, b);
    check_xml(&a).unwrap();
    assert_eq!(a.matches("<polyline").count(), 2);
    assert_eq!(a.matches("<circle").count(), 2);
    assert_eq!(a.matches("stroke-dasharray").count(), 1);
    // 250 cells per side are averaged in blocks of 3
    assert_eq!(a.matches("<rect").count(), 84 * 84 + 2);
}

#[test]
fn map_without_solution_has_no_trajectories() {
    let p = problem();
    let svg = render_svg(&p.map, &p.regions, None);
    check_xml(&svg).unwrap();
    assert!(!svg.contains("<polyline"));
    assert!(!svg.contains("<circle"));
    assert!(svg.contains(r#"id="regions""#));
}

#[test]
fn checker_rejects_broken_documents() {
    assert!(check_xml("<svg><g></svg>").is_err());
    assert!(check_xml("<svg a=1/>").is_err());
    assert!(check_xml("<a/><b/>").is_err());
    assert!(check_xml(r#"<svg x="1"><g/></svg>"#).is_ok());
}
