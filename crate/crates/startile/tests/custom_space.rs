//! End-to-end tiling of a custom polytope-norm space. Custom norms take
//! the greedy-net path and the descent solver everywhere the lp family
//! uses closed forms, so this exercises those code paths together.

use startile::verifier::{
    run_suite, ModeSpec, NetParams, SamplingParams, TemplateSpec, TilingConfig, ToleranceLadder,
};
use startile::{SpaceDescriptor, TemplateVariant};

fn hexagonal_space() -> SpaceDescriptor {
    let s = 3.0f64.sqrt() / 2.0;
    SpaceDescriptor::polytope(2, vec![vec![1.0, 0.0], vec![0.5, s], vec![0.5, -s]])
}

#[test]
fn hexagonal_plane_suite_passes() {
    let cfg = TilingConfig {
        version: 1,
        space: hexagonal_space(),
        template: TemplateSpec { variant: TemplateVariant::A, a: 1.3, b: 0.9, r: None, delta: None },
        net: NetParams { epsilon: 0.25, seed: 12 },
        mode: ModeSpec::Starlike,
        sampling: SamplingParams {
            count: 400,
            box_radius: 5.0,
            seed: 3,
            tolerance: ToleranceLadder::default(),
        },
    };
    let out = run_suite(&cfg).expect("suite runs on a polytope space");
    let r = &out.report;
    assert!(r.passed, "{}", r.to_json_pretty());
    let solver = r.check("space.solver_convergence").expect("solver check present");
    assert!(solver.samples > 0 && solver.failures == 0);
    assert!(r.max_normality_ratio <= r.constants.k_bound_nominal + 1e-6);
}

#[test]
fn hexagonal_projection_mode_reports_estimates() {
    let cfg = TilingConfig {
        version: 1,
        space: hexagonal_space(),
        template: TemplateSpec { variant: TemplateVariant::A, a: 1.3, b: 0.9, r: None, delta: None },
        net: NetParams { epsilon: 0.25, seed: 12 },
        mode: ModeSpec::Projection { n: 1 },
        sampling: SamplingParams {
            count: 300,
            box_radius: 4.0,
            seed: 5,
            tolerance: ToleranceLadder::default(),
        },
    };
    let out = run_suite(&cfg).expect("projection suite runs");
    let r = &out.report;
    assert!(r.passed, "{}", r.to_json_pretty());
    let pnorm = r.check("projection.p_norm").unwrap();
    assert!(
        pnorm.notes.iter().any(|n| n.contains("lower bound")),
        "estimate status missing: {pnorm:?}"
    );
}
