use aacsim::harness::{self, builtin, builtin_scenarios, simulate, simulate_built, LearningRate, RunLog, SimError};
use aacsim::inaccuracy::MeasurementModel;
use aacsim::numerics::euclid_norm;
use aacsim::verify::{
    check_indirect_tracking, check_ultimate_boundedness, check_vc_descent, lyapunov_check, reference_anchor,
    verify_scenario, ReferenceAnchor, VerifyError, LYAPUNOV_RESIDUAL_TOL,
};

/// `fig1a` with the weight adaptation gain sign-flipped: the decay term turns
/// into growth and the estimate runs away.
fn diverging_dummy() -> Result<RunLog, SimError> {
    let mut scn = harness::accurate(LearningRate::Low);
    scn.name = "diverging".into();
    scn.t_end = 20.0;
    let mut built = scn.build().unwrap();
    for g in &mut built.controller.gamma {
        *g = -*g;
    }
    built.controller.theta_cap = f64::INFINITY;
    simulate_built(&scn, &built)
}

#[test]
fn accurate_run_is_ultimately_bounded() {
    let scn = builtin("fig1a").unwrap();
    let r = check_ultimate_boundedness(&simulate(&scn).unwrap(), 0.05, 10.0).unwrap();
    assert!(r.pass(), "{r:?}");
    assert!(r.ultimate_bound_theta.is_finite() && r.ultimate_bound_lambda.is_finite());
}

#[test]
fn noisy_runs_are_bounded_at_their_thresholds() {
    for (name, bound) in [("fig1c", 0.2), ("fig1d", 0.5)] {
        let r = check_ultimate_boundedness(&simulate(&builtin(name).unwrap()).unwrap(), bound, 10.0).unwrap();
        assert!(r.pass(), "{name}: {r:?}");
    }
}

#[test]
fn diverging_dummy_fails_boundedness() {
    match diverging_dummy() {
        Ok(log) => {
            let r = check_ultimate_boundedness(&log, 0.05, 10.0).unwrap();
            assert!(!r.pass(), "{r:?}");
        }
        Err(SimError::NonFinite { .. }) => {}
        Err(e) => panic!("{e}"),
    }
}

#[test]
fn diverging_dummy_fails_vc_descent() {
    let log = diverging_dummy().expect("dummy should stay finite over its horizon");
    let healthy = harness::accurate(LearningRate::Low).build().unwrap().controller;
    let anchor = ReferenceAnchor {
        theta_ref: vec![0.0; 10],
        lambda_ref: 0.0,
    };
    let r = check_vc_descent(&log, &healthy, &anchor, 1e-3).unwrap();
    assert!(!r.check.pass, "{r:?}");
}

#[test]
fn zero_plant_has_identically_zero_vc() {
    let scn = harness::zero_sanity();
    let cfg = scn.build().unwrap().controller;
    let anchor = reference_anchor(&scn, 2).unwrap();
    assert!(anchor.theta_ref.iter().all(|v| *v == 0.0) && anchor.lambda_ref == 0.0);
    let r = check_vc_descent(&simulate(&scn).unwrap(), &cfg, &anchor, 1e-3).unwrap();
    assert_eq!((r.vc_mid, r.vc_tail_sup), (0.0, 0.0));
    assert!(r.check.pass);
    assert_eq!(r.confined_fraction, 1.0);
}

#[test]
fn accurate_run_descends_to_a_ball() {
    let scn = builtin("fig1a").unwrap();
    let cfg = scn.build().unwrap().controller;
    let anchor = reference_anchor(&scn, scn.checks.reference_refine).unwrap();
    let r = check_vc_descent(&simulate(&scn).unwrap(), &cfg, &anchor, scn.checks.vc_slack).unwrap();
    assert!(r.check.pass, "{r:?}");
}

#[test]
fn zero_bias_tracking_reduces_to_state_norm() {
    let log = simulate(&builtin("fig1a").unwrap()).unwrap();
    let r = check_indirect_tracking(&log, &MeasurementModel::Accurate, 0.05, None).unwrap();
    assert!(r.pass());
    let sup_x = log.tail().map(|r| r.x_norm).fold(0.0, f64::max);
    assert_eq!(r.state_error, sup_x);
}

#[test]
fn tracking_needs_a_bias_scenario() {
    let scn = builtin("fig1c").unwrap();
    let log = simulate(&scn).unwrap();
    assert!(matches!(
        check_indirect_tracking(&log, &scn.measurement, 0.15, None),
        Err(VerifyError::WrongScenarioKind(_))
    ));
}

#[test]
fn bias_moves_state_towards_minus_bias() {
    // the state settles on the far side of the origin, within the stated band
    // only at the high learning rate
    let scn = builtin("fig1f").unwrap();
    let r = check_indirect_tracking(&simulate(&scn).unwrap(), &scn.measurement, 0.15, Some(0.1)).unwrap();
    assert!(r.pass(), "{r:?}");
}

#[test]
fn designed_gains_solve_the_lyapunov_equation() {
    for scn in builtin_scenarios() {
        let built = scn.build().unwrap();
        let c = lyapunov_check(&built.controller, built.plant.a()).unwrap();
        assert!(c.pass && c.value <= LYAPUNOV_RESIDUAL_TOL, "{}: {c:?}", scn.name);
    }
}

#[test]
fn bias_measurement_settles_like_accurate_state() {
    let mut failures = Vec::new();
    for rate in [LearningRate::Low, LearningRate::High] {
        let scn = harness::biased(rate);
        let log = simulate(&scn).unwrap();
        let sup_y = log.tail().map(|r| euclid_norm(&r.y)).fold(0.0, f64::max);
        let bound = harness::ACCURATE_BOUND + harness::BIAS_MEASUREMENT_SLACK;
        if sup_y > bound {
            failures.push(format!("{}: sup |y| = {sup_y:.4} > {bound}", scn.name));
        }
    }
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn report_serializes() {
    let report = verify_scenario(&builtin("zero").unwrap()).unwrap();
    assert!(report.pass(), "{}", report.table());
    let json = serde_json::to_string(&report).unwrap();
    assert!(json.contains("\"lyapunov_residual\""));
    assert!(report.table().lines().count() >= 4);
}

#[test]
fn verification_of_fig1e_runs_every_check() {
    let report = verify_scenario(&builtin("fig1e").unwrap()).unwrap();
    let names: Vec<&str> = report.checks().iter().map(|c| c.name.as_str()).collect();
    for n in ["lyapunov_residual", "ultimate_bound_x", "peak_x", "tracking_band", "measurement_bound", "vc_descent"] {
        assert!(names.contains(&n), "{names:?}");
    }
    assert!(report.bound.as_ref().unwrap().pass());
    assert!(report.vc.as_ref().unwrap().check.pass);
}
