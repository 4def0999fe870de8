//! The reference scenario library: the single-link robot arm under accurate,
//! noisy, biased and fading measurements at two learning-rate settings, a
//! process change, two actuator faults, and a zero-plant sanity case.

use std::f64::consts::FRAC_PI_4;

use super::scenario::{CheckThresholds, Scenario};
use crate::approximator::RbfLayout;
use crate::controller::{ControllerParams, RobustMode};
use crate::functions::NamedFn;
use crate::inaccuracy::{ActuatorFaultModel, MeasurementModel};
use crate::numerics::Mat;
use crate::plant::{HSchedule, HSegment, PlantParams};

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_T_END: f64 = 40.0;
pub const DEFAULT_LOG_EVERY: usize = 10;
pub const DEFAULT_SEED: u64 = 20_200_901;

/// Ultimate bound met by the accurate-measurement runs.
pub const ACCURATE_BOUND: f64 = 0.05;
/// Ultimate bound for the noisy runs at the low and high learning rate.
pub const NOISE_BOUND_LOW_RATE: f64 = 0.2;
pub const NOISE_BOUND_HIGH_RATE: f64 = 0.5;
/// Ultimate bound for process changes and actuator faults.
pub const FAULT_BOUND: f64 = 0.2;
/// Band around `-s` that `x` must stay in under a constant measurement bias.
pub const BIAS_TRACKING_BAND: f64 = 0.15;
/// Slack added to [`ACCURATE_BOUND`] for `sup |y|` under a measurement bias.
pub const BIAS_MEASUREMENT_SLACK: f64 = 0.05;

/// Low (`Gamma = 2 I`, `Lambda = 5`) or high (`Gamma = 20 I`, `Lambda = 50`) learning rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearningRate {
    Low,
    High,
}

impl LearningRate {
    fn rates(self) -> (f64, f64) {
        match self {
            LearningRate::Low => (2.0, 5.0),
            LearningRate::High => (20.0, 50.0),
        }
    }
}

pub fn standard_rbf() -> RbfLayout {
    RbfLayout::diagonal(2, 10, -0.5, 0.5, 0.3).expect("static layout is valid")
}

pub fn standard_controller(rate: LearningRate) -> ControllerParams {
    let (gamma, lambda) = rate.rates();
    ControllerParams {
        k: Mat::from_rows(&[vec![1.0, 2.0]]).expect("static"),
        q: Mat::from_rows(&[vec![1.0, 1.0], vec![1.0, 3.0]]).expect("static"),
        eta_bound: NamedFn::Zero,
        rbf: standard_rbf(),
        gamma_diag: vec![gamma; 10],
        lambda_rate: lambda,
        w_theta: 0.5,
        w_lambda: 0.2,
        omega: 0.01,
        robust_mode: RobustMode::Tanh,
        theta0: None,
        lambda0: 0.0,
        theta_cap: 1e6,
    }
}

fn arm(h: HSchedule) -> PlantParams {
    PlantParams::standard_robot_arm(h)
}

fn base(name: &str, description: &str, rate: LearningRate) -> Scenario {
    Scenario {
        name: name.into(),
        description: description.into(),
        plant: arm(HSchedule::constant(NamedFn::FiveSinX1)),
        controller: standard_controller(rate),
        measurement: MeasurementModel::Accurate,
        actuator: ActuatorFaultModel::None,
        x0: vec![FRAC_PI_4, 0.0],
        t_end: DEFAULT_T_END,
        dt: DEFAULT_DT,
        seed: DEFAULT_SEED,
        log_every: DEFAULT_LOG_EVERY,
        checks: CheckThresholds::default(),
    }
}

fn with_bound(mut s: Scenario, bound: f64) -> Scenario {
    s.checks.ultimate_bound = Some(bound);
    s
}

pub fn accurate(rate: LearningRate) -> Scenario {
    let name = if rate == LearningRate::Low { "fig1a" } else { "fig1b" };
    with_bound(base(name, "accurate measurement", rate), ACCURATE_BOUND)
}

pub fn noisy(rate: LearningRate) -> Scenario {
    let (name, bound) = match rate {
        LearningRate::Low => ("fig1c", NOISE_BOUND_LOW_RATE),
        LearningRate::High => ("fig1d", NOISE_BOUND_HIGH_RATE),
    };
    let mut s = base(name, "zero-mean measurement noise, variance 0.01 on both channels", rate);
    s.measurement = MeasurementModel::AdditiveNoise { variance: 0.01 };
    with_bound(s, bound)
}

pub fn biased(rate: LearningRate) -> Scenario {
    let name = if rate == LearningRate::Low { "fig1e" } else { "fig1f" };
    let bias = vec![1.0, 0.0];
    let mut s = base(name, "constant sensor bias of 1 on x1 from t = 20 s", rate);
    s.measurement = MeasurementModel::AdditiveBias { bias, t_on: 20.0 };
    // x tracks -s, so |x| ends near |s|
    s.checks.ultimate_bound = Some(1.0 + ACCURATE_BOUND);
    s.checks.tracking_band = Some(BIAS_TRACKING_BAND);
    s.checks.measurement_bound = Some(ACCURATE_BOUND + BIAS_MEASUREMENT_SLACK);
    s
}

pub fn fading(rate: LearningRate) -> Scenario {
    let name = if rate == LearningRate::Low { "fig1g" } else { "fig1h" };
    let mut s = base(name, "fading measurement y = 0.5 x", rate);
    s.measurement = MeasurementModel::Multiplicative { xi_diag: vec![0.5, 0.5] };
    with_bound(s, ACCURATE_BOUND)
}

pub fn process_change() -> Scenario {
    let mut s = base(
        "fig4",
        "accurate measurement, h switches to 5 sin(x1) + cos(x2) + x1^2 at t = 20 s",
        LearningRate::Low,
    );
    s.plant = arm(HSchedule::new(vec![
        HSegment { t_start: 0.0, h: NamedFn::FiveSinX1 },
        HSegment { t_start: 20.0, h: NamedFn::FiveSinX1PlusCosX2PlusX1Sq },
    ])
    .expect("static schedule"));
    with_bound(s, FAULT_BOUND)
}

pub fn actuator_additive() -> Scenario {
    let mut s = base("fig5a", "additive actuator fault u + 0.5 sin(t)", LearningRate::Low);
    s.actuator = ActuatorFaultModel::Additive { signal: NamedFn::HalfSinT, t_on: 0.0 };
    with_bound(s, FAULT_BOUND)
}

pub fn actuator_multiplicative() -> Scenario {
    let mut s = base("fig5b", "multiplicative actuator fault 0.5 u", LearningRate::Low);
    s.actuator = ActuatorFaultModel::Multiplicative { factor: 0.5, t_on: 0.0 };
    with_bound(s, FAULT_BOUND)
}

/// `f = h = 0`, `x0 = 0`: the closed loop must stay at rest.
pub fn zero_sanity() -> Scenario {
    let mut s = base("zero", "zero plant at the origin", LearningRate::Low);
    s.plant = PlantParams::Canonical {
        n: 2,
        f: NamedFn::Zero,
        g: 1.0,
        eta: NamedFn::Zero,
        h_schedule: HSchedule::constant(NamedFn::Zero),
    };
    s.x0 = vec![0.0, 0.0];
    with_bound(s, ACCURATE_BOUND)
}

pub fn builtin_scenarios() -> Vec<Scenario> {
    use LearningRate::{High, Low};
    vec![
        accurate(Low),
        accurate(High),
        noisy(Low),
        noisy(High),
        biased(Low),
        biased(High),
        fading(Low),
        fading(High),
        process_change(),
        actuator_additive(),
        actuator_multiplicative(),
        zero_sanity(),
    ]
}

pub fn builtin(name: &str) -> Option<Scenario> {
    builtin_scenarios().into_iter().find(|s| s.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_valid_uniquely_named_scenarios() {
        let all = builtin_scenarios();
        assert_eq!(all.len(), 12);
        let mut names: Vec<_> = all.iter().map(|s| s.name.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 12);
        for s in &all {
            s.validate().unwrap_or_else(|e| panic!("{}: {e}", s.name));
        }
    }

    #[test]
    fn fig1e_parameters() {
        let s = builtin("fig1e").unwrap();
        assert_eq!(s.measurement, MeasurementModel::AdditiveBias { bias: vec![1.0, 0.0], t_on: 20.0 });
        let c = &s.controller;
        assert_eq!(c.gamma_diag, vec![2.0; 10]);
        assert_eq!((c.lambda_rate, c.w_theta, c.w_lambda, c.omega), (5.0, 0.5, 0.2, 0.01));
        assert_eq!(s.x0, vec![FRAC_PI_4, 0.0]);
        let hi = builtin("fig1f").unwrap();
        assert_eq!(hi.controller.gamma_diag, vec![20.0; 10]);
        assert_eq!(hi.controller.lambda_rate, 50.0);
    }

    #[test]
    fn fig4_and_fig5_parameters() {
        let s = builtin("fig4").unwrap();
        let segs = s.plant.h_schedule().segments();
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[1].t_start, 20.0);
        assert_eq!(segs[1].h, NamedFn::FiveSinX1PlusCosX2PlusX1Sq);
        assert_eq!(
            builtin("fig5b").unwrap().actuator,
            ActuatorFaultModel::Multiplicative { factor: 0.5, t_on: 0.0 }
        );
        assert_eq!(
            builtin("fig5a").unwrap().actuator,
            ActuatorFaultModel::Additive { signal: NamedFn::HalfSinT, t_on: 0.0 }
        );
    }

    #[test]
    fn scenario_json_round_trip_is_exact() {
        for s in builtin_scenarios() {
            let json = s.to_json();
            let back = Scenario::from_json(&json).unwrap();
            assert_eq!(back, s);
            assert_eq!(back.to_json(), json);
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let json = accurate(LearningRate::Low).to_json().replacen("\"seed\"", "\"sead\"", 1);
        assert!(Scenario::from_json(&json).is_err());
        let json = accurate(LearningRate::Low)
            .to_json()
            .replacen("\"w_theta\"", "\"bogus\": 1, \"w_theta\"", 1);
        assert!(Scenario::from_json(&json).is_err());
    }

    #[test]
    fn off_grid_times_rejected() {
        let mut s = biased(LearningRate::Low);
        s.measurement = MeasurementModel::AdditiveBias { bias: vec![1.0, 0.0], t_on: 20.0005 };
        assert!(s.validate().is_err());
        let mut s = accurate(LearningRate::Low);
        s.t_end = 40.0004;
        assert!(s.validate().is_err());
        s.t_end = 0.0;
        assert!(s.validate().is_err());
    }
}
