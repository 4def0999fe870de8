use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{AdaptiveState, ControllerConfig, ControllerError, ControllerParams};
use crate::inaccuracy::{ActuatorFaultModel, InaccuracyError, MeasurementModel};
use crate::numerics::Mat;
use crate::plant::{PlantError, PlantParams, PlantSpec};

/// Relative slack when checking that times are integer multiples of `dt`.
const GRID_RTOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario {name}: {msg}")]
    Invalid { name: String, msg: String },
    #[error(transparent)]
    Plant(#[from] PlantError),
    #[error(transparent)]
    Controller(#[from] ControllerError),
    #[error(transparent)]
    Inaccuracy(#[from] InaccuracyError),
    #[error("scenario file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("scenario file: {0}")]
    Io(#[from] std::io::Error),
}

/// Pass/fail thresholds used by the verification checks. They live in the
/// scenario so that every number a check compares against is versioned with
/// the scenario it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckThresholds {
    /// Bound on `sup |x|` over the last quarter of the horizon.
    #[serde(default)]
    pub ultimate_bound: Option<f64>,
    /// Bound on `sup |x + s|` over the last quarter (additive bias only).
    #[serde(default)]
    pub tracking_band: Option<f64>,
    /// Bound on `sup |y|` over the last quarter.
    #[serde(default)]
    pub measurement_bound: Option<f64>,
    #[serde(default = "default_vc_slack")]
    pub vc_slack: f64,
    /// Whole-run peak of `|x|` may not exceed this multiple of the first-quarter peak.
    #[serde(default = "default_peak_factor")]
    pub peak_factor: f64,
    /// `dt` divisor of the reference run that anchors the augmented Lyapunov check.
    #[serde(default = "default_refine")]
    pub reference_refine: u32,
}

fn default_vc_slack() -> f64 {
    1e-3
}

fn default_peak_factor() -> f64 {
    10.0
}

fn default_refine() -> u32 {
    10
}

impl Default for CheckThresholds {
    fn default() -> Self {
        CheckThresholds {
            ultimate_bound: None,
            tracking_band: None,
            measurement_bound: None,
            vc_slack: default_vc_slack(),
            peak_factor: default_peak_factor(),
            reference_refine: default_refine(),
        }
    }
}

/// Everything needed to reproduce one closed-loop run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub plant: PlantParams,
    pub controller: ControllerParams,
    pub measurement: MeasurementModel,
    pub actuator: ActuatorFaultModel,
    pub x0: Vec<f64>,
    pub t_end: f64,
    pub dt: f64,
    pub seed: u64,
    pub log_every: usize,
    #[serde(default)]
    pub checks: CheckThresholds,
}

/// Plant and controller instantiated from a scenario.
#[derive(Debug, Clone)]
pub struct Built {
    pub plant: PlantSpec,
    pub controller: ControllerConfig,
    pub adapt0: AdaptiveState,
}

fn on_grid(value: f64, dt: f64) -> Option<u64> {
    let k = (value / dt).round();
    if k >= 0.0 && (k * dt - value).abs() <= GRID_RTOL * value.abs().max(dt) {
        Some(k as u64)
    } else {
        None
    }
}

impl Scenario {
    fn invalid(&self, msg: impl Into<String>) -> ScenarioError {
        ScenarioError::Invalid {
            name: self.name.clone(),
            msg: msg.into(),
        }
    }

    /// Number of integration steps; requires `t_end` to be a positive multiple of `dt`.
    pub fn steps(&self) -> Result<u64, ScenarioError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(self.invalid(format!("dt = {} must be positive", self.dt)));
        }
        match on_grid(self.t_end, self.dt) {
            Some(k) if k > 0 => Ok(k),
            _ => Err(self.invalid(format!(
                "t_end = {} is not a positive multiple of dt = {}",
                self.t_end, self.dt
            ))),
        }
    }

    /// Time of step `k`. When `1/dt` is an integer the time is formed by
    /// division so that e.g. step 20000 at `dt = 1e-3` is exactly `20`.
    pub fn step_time(&self, k: u64) -> f64 {
        let rate = (1.0 / self.dt).round();
        if rate >= 1.0 && (rate * self.dt - 1.0).abs() <= 1e-12 {
            k as f64 / rate
        } else {
            k as f64 * self.dt
        }
    }

    pub fn event_times(&self) -> Vec<f64> {
        let mut times = self.measurement.event_times();
        times.extend(self.actuator.event_times());
        times.extend(self.plant.h_schedule().segments().iter().map(|s| s.t_start));
        times
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.steps()?;
        if self.log_every == 0 {
            return Err(self.invalid("log_every must be positive"));
        }
        for t in self.event_times() {
            if on_grid(t, self.dt).is_none() {
                return Err(self.invalid(format!("event time {t} is not a multiple of dt = {}", self.dt)));
            }
        }
        let built = self.build()?;
        let n = built.plant.state_dim();
        if self.x0.len() != n || self.x0.iter().any(|v| !v.is_finite()) {
            return Err(self.invalid(format!("x0 must be a finite {n}-vector")));
        }
        self.measurement.validate(n)?;
        self.actuator.validate()?;
        Ok(())
    }

    pub fn build(&self) -> Result<Built, ScenarioError> {
        let plant = self.plant.build()?;
        let controller = ControllerConfig::design(&self.controller, plant.a(), plant.b(), Mat::diag(&[plant.g()]))?;
        let weight_len = controller.rbf.weight_len();
        let theta = match &self.controller.theta0 {
            Some(t) if t.len() != weight_len => {
                return Err(self.invalid(format!("theta0 has {} entries, expected {weight_len}", t.len())))
            }
            Some(t) => t.clone(),
            None => vec![0.0; weight_len],
        };
        let adapt0 = AdaptiveState {
            theta,
            lambda: self.controller.lambda0,
        };
        if !adapt0.is_finite() {
            return Err(self.invalid("initial adaptation state is not finite"));
        }
        Ok(Built {
            plant,
            controller,
            adapt0,
        })
    }

    pub fn from_json(s: &str) -> Result<Self, ScenarioError> {
        let scn: Scenario = serde_json::from_str(s)?;
        scn.validate()?;
        Ok(scn)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization cannot fail")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        Scenario::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ScenarioError> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    /// Copy with `dt` divided by `factor` (the reference-run refinement).
    pub fn refined(&self, factor: u32) -> Scenario {
        let mut s = self.clone();
        s.dt = self.dt / factor as f64;
        s.log_every = self.log_every * factor as usize;
        s
    }
}
