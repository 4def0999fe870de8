//! Measurement inaccuracy and actuator fault models.
//!
//! All models are pure functions of their inputs. Measurement noise is drawn
//! from a counter-based stream (splitmix64 feeding Box–Muller) indexed by the
//! control step, so the sample for a given `(seed, step, channel)` never
//! depends on evaluation order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event_reached;
use crate::functions::NamedFn;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InaccuracyError {
    #[error("invalid measurement model: {0}")]
    InvalidMeasurement(String),
    #[error("invalid actuator fault model: {0}")]
    InvalidActuator(String),
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Generator positioned at output number `index` of the stream for `seed`.
    pub fn at(seed: u64, index: u64) -> Self {
        SplitMix64 {
            state: seed.wrapping_add(index.wrapping_mul(GOLDEN_GAMMA)),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `(0, 1]`.
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Standard normal sample number `counter` of the stream for `seed`: outputs
/// `2 counter` and `2 counter + 1` of splitmix64 through Box–Muller.
pub fn gaussian_sample(seed: u64, counter: u64) -> f64 {
    let mut g = SplitMix64::at(seed, counter.wrapping_mul(2));
    let u1 = g.next_open01();
    let u2 = g.next_open01();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields, from = "StrictMeasurement")]
pub enum MeasurementModel {
    Accurate,
    /// `y = x + w`, `w ~ N(0, variance I)` redrawn every control step.
    AdditiveNoise { variance: f64 },
    /// `y = x + bias` once `t >= t_on`.
    AdditiveBias { bias: Vec<f64>, t_on: f64 },
    /// `y = diag(xi_diag) x`.
    Multiplicative { xi_diag: Vec<f64> },
}

// serde ignores `deny_unknown_fields` on unit variants of internally tagged
// enums, so both models are read through mirrors whose unit variants are
// empty structs.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum StrictMeasurement {
    Accurate {},
    AdditiveNoise { variance: f64 },
    AdditiveBias { bias: Vec<f64>, t_on: f64 },
    Multiplicative { xi_diag: Vec<f64> },
}

impl From<StrictMeasurement> for MeasurementModel {
    fn from(m: StrictMeasurement) -> Self {
        match m {
            StrictMeasurement::Accurate {} => MeasurementModel::Accurate,
            StrictMeasurement::AdditiveNoise { variance } => MeasurementModel::AdditiveNoise { variance },
            StrictMeasurement::AdditiveBias { bias, t_on } => MeasurementModel::AdditiveBias { bias, t_on },
            StrictMeasurement::Multiplicative { xi_diag } => MeasurementModel::Multiplicative { xi_diag },
        }
    }
}

impl MeasurementModel {
    pub fn validate(&self, n: usize) -> Result<(), InaccuracyError> {
        let bad = |s: String| Err(InaccuracyError::InvalidMeasurement(s));
        match self {
            MeasurementModel::Accurate => Ok(()),
            MeasurementModel::AdditiveNoise { variance } => {
                if !(*variance >= 0.0) || !variance.is_finite() {
                    return bad(format!("variance {variance} must be nonnegative"));
                }
                Ok(())
            }
            MeasurementModel::AdditiveBias { bias, t_on } => {
                if bias.len() != n || bias.iter().any(|b| !b.is_finite()) {
                    return bad(format!("bias must be a finite {n}-vector"));
                }
                if !(*t_on >= 0.0) || !t_on.is_finite() {
                    return bad(format!("t_on {t_on} must be nonnegative"));
                }
                Ok(())
            }
            MeasurementModel::Multiplicative { xi_diag } => {
                if xi_diag.len() != n {
                    return bad(format!("xi_diag must have {n} entries"));
                }
                if xi_diag.iter().any(|g| *g == 0.0 || !g.is_finite()) {
                    return bad("xi_diag entries must be finite and nonzero".into());
                }
                Ok(())
            }
        }
    }

    /// The measurement handed to the controller at control step `step_index`.
    pub fn measure(&self, x: &[f64], t: f64, step_index: u64, seed: u64) -> Vec<f64> {
        match self {
            MeasurementModel::Accurate => x.to_vec(),
            MeasurementModel::AdditiveNoise { variance } => {
                let sd = variance.sqrt();
                let n = x.len() as u64;
                x.iter()
                    .enumerate()
                    .map(|(i, xi)| xi + sd * gaussian_sample(seed, step_index * n + i as u64))
                    .collect()
            }
            MeasurementModel::AdditiveBias { bias, t_on } => {
                if event_reached(t, *t_on) {
                    x.iter().zip(bias).map(|(a, b)| a + b).collect()
                } else {
                    x.to_vec()
                }
            }
            MeasurementModel::Multiplicative { xi_diag } => x.iter().zip(xi_diag).map(|(a, g)| a * g).collect(),
        }
    }

    /// The additive portion `s(t)` when it is deterministic.
    pub fn bias_at(&self, t: f64) -> Option<Vec<f64>> {
        match self {
            MeasurementModel::AdditiveBias { bias, t_on } => Some(if event_reached(t, *t_on) {
                bias.clone()
            } else {
                vec![0.0; bias.len()]
            }),
            _ => None,
        }
    }

    pub fn events(&self) -> Vec<(f64, &'static str)> {
        match self {
            MeasurementModel::AdditiveBias { t_on, .. } if *t_on > 0.0 => vec![(*t_on, "bias_on")],
            _ => Vec::new(),
        }
    }

    pub fn event_times(&self) -> Vec<f64> {
        match self {
            MeasurementModel::AdditiveBias { t_on, .. } => vec![*t_on],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields, from = "StrictActuator")]
pub enum ActuatorFaultModel {
    None,
    /// `u + signal(t)` once `t >= t_on`.
    Additive {
        signal: NamedFn,
        #[serde(default)]
        t_on: f64,
    },
    /// `factor * u` once `t >= t_on`.
    Multiplicative {
        factor: f64,
        #[serde(default)]
        t_on: f64,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum StrictActuator {
    None {},
    Additive {
        signal: NamedFn,
        #[serde(default)]
        t_on: f64,
    },
    Multiplicative {
        factor: f64,
        #[serde(default)]
        t_on: f64,
    },
}

impl From<StrictActuator> for ActuatorFaultModel {
    fn from(a: StrictActuator) -> Self {
        match a {
            StrictActuator::None {} => ActuatorFaultModel::None,
            StrictActuator::Additive { signal, t_on } => ActuatorFaultModel::Additive { signal, t_on },
            StrictActuator::Multiplicative { factor, t_on } => ActuatorFaultModel::Multiplicative { factor, t_on },
        }
    }
}

impl ActuatorFaultModel {
    pub fn validate(&self) -> Result<(), InaccuracyError> {
        let t_on = match self {
            ActuatorFaultModel::None => return Ok(()),
            ActuatorFaultModel::Additive { signal, t_on } => {
                if signal.min_state_dim() > 0 {
                    return Err(InaccuracyError::InvalidActuator(format!(
                        "fault signal {signal} must depend on t only"
                    )));
                }
                *t_on
            }
            ActuatorFaultModel::Multiplicative { factor, t_on } => {
                if *factor == 0.0 || !factor.is_finite() {
                    return Err(InaccuracyError::InvalidActuator(format!("factor {factor} must be nonzero")));
                }
                *t_on
            }
        };
        if !(t_on >= 0.0) || !t_on.is_finite() {
            return Err(InaccuracyError::InvalidActuator(format!("t_on {t_on} must be nonnegative")));
        }
        Ok(())
    }

    pub fn apply(&self, u: f64, t: f64) -> f64 {
        match self {
            ActuatorFaultModel::None => u,
            ActuatorFaultModel::Additive { signal, t_on } => {
                if event_reached(t, *t_on) {
                    u + signal.eval(&[], t)
                } else {
                    u
                }
            }
            ActuatorFaultModel::Multiplicative { factor, t_on } => {
                if event_reached(t, *t_on) {
                    factor * u
                } else {
                    u
                }
            }
        }
    }

    pub fn events(&self) -> Vec<(f64, &'static str)> {
        match self {
            ActuatorFaultModel::Additive { t_on, .. } | ActuatorFaultModel::Multiplicative { t_on, .. }
                if *t_on > 0.0 =>
            {
                vec![(*t_on, "actuator_fault_on")]
            }
            _ => Vec::new(),
        }
    }

    pub fn event_times(&self) -> Vec<f64> {
        match self {
            ActuatorFaultModel::Additive { t_on, .. } | ActuatorFaultModel::Multiplicative { t_on, .. } => {
                vec![*t_on]
            }
            ActuatorFaultModel::None => Vec::new(),
        }
    }
}
