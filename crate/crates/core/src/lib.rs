//! Adaptive approximation-based control of nonlinear uncertain systems under
//! accurate and inaccurate state measurements.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`] dense matrices, the continuous Lyapunov solver and a fixed-step RK4 integrator.
//! * [`approximator`] the Gaussian RBF network `u_c(x, w) = Pi(x) w`.
//! * [`controller`] nominal and compensation efforts, adaptation laws, Lyapunov evaluators.
//! * [`plant`] canonical-form plants (single-link robot arm) with scheduled unknown dynamics.
//! * [`inaccuracy`] measurement inaccuracy and actuator fault models.
//! * [`harness`] scenarios, the closed-loop simulation driver, CSV logging, builtin scenarios.
//! * [`verify`] empirical stability and tracking checks on simulated trajectories.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approximator;
pub mod controller;
pub mod functions;
pub mod harness;
pub mod inaccuracy;
pub mod numerics;
pub mod plant;
pub mod verify;

pub use approximator::RbfLayout;
pub use controller::{AdaptiveState, ControllerConfig, RobustMode};
pub use harness::{builtin_scenarios, simulate, RunLog, Scenario};
pub use numerics::Mat;
pub use plant::PlantSpec;

/// Slack used when comparing simulation times against event times that are
/// meant to sit on step boundaries.
pub const EVENT_TOL: f64 = 1e-9;

/// `t >= t_on`, tolerant of the rounding in `k * dt`.
pub fn event_reached(t: f64, t_on: f64) -> bool {
    t >= t_on - EVENT_TOL
}
