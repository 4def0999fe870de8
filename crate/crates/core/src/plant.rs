//! Canonical-form plants `x' = A x + B [f(x) + g u + eta(x, t) + h(x, t)]`
//! where `A` is the shift matrix and `B = e_n`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event_reached;
use crate::functions::NamedFn;
use crate::numerics::Mat;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlantError {
    #[error("invalid plant parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid h schedule: {0}")]
    InvalidSchedule(String),
}

/// Known nominal nonlinearity `f(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nominal {
    Named(NamedFn),
    /// `-sin_coeff * sin(x1) - damping_coeff * x2`
    Pendulum { sin_coeff: f64, damping_coeff: f64 },
}

impl Nominal {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Nominal::Named(f) => f.eval(x, 0.0),
            Nominal::Pendulum {
                sin_coeff,
                damping_coeff,
            } => -sin_coeff * x[0].sin() - damping_coeff * x[1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HSegment {
    pub t_start: f64,
    pub h: NamedFn,
}

/// Piecewise-in-time unknown dynamics. Segments are closed on the left: the
/// segment with the largest `t_start <= t` is active.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<HSegment>", into = "Vec<HSegment>")]
pub struct HSchedule {
    segments: Vec<HSegment>,
}

impl HSchedule {
    pub fn new(segments: Vec<HSegment>) -> Result<Self, PlantError> {
        match segments.first() {
            None => return Err(PlantError::InvalidSchedule("no segments".into())),
            Some(s) if s.t_start != 0.0 => {
                return Err(PlantError::InvalidSchedule(format!(
                    "first segment starts at {} instead of 0",
                    s.t_start
                )))
            }
            _ => {}
        }
        if segments.iter().any(|s| !s.t_start.is_finite()) {
            return Err(PlantError::InvalidSchedule("non-finite start time".into()));
        }
        if segments.windows(2).any(|w| w[1].t_start <= w[0].t_start) {
            return Err(PlantError::InvalidSchedule("start times must be strictly increasing".into()));
        }
        Ok(HSchedule { segments })
    }

    pub fn constant(h: NamedFn) -> Self {
        HSchedule {
            segments: vec![HSegment { t_start: 0.0, h }],
        }
    }

    pub fn segments(&self) -> &[HSegment] {
        &self.segments
    }

    pub fn active_index(&self, t: f64) -> usize {
        self.segments
            .iter()
            .rposition(|s| event_reached(t, s.t_start))
            .unwrap_or(0)
    }

    pub fn active(&self, t: f64) -> NamedFn {
        self.segments[self.active_index(t)].h
    }
}

impl TryFrom<Vec<HSegment>> for HSchedule {
    type Error = PlantError;

    fn try_from(v: Vec<HSegment>) -> Result<Self, Self::Error> {
        HSchedule::new(v)
    }
}

impl From<HSchedule> for Vec<HSegment> {
    fn from(s: HSchedule) -> Self {
        s.segments
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantSpec {
    n: usize,
    a: Mat,
    b: Mat,
    pub f: Nominal,
    g: f64,
    pub eta: NamedFn,
    pub h_schedule: HSchedule,
}

/// Shift matrix with ones on the superdiagonal and a zero last row.
pub fn companion_a(n: usize) -> Mat {
    let mut a = Mat::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        a[(i, i + 1)] = 1.0;
    }
    a
}

/// `e_n`.
pub fn companion_b(n: usize) -> Mat {
    let mut b = Mat::zeros(n, 1);
    if n > 0 {
        b[(n - 1, 0)] = 1.0;
    }
    b
}

impl PlantSpec {
    pub fn canonical(n: usize, f: Nominal, g: f64, eta: NamedFn, h_schedule: HSchedule) -> Result<Self, PlantError> {
        if n == 0 {
            return Err(PlantError::InvalidParameter("state dimension must be positive".into()));
        }
        if g == 0.0 || !g.is_finite() {
            return Err(PlantError::InvalidParameter(format!("input gain g = {g}")));
        }
        if matches!(f, Nominal::Pendulum { .. }) && n < 2 {
            return Err(PlantError::InvalidParameter("pendulum nominal needs n >= 2".into()));
        }
        let need = h_schedule
            .segments()
            .iter()
            .map(|s| s.h.min_state_dim())
            .chain([eta.min_state_dim()])
            .chain(match f {
                Nominal::Named(nf) => Some(nf.min_state_dim()),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        if need > n {
            return Err(PlantError::InvalidParameter(format!(
                "expressions reference x{need} but the plant has {n} states"
            )));
        }
        Ok(PlantSpec {
            n,
            a: companion_a(n),
            b: companion_b(n),
            f,
            g,
            eta,
            h_schedule,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn input_dim(&self) -> usize {
        1
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }

    pub fn b(&self) -> &Mat {
        &self.b
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn with_h_schedule(mut self, h_schedule: HSchedule) -> Self {
        self.h_schedule = h_schedule;
        self
    }

    /// `x'` with the `h` segment active at `t`.
    pub fn derivative(&self, x: &[f64], u_applied: f64, t: f64) -> Vec<f64> {
        self.derivative_with_h(x, u_applied, t, self.h_schedule.active(t))
    }

    /// `x'` with an explicitly chosen `h`, used to hold the segment fixed over
    /// an integration step.
    pub fn derivative_with_h(&self, x: &[f64], u_applied: f64, t: f64, h: NamedFn) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        let mut dx = Vec::with_capacity(self.n);
        dx.extend_from_slice(&x[1..]);
        dx.push(self.f.eval(x) + self.g * u_applied + self.eta.eval(x, t) + h.eval(x, t));
        dx
    }
}

/// Single-link robot arm `x1' = x2`,
/// `x2' = -(M grav l / J) sin(x1) - (B / J) x2 + u / J`.
pub fn robot_arm_spec(inertia: f64, damping: f64, mass: f64, gravity: f64, length: f64) -> Result<PlantSpec, PlantError> {
    if !(inertia > 0.0) || !inertia.is_finite() {
        return Err(PlantError::InvalidParameter(format!("inertia J = {inertia} must be positive")));
    }
    PlantSpec::canonical(
        2,
        Nominal::Pendulum {
            sin_coeff: mass * gravity * length / inertia,
            damping_coeff: damping / inertia,
        },
        1.0 / inertia,
        NamedFn::Zero,
        HSchedule::constant(NamedFn::Zero),
    )
}

/// Plant description as written in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlantParams {
    RobotArm {
        inertia: f64,
        damping: f64,
        mass: f64,
        gravity: f64,
        length: f64,
        #[serde(default)]
        eta: NamedFn,
        h_schedule: HSchedule,
    },
    Canonical {
        n: usize,
        f: NamedFn,
        g: f64,
        #[serde(default)]
        eta: NamedFn,
        h_schedule: HSchedule,
    },
}

impl PlantParams {
    /// The single-link arm with unit inertia, damping 2, unit mass and length, and `grav = 9.8`.
    pub fn standard_robot_arm(h_schedule: HSchedule) -> Self {
        PlantParams::RobotArm {
            inertia: 1.0,
            damping: 2.0,
            mass: 1.0,
            gravity: 9.8,
            length: 1.0,
            eta: NamedFn::Zero,
            h_schedule,
        }
    }

    pub fn build(&self) -> Result<PlantSpec, PlantError> {
        match self {
            PlantParams::RobotArm {
                inertia,
                damping,
                mass,
                gravity,
                length,
                eta,
                h_schedule,
            } => {
                let mut spec = robot_arm_spec(*inertia, *damping, *mass, *gravity, *length)?;
                spec.eta = *eta;
                Ok(spec.with_h_schedule(h_schedule.clone()))
            }
            PlantParams::Canonical {
                n,
                f,
                g,
                eta,
                h_schedule,
            } => PlantSpec::canonical(*n, Nominal::Named(*f), *g, *eta, h_schedule.clone()),
        }
    }

    pub fn h_schedule(&self) -> &HSchedule {
        match self {
            PlantParams::RobotArm { h_schedule, .. } | PlantParams::Canonical { h_schedule, .. } => h_schedule,
        }
    }
}
