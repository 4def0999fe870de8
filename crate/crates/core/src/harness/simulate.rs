use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::scenario::{Built, Scenario, ScenarioError};
use crate::controller::AdaptiveState;
use crate::numerics::{euclid_norm, rk4_step, NumericsError, OdeState};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("adaptation cap exceeded at t = {t}: |theta| = {norm:e} > {cap:e}")]
    CapExceeded { t: f64, norm: f64, cap: f64 },
    #[error("numerics: {0}")]
    Numerics(NumericsError),
}

/// One logged sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub u0: Vec<f64>,
    pub uc: Vec<f64>,
    pub theta: Vec<f64>,
    pub lambda: f64,
    pub v: f64,
    pub x_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub terminal_x_norm: f64,
    /// `sup |x|` over the last quarter of the horizon.
    pub tail_sup_x_norm: f64,
    pub theta_terminal: Vec<f64>,
    pub lambda_terminal: f64,
    /// `max |u|` over every integration step, not just logged rows.
    pub max_abs_u: f64,
    pub steps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub scenario: String,
    pub t_end: f64,
    pub rows: Vec<LogRow>,
    pub events: Vec<Event>,
    pub summary: Summary,
}

impl RunLog {
    pub fn state_dim(&self) -> usize {
        self.rows.first().map_or(0, |r| r.x.len())
    }

    pub fn input_dim(&self) -> usize {
        self.rows.first().map_or(0, |r| r.u.len())
    }

    pub fn weight_len(&self) -> usize {
        self.rows.first().map_or(0, |r| r.theta.len())
    }

    /// Rows with `t >= from`.
    pub fn window(&self, from: f64) -> impl Iterator<Item = &LogRow> {
        self.rows.iter().filter(move |r| r.t >= from - crate::EVENT_TOL)
    }

    /// Rows in the last quarter of the horizon.
    pub fn tail(&self) -> impl Iterator<Item = &LogRow> {
        self.window(0.75 * self.t_end)
    }

    /// First logged time with `|x| <= level`.
    pub fn first_time_below(&self, level: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.x_norm <= level).map(|r| r.t)
    }

    pub fn row_at(&self, t: f64) -> Option<&LogRow> {
        self.rows.iter().find(|r| (r.t - t).abs() <= crate::EVENT_TOL)
    }
}

fn split(z: &[f64], n: usize, k: usize) -> (&[f64], AdaptiveState) {
    (
        &z[..n],
        AdaptiveState {
            theta: z[n..n + k].to_vec(),
            lambda: z[n + k],
        },
    )
}

/// Integrates the closed loop `[x; theta; lambda]` with RK4.
///
/// Each step takes the measurement `y` at the start of the step, computes the
/// control from it, applies the actuator fault, and holds `y`, the applied
/// control and the active `h` segment for all four RK4 stages. The adaptation
/// laws are driven by the same `y`.
pub fn simulate(scn: &Scenario) -> Result<RunLog, SimError> {
    scn.validate()?;
    let built = scn.build()?;
    simulate_built(scn, &built)
}

/// Runs `scn` with an already instantiated plant and controller. The
/// controller is used as given, so a caller may deliberately break it (e.g.
/// flip the sign of `gamma`) to exercise the failure side of a check.
pub fn simulate_built(scn: &Scenario, built: &Built) -> Result<RunLog, SimError> {
    let (plant, cfg) = (&built.plant, &built.controller);
    let n = plant.state_dim();
    let k = cfg.rbf.weight_len();
    let steps = scn.steps()?;
    let cap = cfg.theta_cap;

    let mut z = Vec::with_capacity(n + k + 1);
    z.extend_from_slice(&scn.x0);
    z.extend_from_slice(&built.adapt0.theta);
    z.push(built.adapt0.lambda);
    let mut state = OdeState::new(0.0, z);

    let mut rows = Vec::with_capacity((steps / scn.log_every as u64 + 2) as usize);
    let mut max_abs_u: f64 = 0.0;

    for step in 0..=steps {
        let t = scn.step_time(step);
        let (x, adapt) = split(&state.z, n, k);
        let y = scn.measurement.measure(x, t, step, scn.seed);
        let effort = cfg
            .total_control(&adapt, &y, t)
            .expect("dimensions checked by Scenario::validate");
        max_abs_u = effort.u.iter().fold(max_abs_u, |m, u| m.max(u.abs()));

        if step % scn.log_every as u64 == 0 || step == steps {
            rows.push(LogRow {
                t,
                x: x.to_vec(),
                y: y.clone(),
                u: effort.u.clone(),
                u0: effort.u0,
                uc: effort.uc,
                theta: adapt.theta.clone(),
                lambda: adapt.lambda,
                v: cfg.lyapunov_v(x).expect("dimensions checked"),
                x_norm: euclid_norm(x),
            });
        }
        if step == steps {
            break;
        }

        let u_applied = scn.actuator.apply(effort.u[0], t);
        let h = plant.h_schedule.active(t);
        state.t = t;
        let next = rk4_step(
            |ts, zs| {
                let (xs, adapt_s) = split(zs, n, k);
                let mut dz = plant.derivative_with_h(xs, u_applied, ts, h);
                let d = cfg
                    .adaptation_derivatives(&adapt_s, &y)
                    .expect("dimensions checked by Scenario::validate");
                dz.extend(d.theta);
                dz.push(d.lambda);
                dz
            },
            &state,
            scn.dt,
        );
        state = match next {
            Ok(s) => s,
            Err(NumericsError::NonFiniteDerivative { t }) => return Err(SimError::NonFinite { t }),
            Err(e) => return Err(SimError::Numerics(e)),
        };
        let norm = euclid_norm(&state.z[n..n + k]);
        if norm > cap {
            return Err(SimError::CapExceeded {
                t: scn.step_time(step + 1),
                norm,
                cap,
            });
        }
    }

    let mut events: Vec<Event> = scn
        .measurement
        .events()
        .into_iter()
        .chain(scn.actuator.events())
        .map(|(t, label)| Event { t, label: label.to_string() })
        .chain(
            plant
                .h_schedule
                .segments()
                .iter()
                .skip(1)
                .map(|s| Event { t: s.t_start, label: "h_switch".into() }),
        )
        .filter(|e| e.t <= scn.t_end)
        .collect();
    events.sort_by(|a, b| a.t.total_cmp(&b.t));

    let last = rows.last().expect("at least two rows are logged");
    let tail_from = 0.75 * scn.t_end;
    let summary = Summary {
        terminal_x_norm: last.x_norm,
        tail_sup_x_norm: rows
            .iter()
            .filter(|r| r.t >= tail_from - crate::EVENT_TOL)
            .fold(0.0, |m, r| m.max(r.x_norm)),
        theta_terminal: last.theta.clone(),
        lambda_terminal: last.lambda,
        max_abs_u,
        steps,
    };
    Ok(RunLog {
        scenario: scn.name.clone(),
        t_end: scn.t_end,
        rows,
        events,
        summary,
    })
}
