//! The adaptive approximation-based controller `u = u0(y) + uc(y)`.
//!
//! * nominal effort `u0(y) = g^-1 (-K y - sgn(B^T P y) eta_bar(y, t))`
//! * compensation effort `uc(y) = -Pi(y) theta - lambda s(y)`
//! * adaptation `theta' = Gamma Pi^T(y) p^T(y) - Gamma w_theta theta`,
//!   `lambda' = Lambda p(y) s(y) - w_lambda lambda`
//!
//! with `p(y) = y^T P B g` and `s = tanh(p^T / omega)` or `sgn(p^T)`.
//!
//! Every entry point takes the controller's measurement `y`. Nothing here knows
//! whether `y` is the true state or a corrupted one; the same code path serves
//! both.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approximator::{ApproximatorError, RbfLayout};
use crate::functions::NamedFn;
use crate::numerics::{self, dot, quadratic_form, sgn, solve_linear, Mat, NumericsError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControllerError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("input gain is not invertible")]
    SingularGain,
    #[error("invalid controller configuration: {0}")]
    InvalidConfig(String),
    #[error("controller design failed: {0}")]
    Design(#[from] NumericsError),
}

impl From<ApproximatorError> for ControllerError {
    fn from(e: ApproximatorError) -> Self {
        match e {
            ApproximatorError::DimensionMismatch(s) => ControllerError::DimensionMismatch(s),
            other => ControllerError::InvalidConfig(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, ControllerError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobustMode {
    /// `s = tanh(p^T / omega)`
    Tanh,
    /// `s = sgn(p^T)`, only with `w_theta = w_lambda = 0`
    Sgn,
}

/// Controller parameters as written in a scenario file. `P` is not part of
/// it: it is solved from `Q` and the closed-loop matrix at design time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerParams {
    pub k: Mat,
    pub q: Mat,
    #[serde(default)]
    pub eta_bound: NamedFn,
    pub rbf: RbfLayout,
    pub gamma_diag: Vec<f64>,
    pub lambda_rate: f64,
    pub w_theta: f64,
    pub w_lambda: f64,
    pub omega: f64,
    pub robust_mode: RobustMode,
    /// Initial weight estimate; all-zero when absent.
    #[serde(default)]
    pub theta0: Option<Vec<f64>>,
    #[serde(default)]
    pub lambda0: f64,
    #[serde(default = "default_theta_cap")]
    pub theta_cap: f64,
}

fn default_theta_cap() -> f64 {
    1e6
}

/// A designed controller.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    pub k: Mat,
    pub q: Mat,
    pub p: Mat,
    /// Input matrix `B` of the plant (`n x m`).
    pub b: Mat,
    /// Input gain `g` (`m x m`).
    pub g: Mat,
    pub eta_bound: NamedFn,
    pub rbf: RbfLayout,
    pub gamma: Vec<f64>,
    pub lambda_rate: f64,
    pub w_theta: f64,
    pub w_lambda: f64,
    pub omega: f64,
    pub robust_mode: RobustMode,
    pub theta_cap: f64,
}

/// `(theta_hat, lambda_hat)`, also used for their time derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveState {
    pub theta: Vec<f64>,
    pub lambda: f64,
}

impl AdaptiveState {
    pub fn zeros(weight_len: usize) -> Self {
        AdaptiveState {
            theta: vec![0.0; weight_len],
            lambda: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.lambda.is_finite() && self.theta.iter().all(|v| v.is_finite())
    }
}

/// The three control signals at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlEffort {
    pub u: Vec<f64>,
    pub u0: Vec<f64>,
    pub uc: Vec<f64>,
}

impl ControllerConfig {
    /// Solves `P` from `(A - BK)^T P + P (A - BK) = -Q` and validates the result.
    pub fn design(params: &ControllerParams, a: &Mat, b: &Mat, g: Mat) -> Result<Self> {
        let acl = a.sub(&b.mul(&params.k)?)?;
        let p = numerics::solve_lyapunov(&acl, &params.q)?;
        let cfg = ControllerConfig {
            k: params.k.clone(),
            q: params.q.clone(),
            p,
            b: b.clone(),
            g,
            eta_bound: params.eta_bound,
            rbf: params.rbf.clone(),
            gamma: params.gamma_diag.clone(),
            lambda_rate: params.lambda_rate,
            w_theta: params.w_theta,
            w_lambda: params.w_lambda,
            omega: params.omega,
            robust_mode: params.robust_mode,
            theta_cap: params.theta_cap,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn state_dim(&self) -> usize {
        self.p.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.g.rows()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.state_dim();
        let m = self.input_dim();
        let bad = |s: String| Err(ControllerError::InvalidConfig(s));
        if self.k.shape() != (m, n) || self.b.shape() != (n, m) || self.g.shape() != (m, m) {
            return bad(format!(
                "inconsistent shapes K {:?}, B {:?}, g {:?} for n = {n}",
                self.k.shape(),
                self.b.shape(),
                self.g.shape()
            ));
        }
        if self.rbf.input_dim() != n || self.rbf.output_dim() != m {
            return bad(format!(
                "RBF layout maps {} -> {}, controller needs {n} -> {m}",
                self.rbf.input_dim(),
                self.rbf.output_dim()
            ));
        }
        if self.gamma.len() != self.rbf.weight_len() {
            return bad(format!(
                "{} learning rates for {} weights",
                self.gamma.len(),
                self.rbf.weight_len()
            ));
        }
        if self.gamma.iter().any(|g| !(*g > 0.0)) {
            return bad("Gamma must be positive definite".into());
        }
        if !(self.lambda_rate > 0.0) {
            return bad("Lambda must be positive".into());
        }
        if !(self.w_theta >= 0.0) || !(self.w_lambda >= 0.0) {
            return bad("w_theta and w_lambda must be nonnegative".into());
        }
        match self.robust_mode {
            RobustMode::Tanh if !(self.omega > 0.0) => return bad("tanh mode needs omega > 0".into()),
            RobustMode::Sgn if self.w_theta != 0.0 || self.w_lambda != 0.0 => {
                return bad("sgn mode needs w_theta = w_lambda = 0".into())
            }
            _ => {}
        }
        if !(self.theta_cap > 0.0) {
            return bad("theta_cap must be positive".into());
        }
        if self.eta_bound.min_state_dim() > n {
            return bad(format!("eta bound {} needs more than {n} states", self.eta_bound));
        }
        if self.p.check_positive_definite().is_err() {
            return bad("P is not positive definite".into());
        }
        Ok(())
    }

    fn check_state(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.state_dim() {
            return Err(ControllerError::DimensionMismatch(format!(
                "measurement of length {} for a {}-state controller",
                y.len(),
                self.state_dim()
            )));
        }
        Ok(())
    }

    fn check_adapt(&self, adapt: &AdaptiveState) -> Result<()> {
        if adapt.theta.len() != self.rbf.weight_len() {
            return Err(ControllerError::DimensionMismatch(format!(
                "{} weights for {} basis functions",
                adapt.theta.len(),
                self.rbf.weight_len()
            )));
        }
        Ok(())
    }

    /// `u0(y) = g^-1 (-K y - sgn(B^T P y) eta_bar(y, t))`.
    pub fn nominal_effort(&self, y: &[f64], t: f64) -> Result<Vec<f64>> {
        self.check_state(y)?;
        let ky = self.k.mul_vec(y)?;
        let eta = self.eta_bound.eval(y, t);
        let v: Vec<f64> = if eta == 0.0 {
            ky.iter().map(|a| -a).collect()
        } else {
            let btpy = self.b.tr_mul_vec(&self.p.mul_vec(y)?)?;
            ky.iter().zip(&btpy).map(|(a, s)| -a - sgn(*s) * eta).collect()
        };
        if self.g.rows() == 1 {
            let g = self.g[(0, 0)];
            if g == 0.0 || !g.is_finite() {
                return Err(ControllerError::SingularGain);
            }
            return Ok(vec![v[0] / g]);
        }
        solve_linear(&self.g, &v).map_err(|e| match e {
            NumericsError::SingularSystem { .. } => ControllerError::SingularGain,
            other => other.into(),
        })
    }

    /// `p(y) = y^T P B g`, as a length-`m` row.
    pub fn p_of(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_state(y)?;
        let btpy = self.b.tr_mul_vec(&self.p.mul_vec(y)?)?;
        Ok(self.g.tr_mul_vec(&btpy)?)
    }

    pub fn robust_signal(&self, p: &[f64]) -> Vec<f64> {
        match self.robust_mode {
            RobustMode::Tanh => p.iter().map(|v| (v / self.omega).tanh()).collect(),
            RobustMode::Sgn => p.iter().map(|v| sgn(*v)).collect(),
        }
    }

    /// `uc(y) = -Pi(y) theta - lambda s(y)`.
    pub fn compensation_effort(&self, adapt: &AdaptiveState, y: &[f64]) -> Result<Vec<f64>> {
        self.check_adapt(adapt)?;
        let approx = self.rbf.evaluate(&adapt.theta, y)?;
        let s = self.robust_signal(&self.p_of(y)?);
        Ok(approx.iter().zip(&s).map(|(a, si)| -a - adapt.lambda * si).collect())
    }

    /// Right-hand sides of the two adaptation laws, evaluated at `y`.
    pub fn adaptation_derivatives(&self, adapt: &AdaptiveState, y: &[f64]) -> Result<AdaptiveState> {
        self.check_adapt(adapt)?;
        let p = self.p_of(y)?;
        let s = self.robust_signal(&p);
        let pi_t_p = self.rbf.basis_matrix(y)?.tr_mul_vec(&p)?;
        let theta = pi_t_p
            .iter()
            .zip(&adapt.theta)
            .zip(&self.gamma)
            .map(|((g_dir, th), gamma)| gamma * g_dir - gamma * self.w_theta * th)
            .collect();
        let lambda = self.lambda_rate * dot(&p, &s) - self.w_lambda * adapt.lambda;
        Ok(AdaptiveState { theta, lambda })
    }

    pub fn total_control(&self, adapt: &AdaptiveState, y: &[f64], t: f64) -> Result<ControlEffort> {
        let u0 = self.nominal_effort(y, t)?;
        let uc = self.compensation_effort(adapt, y)?;
        let u = u0.iter().zip(&uc).map(|(a, b)| a + b).collect();
        Ok(ControlEffort { u, u0, uc })
    }

    /// `V(x) = x^T P x / 2`.
    pub fn lyapunov_v(&self, x: &[f64]) -> Result<f64> {
        Ok(0.5 * quadratic_form(x, &self.p)?)
    }

    /// Augmented function `V(x) + theta_err^T Gamma^-1 theta_err / 2 + lambda_err^2 / (2 Lambda)`
    /// with errors taken against the supplied reference values.
    pub fn lyapunov_vc(&self, x: &[f64], adapt: &AdaptiveState, theta_ref: &[f64], lambda_ref: f64) -> Result<f64> {
        self.check_adapt(adapt)?;
        if theta_ref.len() != adapt.theta.len() {
            return Err(ControllerError::DimensionMismatch("reference weight length".into()));
        }
        let weight_term: f64 = adapt
            .theta
            .iter()
            .zip(theta_ref)
            .zip(&self.gamma)
            .map(|((th, r), g)| (th - r) * (th - r) / g)
            .sum();
        let dl = adapt.lambda - lambda_ref;
        Ok(self.lyapunov_v(x)? + 0.5 * weight_term + dl * dl / (2.0 * self.lambda_rate))
    }
}
