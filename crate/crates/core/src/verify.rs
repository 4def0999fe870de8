//! Empirical stability checks over completed runs.
//!
//! "Ultimately" is read as the last quarter of the horizon throughout. All
//! thresholds come from the scenario's [`CheckThresholds`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::{AdaptiveState, ControllerConfig, ControllerError};
use crate::harness::{simulate, CheckThresholds, RunLog, Scenario, ScenarioError, SimError};
use crate::inaccuracy::MeasurementModel;
use crate::numerics::{euclid_norm, lyapunov_residual, NumericsError};

/// Root of `c = exp(-(c + 1))`, rounded as it is usually quoted.
pub const LEMMA_C: f64 = 0.2785;
/// Floating-point allowance on the Lemma margin.
pub const LEMMA_MARGIN_TOL: f64 = 1e-12;
/// Required agreement of [`LEMMA_C`] with the fixed point it stands for.
pub const LEMMA_C_FIXED_POINT_TOL: f64 = 5e-5;
/// Bound on the Lyapunov residual relative to `|Q|_inf`.
pub const LYAPUNOV_RESIDUAL_TOL: f64 = 1e-9;

/// Fraction of the horizon after which the run counts as "ultimate".
pub const TAIL_FRACTION: f64 = 0.75;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("wrong scenario kind: {0}")]
    WrongScenarioKind(String),
    #[error("empty log")]
    EmptyLog,
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Controller(#[from] ControllerError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// One named comparison `value <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Check {
        Check {
            name: name.into(),
            value,
            threshold,
            pass: value.is_finite() && value <= threshold,
        }
    }
}

// ---------------------------------------------------------------- Lemma

/// `|a|_1 - a^T tanh(a / b)`.
pub fn lemma1_lhs(a: &[f64], b: f64) -> f64 {
    a.iter().map(|ai| ai.abs() - ai * (ai / b).tanh()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub samples: usize,
    /// `min (n b c - lhs)` over all samples.
    pub worst_margin: f64,
    pub worst_n: usize,
    pub worst_b: f64,
    /// `|c - exp(-(c + 1))|`.
    pub fixed_point_gap: f64,
    pub pass: bool,
}

/// Random test of `|a| - a^T tanh(a/b) <= n b c` with `a` uniform in
/// `[-10, 10]^n`, `b` log-uniform in `[1e-3, 10]` and `n` uniform in `1..=n_max`.
pub fn check_lemma1(trials: usize, n_max: usize, seed: u64) -> LemmaReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_max = n_max.max(1);
    let (ln_lo, ln_hi) = (1e-3f64.ln(), 10f64.ln());
    let mut worst = (f64::INFINITY, 0, 0.0);
    for _ in 0..trials {
        let n = rng.gen_range(1..=n_max);
        let b = rng.gen_range(ln_lo..=ln_hi).exp();
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..=10.0)).collect();
        let margin = n as f64 * b * LEMMA_C - lemma1_lhs(&a, b);
        if margin < worst.0 {
            worst = (margin, n, b);
        }
    }
    let gap = (LEMMA_C - (-(LEMMA_C + 1.0)).exp()).abs();
    LemmaReport {
        samples: trials,
        worst_margin: worst.0,
        worst_n: worst.1,
        worst_b: worst.2,
        fixed_point_gap: gap,
        pass: worst.0 >= -LEMMA_MARGIN_TOL && gap <= LEMMA_C_FIXED_POINT_TOL,
    }
}

// ------------------------------------------------------------ Boundedness

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub scenario: String,
    /// `sup |x|` over the last quarter.
    pub ultimate_bound_x: f64,
    /// `sup |theta - theta(T)|` and `sup |lambda - lambda(T)|` over the last quarter.
    pub ultimate_bound_theta: f64,
    pub ultimate_bound_lambda: f64,
    /// `sup |y|` over the last quarter.
    pub tracking_error: f64,
    /// `sup |x|` over the whole run and over the first quarter.
    pub peak_x: f64,
    pub transient_peak_x: f64,
    pub checks: Vec<Check>,
}

impl BoundReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn tail_from(log: &RunLog) -> f64 {
    TAIL_FRACTION * log.t_end
}

fn sup<'a>(rows: impl Iterator<Item = &'a crate::harness::LogRow>, f: impl Fn(&crate::harness::LogRow) -> f64) -> f64 {
    rows.map(f).fold(0.0, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

/// Ultimate boundedness of `x`, plus the "no late blow-up" guard that the
/// whole-run peak stays within `peak_factor` times the first-quarter peak.
pub fn check_ultimate_boundedness(
    log: &RunLog,
    threshold: f64,
    peak_factor: f64,
) -> Result<BoundReport, VerifyError> {
    let last = log.rows.last().ok_or(VerifyError::EmptyLog)?;
    let from = tail_from(log);
    let ultimate_bound_x = sup(log.window(from), |r| r.x_norm);
    let ultimate_bound_theta = sup(log.window(from), |r| {
        let d: Vec<f64> = r.theta.iter().zip(&last.theta).map(|(a, b)| a - b).collect();
        euclid_norm(&d)
    });
    let ultimate_bound_lambda = sup(log.window(from), |r| (r.lambda - last.lambda).abs());
    let tracking_error = sup(log.window(from), |r| euclid_norm(&r.y));
    let peak_x = sup(log.rows.iter(), |r| r.x_norm);
    let transient_peak_x = sup(log.rows.iter().filter(|r| r.t <= (1.0 - TAIL_FRACTION) * log.t_end), |r| r.x_norm);
    let checks = vec![
        Check::at_most("ultimate_bound_x", ultimate_bound_x, threshold),
        Check::at_most("peak_x", peak_x, peak_factor * transient_peak_x),
    ];
    Ok(BoundReport {
        scenario: log.scenario.clone(),
        ultimate_bound_x,
        ultimate_bound_theta,
        ultimate_bound_lambda,
        tracking_error,
        peak_x,
        transient_peak_x,
        checks,
    })
}

// ------------------------------------------------------ Indirect tracking

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingReport {
    pub scenario: String,
    /// `sup |x + s|` over the last quarter, with `s` the active bias.
    pub state_error: f64,
    /// `sup |y|` over the last quarter.
    pub measurement_error: f64,
    pub checks: Vec<Check>,
}

impl TrackingReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Under an additive bias the controller drives `y` to a neighbourhood of 0,
/// so `x` should settle near `-s`. An accurate measurement is the `s = 0` case.
pub fn check_indirect_tracking(
    log: &RunLog,
    measurement: &MeasurementModel,
    band: f64,
    measurement_bound: Option<f64>,
) -> Result<TrackingReport, VerifyError> {
    let n = log.state_dim();
    let bias_at = |t: f64| -> Vec<f64> {
        match measurement {
            MeasurementModel::AdditiveBias { .. } => measurement.bias_at(t).unwrap_or_else(|| vec![0.0; n]),
            _ => vec![0.0; n],
        }
    };
    match measurement {
        MeasurementModel::Accurate | MeasurementModel::AdditiveBias { .. } => {}
        other => {
            return Err(VerifyError::WrongScenarioKind(format!(
                "indirect tracking needs an accurate or additive-bias measurement, got {other:?}"
            )))
        }
    }
    if log.rows.is_empty() {
        return Err(VerifyError::EmptyLog);
    }
    let from = tail_from(log);
    let state_error = sup(log.window(from), |r| {
        let s = bias_at(r.t);
        let d: Vec<f64> = r.x.iter().zip(&s).map(|(x, s)| x + s).collect();
        euclid_norm(&d)
    });
    let measurement_error = sup(log.window(from), |r| euclid_norm(&r.y));
    let mut checks = vec![Check::at_most("tracking_band", state_error, band)];
    if let Some(b) = measurement_bound {
        checks.push(Check::at_most("measurement_bound", measurement_error, b));
    }
    Ok(TrackingReport {
        scenario: log.scenario.clone(),
        state_error,
        measurement_error,
        checks,
    })
}

// ----------------------------------------------------- Augmented Lyapunov

/// Stand-in for the unknown optimal `(theta, lambda)`: terminal adaptation
/// state of a `dt`-refined run of the same scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceAnchor {
    pub theta_ref: Vec<f64>,
    pub lambda_ref: f64,
}

pub fn reference_anchor(scn: &Scenario, refine: u32) -> Result<ReferenceAnchor, VerifyError> {
    let log = simulate(&scn.refined(refine.max(1)))?;
    let last = log.rows.last().ok_or(VerifyError::EmptyLog)?;
    Ok(ReferenceAnchor {
        theta_ref: last.theta.clone(),
        lambda_ref: last.lambda,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VcReport {
    pub scenario: String,
    /// `V_c` at the first logged time at or after mid-horizon.
    pub vc_mid: f64,
    /// `sup V_c` over the last quarter.
    pub vc_tail_sup: f64,
    /// Fraction of last-quarter samples with `V_c <= vc_mid + slack`.
    pub confined_fraction: f64,
    pub check: Check,
}

/// `V_c` along the logged run, evaluated at the measurement `y` (the
/// coordinates the controller actually stabilizes; `y = x` when accurate).
pub fn vc_series(log: &RunLog, cfg: &ControllerConfig, anchor: &ReferenceAnchor) -> Result<Vec<(f64, f64)>, VerifyError> {
    log.rows
        .iter()
        .map(|r| {
            let adapt = AdaptiveState {
                theta: r.theta.clone(),
                lambda: r.lambda,
            };
            Ok((r.t, cfg.lyapunov_vc(&r.y, &adapt, &anchor.theta_ref, anchor.lambda_ref)?))
        })
        .collect()
}

/// Descent to a ball: `sup V_c` over the last quarter may not exceed its value
/// at mid-horizon by more than `slack`.
pub fn check_vc_descent(
    log: &RunLog,
    cfg: &ControllerConfig,
    anchor: &ReferenceAnchor,
    slack: f64,
) -> Result<VcReport, VerifyError> {
    let series = vc_series(log, cfg, anchor)?;
    let mid_t = 0.5 * log.t_end;
    let vc_mid = series
        .iter()
        .find(|(t, _)| crate::event_reached(*t, mid_t))
        .map(|&(_, v)| v)
        .ok_or(VerifyError::EmptyLog)?;
    let from = tail_from(log);
    let tail: Vec<f64> = series
        .iter()
        .filter(|(t, _)| crate::event_reached(*t, from))
        .map(|&(_, v)| v)
        .collect();
    let limit = vc_mid + slack;
    let vc_tail_sup = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let confined = tail.iter().filter(|&&v| v <= limit).count();
    Ok(VcReport {
        scenario: log.scenario.clone(),
        vc_mid,
        vc_tail_sup,
        confined_fraction: confined as f64 / tail.len().max(1) as f64,
        check: Check::at_most("vc_descent", vc_tail_sup, limit),
    })
}

// ---------------------------------------------------- Learning-rate effect

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateComparison {
    pub level: f64,
    pub time_low: Option<f64>,
    pub time_high: Option<f64>,
    pub max_u_low: f64,
    pub max_u_high: f64,
    pub faster: bool,
    pub more_aggressive: bool,
}

impl RateComparison {
    pub fn pass(&self) -> bool {
        self.faster && self.more_aggressive
    }
}

/// Compares the first time `|x| <= level` and `max |u|` between a run at the
/// low learning rate and one at the high rate.
pub fn compare_learning_rates(low: &RunLog, high: &RunLog, level: f64) -> RateComparison {
    let time_low = low.first_time_below(level);
    let time_high = high.first_time_below(level);
    let faster = match (time_low, time_high) {
        (Some(l), Some(h)) => h < l,
        (None, Some(_)) => true,
        _ => false,
    };
    RateComparison {
        level,
        time_low,
        time_high,
        max_u_low: low.summary.max_abs_u,
        max_u_high: high.summary.max_abs_u,
        faster,
        more_aggressive: high.summary.max_abs_u > low.summary.max_abs_u,
    }
}

// ------------------------------------------------------------------ Driver

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub lyapunov: Check,
    pub bound: Option<BoundReport>,
    pub tracking: Option<TrackingReport>,
    pub vc: Option<VcReport>,
}

impl VerificationReport {
    pub fn checks(&self) -> Vec<&Check> {
        let mut out = vec![&self.lyapunov];
        if let Some(b) = &self.bound {
            out.extend(&b.checks);
        }
        if let Some(t) = &self.tracking {
            out.extend(&t.checks);
        }
        if let Some(v) = &self.vc {
            out.push(&v.check);
        }
        out
    }

    pub fn pass(&self) -> bool {
        self.checks().iter().all(|c| c.pass)
    }

    pub fn table(&self) -> String {
        let mut s = format!("scenario {}\n{:<20} {:>14} {:>14}  result\n", self.scenario, "check", "value", "threshold");
        for c in self.checks() {
            s += &format!(
                "{:<20} {:>14.6e} {:>14.6e}  {}\n",
                c.name,
                c.value,
                c.threshold,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        s
    }
}

/// Relative residual `|A_cl^T P + P A_cl + Q|_inf / |Q|_inf` of the designed gains.
pub fn lyapunov_check(cfg: &ControllerConfig, a: &crate::numerics::Mat) -> Result<Check, VerifyError> {
    let acl = a.sub(&cfg.b.mul(&cfg.k)?)?;
    let r = lyapunov_residual(&acl, &cfg.p, &cfg.q)?;
    Ok(Check::at_most("lyapunov_residual", r.inf_norm() / cfg.q.inf_norm(), LYAPUNOV_RESIDUAL_TOL))
}

/// Runs the scenario and every check its thresholds and measurement model ask
/// for. The augmented-Lyapunov check is skipped under measurement noise.
pub fn verify_scenario(scn: &Scenario) -> Result<VerificationReport, VerifyError> {
    let built = scn.build()?;
    let lyapunov = lyapunov_check(&built.controller, built.plant.a())?;
    let log = simulate(scn)?;
    verify_log(scn, &built.controller, lyapunov, &log)
}

/// As [`verify_scenario`] for an existing log of `scn`.
pub fn verify_log(
    scn: &Scenario,
    cfg: &ControllerConfig,
    lyapunov: Check,
    log: &RunLog,
) -> Result<VerificationReport, VerifyError> {
    let th: &CheckThresholds = &scn.checks;
    let bound = th
        .ultimate_bound
        .map(|b| check_ultimate_boundedness(log, b, th.peak_factor))
        .transpose()?;
    let tracking = match (&scn.measurement, th.tracking_band) {
        (m @ (MeasurementModel::AdditiveBias { .. } | MeasurementModel::Accurate), Some(band)) => {
            Some(check_indirect_tracking(log, m, band, th.measurement_bound)?)
        }
        _ => None,
    };
    let vc = match scn.measurement {
        MeasurementModel::AdditiveNoise { .. } => None,
        _ => {
            let anchor = reference_anchor(scn, th.reference_refine)?;
            Some(check_vc_descent(log, cfg, &anchor, th.vc_slack)?)
        }
    };
    Ok(VerificationReport {
        scenario: scn.name.clone(),
        lyapunov,
        bound,
        tracking,
        vc,
    })
}
