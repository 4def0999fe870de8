use serde::{Deserialize, Serialize};

use super::{NumericsError, Result};

/// Time and stacked state of an ODE, e.g. `[x; theta; lambda]` for the
/// closed loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeState {
    pub t: f64,
    pub z: Vec<f64>,
}

impl OdeState {
    pub fn new(t: f64, z: Vec<f64>) -> Self {
        OdeState { t, z }
    }
}

fn axpy(z: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    z.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// One classical RK4 step. `deriv` is called exactly four times, at
/// `t`, `t + dt/2`, `t + dt/2` and `t + dt`.
///
/// Anything piecewise constant (noise samples, switched segments, held control)
/// must be captured by the closure before the call so that all four stages see
/// the same value.
pub fn rk4_step<F>(mut deriv: F, state: &OdeState, dt: f64) -> Result<OdeState>
where
    F: FnMut(f64, &[f64]) -> Vec<f64>,
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(NumericsError::InvalidStep(dt));
    }
    let t = state.t;
    let half = 0.5 * dt;
    let mut stage = |tt: f64, z: &[f64]| -> Result<Vec<f64>> {
        let k = deriv(tt, z);
        if k.len() != z.len() {
            return Err(NumericsError::DimensionMismatch(format!(
                "derivative of length {} for state of length {}",
                k.len(),
                z.len()
            )));
        }
        if k.iter().all(|v| v.is_finite()) {
            Ok(k)
        } else {
            Err(NumericsError::NonFiniteDerivative { t: tt })
        }
    };

    let k1 = stage(t, &state.z)?;
    let k2 = stage(t + half, &axpy(&state.z, half, &k1))?;
    let k3 = stage(t + half, &axpy(&state.z, half, &k2))?;
    let k4 = stage(t + dt, &axpy(&state.z, dt, &k3))?;

    let z: Vec<f64> = (0..state.z.len())
        .map(|i| state.z[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if !z.iter().all(|v| v.is_finite()) {
        return Err(NumericsError::NonFiniteDerivative { t: t + dt });
    }
    Ok(OdeState { t: t + dt, z })
}
