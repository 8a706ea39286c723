//! Velocity (kick-drift-kick) Störmer–Verlet on the second-order form.

use crate::{Error, Result};
use nalgebra::DVector;

/// One velocity-Verlet step for `x'' = a(x, v)`:
/// half kick, full drift, half kick. For conservative accelerations this is
/// the classical symplectic scheme; the velocity argument only matters when
/// a drag hook is active (then the second kick uses the half-step velocity
/// and the scheme degrades gracefully to first order in the drag term).
pub fn verlet_step(
    accel: &dyn Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64>,
    x: &DVector<f64>,
    v: &DVector<f64>,
    h: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    if !(h.is_finite() && h != 0.0) {
        return Err(Error::InvalidArg(format!(
            "step size must be finite and nonzero, got {h}"
        )));
    }
    let mut v_half = v.clone();
    v_half.axpy(0.5 * h, &accel(x, v), 1.0);
    let mut x_next = x.clone();
    x_next.axpy(h, &v_half, 1.0);
    let mut v_next = v_half.clone();
    v_next.axpy(0.5 * h, &accel(&x_next, &v_half), 1.0);
    if !(x_next.iter().all(|c| c.is_finite()) && v_next.iter().all(|c| c.is_finite())) {
        return Err(Error::NonFinite("verlet step produced a non-finite state".into()));
    }
    Ok((x_next, v_next))
}
