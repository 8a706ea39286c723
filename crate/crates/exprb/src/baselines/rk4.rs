//! Classical fourth-order Runge–Kutta.

use crate::integrators::SemilinearProblem;
use crate::{Error, Result};
use nalgebra::DVector;

/// One RK4 step. No stability safeguard: on stiff problems beyond the CFL
/// bound the state grows and the non-finite check reports it upward.
pub fn rk4_step(problem: &dyn SemilinearProblem, u: &DVector<f64>, h: f64) -> Result<DVector<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArg(format!("step size must be positive, got {h}")));
    }
    let k1 = problem.rhs(u);
    let k2 = problem.rhs(&(u + (0.5 * h) * &k1));
    let k3 = problem.rhs(&(u + (0.5 * h) * &k2));
    let k4 = problem.rhs(&(u + h * &k3));
    let mut next = u.clone();
    next += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if !next.iter().all(|c| c.is_finite()) {
        return Err(Error::NonFinite("rk4 step produced a non-finite state".into()));
    }
    Ok(next)
}
