//! BDF-1 (implicit Euler) with a matrix-free Newton–Krylov solve.

use super::gmres::{gmres, GmresConfig};
use crate::integrators::SemilinearProblem;
use crate::linop::ShiftedOperator;
use crate::{Error, Result};
use nalgebra::DVector;

/// Newton settings for the implicit solve; the inner `(I - h J)` systems go
/// through restarted GMRES with the Jacobian applied matrix-free.
#[derive(Clone, Debug)]
pub struct NewtonConfig {
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub max_iter: usize,
    pub linear: GmresConfig,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tol_abs: 1e-10,
            tol_rel: 1e-8,
            max_iter: 25,
            linear: GmresConfig { tol: 1e-12, restart: 50, max_matvecs: 2000 },
        }
    }
}

/// One implicit-Euler step: solves `w = u + h F(w)` by Newton iteration on
/// `G(w) = w - u - h F(w)`, refreshing the Jacobian every iteration.
pub fn bdf1_step(
    problem: &dyn SemilinearProblem,
    u: &DVector<f64>,
    h: f64,
    cfg: &NewtonConfig,
) -> Result<DVector<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArg(format!("step size must be positive, got {h}")));
    }
    if !(cfg.tol_abs > 0.0 && cfg.tol_rel >= 0.0 && cfg.max_iter > 0) {
        return Err(Error::InvalidArg("Newton tolerances/limits must be positive".into()));
    }
    let target = cfg.tol_abs + cfg.tol_rel * u.norm();
    let mut w = u.clone();
    for _ in 0..cfg.max_iter {
        let mut residual = &w - u;
        residual.axpy(-h, &problem.rhs(&w), 1.0);
        let rnorm = residual.norm();
        if !rnorm.is_finite() {
            return Err(Error::NonFinite("implicit-Euler residual".into()));
        }
        if rnorm <= target {
            return Ok(w);
        }
        let jac = problem.jacobian_at(&w);
        let shifted = ShiftedOperator::new(jac.as_ref(), h);
        let rhs = -&residual;
        let delta = gmres(&shifted, &rhs, &cfg.linear)?;
        w += delta.x;
    }
    let mut residual = &w - u;
    residual.axpy(-h, &problem.rhs(&w), 1.0);
    Err(Error::NewtonDiverged(format!(
        "implicit Euler: residual {:.3e} after {} iterations (target {target:.3e})",
        residual.norm(),
        cfg.max_iter
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::ClosureProblem;
    use nalgebra::DMatrix;

    #[test]
    fn zero_rhs_is_identity() {
        let p = ClosureProblem::new(2, |_| DVector::zeros(2));
        let u = DVector::from_vec(vec![3.0, -1.0]);
        assert_eq!(bdf1_step(&p, &u, 0.5, &NewtonConfig::default()).unwrap(), u);
    }

    #[test]
    fn linear_scalar_matches_closed_form() {
        let lambda = -3.0;
        let p = ClosureProblem::with_jacobian(
            1,
            move |u: &DVector<f64>| lambda * u,
            move |_: &DVector<f64>| DMatrix::from_element(1, 1, lambda),
        );
        let u = DVector::from_vec(vec![2.0]);
        let h = 0.2;
        let w = bdf1_step(&p, &u, h, &NewtonConfig::default()).unwrap();
        let exact = 2.0 / (1.0 - h * lambda);
        assert!((w[0] - exact).abs() <= 1e-10, "got {} want {exact}", w[0]);
    }

    #[test]
    fn converges_on_a_nonlinear_problem() {
        // u' = -u^3: strictly decreasing magnitude, implicit equation solvable
        let p = ClosureProblem::with_jacobian(
            1,
            |u: &DVector<f64>| DVector::from_vec(vec![-u[0].powi(3)]),
            |u: &DVector<f64>| DMatrix::from_element(1, 1, -3.0 * u[0] * u[0]),
        );
        let u = DVector::from_vec(vec![1.5]);
        let h = 0.1;
        let w = bdf1_step(&p, &u, h, &NewtonConfig::default()).unwrap();
        // verify the implicit relation itself
        let resid = (w[0] - u[0] + h * w[0].powi(3)).abs();
        assert!(resid <= 1e-9, "implicit relation residual {resid:.3e}");
        assert!(w[0] < u[0] && w[0] > 0.0);
    }

    #[test]
    fn reports_newton_failure() {
        // u' = u^2 from a state where the implicit equation w - u = h w^2 has
        // no real solution for h u > 1/4: 25 iterations cannot fix that
        let p = ClosureProblem::with_jacobian(
            1,
            |u: &DVector<f64>| DVector::from_vec(vec![u[0] * u[0]]),
            |u: &DVector<f64>| DMatrix::from_element(1, 1, 2.0 * u[0]),
        );
        let u = DVector::from_vec(vec![10.0]);
        let err = bdf1_step(&p, &u, 1.0, &NewtonConfig::default());
        assert!(err.is_err());
    }
}
