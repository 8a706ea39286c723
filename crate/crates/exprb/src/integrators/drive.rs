//! Fixed-step outer integration loop.

use super::problem::{LinearizationFrame, SemilinearProblem};
use super::step::Stepper;
use crate::krylov::{KrylovConfig, KrylovStats};
use crate::{Error, Result};
use nalgebra::DVector;

/// What an observer sees after each accepted step.
pub struct StepObservation<'a> {
    pub step_index: usize,
    /// Time at the end of the step.
    pub t: f64,
    pub u: &'a DVector<f64>,
    /// Krylov work of this step alone.
    pub stats: &'a KrylovStats,
}

/// Dense record of an integration run.
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    /// Aggregate Krylov work over all steps.
    pub stats: KrylovStats,
}

impl Trajectory {
    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory holds at least u0")
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }
}

/// Integrates `u' = F(u)` from `t0` to `t_end` with fixed step `h` (the last
/// step is clipped to land on `t_end` exactly). Re-linearizes every step.
///
/// A non-finite state after any step aborts with a diagnostic carrying the
/// failure time; the stability-limit search relies on that.
#[allow(clippy::too_many_arguments)]
pub fn integrate(
    problem: &dyn SemilinearProblem,
    stepper: &Stepper,
    u0: &DVector<f64>,
    t0: f64,
    t_end: f64,
    h: f64,
    cfg: &KrylovConfig,
    mut observer: Option<&mut dyn FnMut(&StepObservation<'_>)>,
) -> Result<Trajectory> {
    if !(t_end >= t0) {
        return Err(Error::InvalidArg(format!("t_end = {t_end} precedes t0 = {t0}")));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArg(format!("step size must be positive, got {h}")));
    }

    let mut times = vec![t0];
    let mut states = vec![u0.clone()];
    let mut stats = KrylovStats::default();
    let mut u = u0.clone();
    let mut t = t0;
    let mut step_index = 0usize;

    while t < t_end {
        let remaining = t_end - t;
        // Absorb floating-point crumbs: rather than taking a microscopic
        // final step, clip once the remainder is within a ulp-scale factor
        // of h.
        let landing = remaining <= h * (1.0 + 1e-9);
        let h_step = if landing { remaining } else { h };

        let frame = LinearizationFrame::linearize(problem, &u)?;
        let result = stepper.step(&frame, h_step, cfg)?;
        u = result.u_next;
        t = if landing { t_end } else { t + h_step };
        step_index += 1;

        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!(
                "state diverged at t = {t:.6e} (step {step_index})"
            )));
        }
        stats.merge(&result.stats);
        if let Some(obs) = observer.as_mut() {
            obs(&StepObservation { step_index, t, u: &u, stats: &result.stats });
        }
        times.push(t);
        states.push(u.clone());
    }

    Ok(Trajectory { times, states, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::problem::ClosureProblem;
    use crate::matfunc::phi_apply_dense;
    use crate::samples;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn zero_span_returns_initial_state_only() {
        let p = ClosureProblem::new(2, |u| u.clone());
        let u0 = DVector::from_vec(vec![1.0, 2.0]);
        let tr = integrate(
            &p,
            &Stepper::ExprbEuler,
            &u0,
            0.5,
            0.5,
            0.1,
            &KrylovConfig::default(),
            None,
        )
        .unwrap();
        assert_eq!(tr.times, vec![0.5]);
        assert_eq!(tr.states.len(), 1);
        assert_eq!(tr.final_state(), &u0);
    }

    #[test]
    fn linear_problem_is_exact_for_any_step() {
        let mut rng = samples::seeded(51);
        let n = 8;
        let a = samples::random_stable(&mut rng, n, 3.0);
        let b = samples::random_vector(&mut rng, n);
        let u0 = samples::random_vector(&mut rng, n);
        let (a2, b2) = (a.clone(), b.clone());
        let p = ClosureProblem::with_jacobian(n, move |u| &a2 * u + &b2, {
            let a3 = a.clone();
            move |_| a3.clone()
        });
        let span = 1.0;
        // Reference via the dense path: u(T) = u0 + T phi_1(TA) F(u0).
        let f0 = &a * &u0 + &b;
        let want =
            &u0 + phi_apply_dense(&(&a * span), &[DVector::zeros(n), &f0 * span]).unwrap();
        let cfg = KrylovConfig::with_tol(1e-12);
        for stepper in [Stepper::ExprbEuler, Stepper::Exprb42, Stepper::Pexprb43] {
            let tr = integrate(&p, &stepper, &u0, 0.0, span, 0.3, &cfg, None).unwrap();
            assert_eq!(tr.steps(), 4, "0.3 + 0.3 + 0.3 + 0.1");
            assert_eq!(*tr.times.last().unwrap(), span);
            let rel = (tr.final_state() - &want).norm() / want.norm();
            assert!(rel < 1e-9, "{}: rel err {rel:.3e}", stepper.name());
        }
    }

    #[test]
    fn observer_sees_every_step() {
        let p = ClosureProblem::with_jacobian(
            1,
            |u| u.clone(),
            |_| DMatrix::from_element(1, 1, 1.0),
        );
        let u0 = DVector::from_vec(vec![1.0]);
        let mut seen = Vec::new();
        let mut obs = |o: &StepObservation<'_>| seen.push((o.step_index, o.t));
        let tr = integrate(
            &p,
            &Stepper::ExprbEuler,
            &u0,
            0.0,
            1.0,
            0.25,
            &KrylovConfig::default(),
            Some(&mut obs),
        )
        .unwrap();
        assert_eq!(tr.steps(), 4);
        assert_eq!(seen.len(), 4);
        assert_eq!(seen[0], (1, 0.25));
        assert_eq!(seen[3].1, 1.0);
    }

    #[test]
    fn divergence_aborts_with_an_error() {
        // u' = u^2 from a huge start blows past f64 range almost at once.
        let p = ClosureProblem::with_jacobian(
            1,
            |u| DVector::from_vec(vec![u[0] * u[0]]),
            |u| DMatrix::from_element(1, 1, 2.0 * u[0]),
        );
        let u0 = DVector::from_vec(vec![1.0e154]);
        let out = integrate(
            &p,
            &Stepper::ExprbEuler,
            &u0,
            0.0,
            1.0,
            1.0,
            &KrylovConfig::default(),
            None,
        );
        assert!(out.is_err());
    }
}
