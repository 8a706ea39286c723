//! Stepper-level oracles: each dedicated stepper against a naive dense
//! transcription of its formulas, and one-step convergence orders against a
//! closed-form flow.

use exprb::integrators::{
    step_exprb42, step_exprb_euler, step_pexprb43, LinearizationFrame, SemilinearProblem,
    Stepper,
};
use exprb::integrators::ClosureProblem;
use exprb::krylov::KrylovConfig;
use exprb::matfunc::phi_dense;
use exprb::samples;
use nalgebra::{DMatrix, DVector};

/// Mildly nonlinear test problem: F(u) = A u + eps * u .* u.
fn quadratic_problem(n: usize, seed: u64) -> (ClosureProblem, DMatrix<f64>, DVector<f64>) {
    let mut rng = samples::seeded(seed);
    let a = samples::random_stable(&mut rng, n, 3.0);
    let u0 = samples::random_vector(&mut rng, n);
    let eps = 0.3;
    let a1 = a.clone();
    let a2 = a.clone();
    let p = ClosureProblem::with_jacobian(
        n,
        move |u| &a1 * u + eps * u.component_mul(u),
        move |u| &a2 + DMatrix::from_diagonal(&(2.0 * eps * u)),
    );
    (p, a, u0)
}

fn remainder(p: &dyn SemilinearProblem, j: &DMatrix<f64>, u_n: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
    p.rhs(u) - p.rhs(u_n) - j * (u - u_n)
}

#[test]
fn exprb42_matches_a_naive_dense_transcription() {
    let n = 10;
    let (p, a, u0) = quadratic_problem(n, 901);
    let frame = LinearizationFrame::linearize(&p, &u0).unwrap();
    let cfg = KrylovConfig::with_tol(1e-13);
    let h = 0.2;
    let r = step_exprb42(&frame, h, &cfg).unwrap();

    // the long way: separate dense phi matrices per node, stages spelled out
    let j = &a + DMatrix::from_diagonal(&(0.6 * &u0));
    let f0 = p.rhs(&u0);
    let phi_half = phi_dense(1, &(&j * (0.75 * h))).unwrap();
    let phi_full = phi_dense(3, &(&j * h)).unwrap();
    let u2 = &u0 + 0.75 * h * (&phi_half[0] * &f0);
    let d2 = remainder(&p, &j, &u0, &u2);
    let want = &u0 + h * (&phi_full[0] * &f0) + (32.0 / 9.0) * h * (&phi_full[2] * &d2);

    let rel = (&r.u_next - &want).norm() / want.norm();
    assert!(rel <= 1e-9, "exprb42 vs dense transcription: {rel:.3e}");
    let stage_rel = (&r.stages[0] - &u2).norm() / u2.norm();
    assert!(stage_rel <= 1e-9, "stage: {stage_rel:.3e}");
}

#[test]
fn pexprb43_matches_a_naive_dense_transcription() {
    let n = 10;
    let (p, a, u0) = quadratic_problem(n, 902);
    let frame = LinearizationFrame::linearize(&p, &u0).unwrap();
    let cfg = KrylovConfig::with_tol(1e-13);
    let h = 0.2;
    let r = step_pexprb43(&frame, h, &cfg).unwrap();

    let j = &a + DMatrix::from_diagonal(&(0.6 * &u0));
    let f0 = p.rhs(&u0);
    let phi_half = phi_dense(1, &(&j * (0.5 * h))).unwrap();
    let phi_full = phi_dense(4, &(&j * h)).unwrap();
    let u2 = &u0 + 0.5 * h * (&phi_half[0] * &f0);
    let u3 = &u0 + h * (&phi_full[0] * &f0);
    let d2 = remainder(&p, &j, &u0, &u2);
    let d3 = remainder(&p, &j, &u0, &u3);
    let want = &u3
        + h * (&phi_full[2] * &(16.0 * &d2 - 2.0 * &d3))
        + h * (&phi_full[3] * &(-48.0 * &d2 + 12.0 * &d3));

    let rel = (&r.u_next - &want).norm() / want.norm();
    assert!(rel <= 1e-9, "pexprb43 vs dense transcription: {rel:.3e}");
    for (got, oracle) in r.stages.iter().zip([&u2, &u3]) {
        let s = (got - oracle).norm() / oracle.norm();
        assert!(s <= 1e-9, "stage: {s:.3e}");
    }
}

/// Least-squares slope of ln(err) against ln(h).
fn fit_slope(hs: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
    let ybar = ys.iter().sum::<f64>() / ys.len() as f64;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let den: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    num / den
}

/// One-step errors on the logistic equation u' = u(1 - u), whose flow is
/// closed-form: u(t) = 1 / (1 + (1/u0 - 1) e^{-t}).
fn one_step_errors(stepper: &Stepper, hs: &[f64]) -> Vec<f64> {
    let p = ClosureProblem::with_jacobian(
        1,
        |u| DVector::from_element(1, u[0] * (1.0 - u[0])),
        |u| DMatrix::from_element(1, 1, 1.0 - 2.0 * u[0]),
    );
    let u0 = 0.2;
    let frame = LinearizationFrame::linearize(&p, &DVector::from_element(1, u0)).unwrap();
    let cfg = KrylovConfig::with_tol(1e-14);
    hs.iter()
        .map(|&h| {
            let r = stepper.step(&frame, h, &cfg).unwrap();
            let exact = 1.0 / (1.0 + (1.0 / u0 - 1.0) * (-h).exp());
            (r.u_next[0] - exact).abs()
        })
        .collect()
}

#[test]
fn one_step_error_orders_on_a_closed_form_flow() {
    // local error exponents: second-order euler -> 3, fourth-order -> 5;
    // h grids sized so the smallest errors stay well above roundoff
    let euler_h = [0.16, 0.11, 0.08, 0.055, 0.04];
    let errs = one_step_errors(&Stepper::ExprbEuler, &euler_h);
    let slope = fit_slope(&euler_h, &errs);
    assert!((2.7..=3.4).contains(&slope), "euler local slope {slope:.3}");

    let h4 = [0.4, 0.3, 0.22, 0.16, 0.12];
    for stepper in [Stepper::Exprb42, Stepper::Pexprb43] {
        let errs = one_step_errors(&stepper, &h4);
        assert!(
            errs.iter().all(|&e| e > 1e-13),
            "{}: errors too close to roundoff for a slope fit: {errs:?}",
            stepper.name()
        );
        let slope = fit_slope(&h4, &errs);
        assert!(
            (4.6..=5.6).contains(&slope),
            "{} local slope {slope:.3} (errors {errs:?})",
            stepper.name()
        );
    }
}

#[test]
fn euler_step_is_rosenbrock_not_forward_euler() {
    // on a stiff linear problem the exponential Euler step stays bounded
    // where forward Euler at the same h would overshoot by orders of
    // magnitude; this pins down that phi_1 really multiplies the increment
    let lam = -2000.0;
    let p = ClosureProblem::with_jacobian(
        1,
        move |u| DVector::from_element(1, lam * u[0]),
        move |_| DMatrix::from_element(1, 1, lam),
    );
    let u0 = DVector::from_element(1, 1.0);
    let frame = LinearizationFrame::linearize(&p, &u0).unwrap();
    let h = 0.1; // h*lam = -200, far outside the forward-Euler disk
    let r = step_exprb_euler(&frame, h, &KrylovConfig::with_tol(1e-12)).unwrap();
    let exact = (lam * h).exp();
    assert!((r.u_next[0] - exact).abs() <= 1e-12, "got {}", r.u_next[0]);
    let forward = 1.0 + h * lam;
    assert!(forward.abs() > 100.0, "sanity: forward Euler really diverges here");
}
