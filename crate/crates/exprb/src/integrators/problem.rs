//! Problem abstraction and per-step linearization.

use crate::linop::{DenseOperator, LinearOperator};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// An autonomous ODE `u' = F(u)` with a consistent linearization.
///
/// `jacobian_at` must return an operator whose action matches directional
/// finite differences of `F` to O(epsilon); it may borrow the problem but
/// must own anything derived from the linearization state.
pub trait SemilinearProblem {
    fn dim(&self) -> usize;

    /// The full right-hand side `F(u)`.
    fn rhs(&self, u: &DVector<f64>) -> DVector<f64>;

    /// The Jacobian `F'(u)` as a linear operator.
    fn jacobian_at(&self, u: &DVector<f64>) -> Box<dyn LinearOperator + '_>;
}

/// Matrix-free forward-difference Jacobian action at a fixed state:
/// `J w ~ (F(u + d w/|w|) - F(u)) |w|/d` with `d = sqrt(eps) (1 + |u|)`.
pub struct FdJacobian<F> {
    f: F,
    u: DVector<f64>,
    fu: DVector<f64>,
    delta: f64,
}

impl<F: Fn(&DVector<f64>) -> DVector<f64>> FdJacobian<F> {
    pub fn new(f: F, u: DVector<f64>) -> Self {
        let fu = f(&u);
        let delta = f64::EPSILON.sqrt() * (1.0 + u.norm());
        Self { f, u, fu, delta }
    }
}

impl<F: Fn(&DVector<f64>) -> DVector<f64>> LinearOperator for FdJacobian<F> {
    fn dim(&self) -> usize {
        self.u.len()
    }

    fn apply_into(&self, x: &DVector<f64>, y: &mut DVector<f64>) {
        let nx = x.norm();
        if nx == 0.0 {
            y.fill(0.0);
            return;
        }
        let step = self.delta / nx;
        let shifted = &self.u + x * step;
        let fs = (self.f)(&shifted);
        let scale = nx / self.delta;
        for i in 0..y.len() {
            y[i] = (fs[i] - self.fu[i]) * scale;
        }
    }
}

/// Convenience constructor for the finite-difference Jacobian of a problem.
pub fn fd_jacobian<'a>(
    problem: &'a dyn SemilinearProblem,
    u: &DVector<f64>,
) -> impl LinearOperator + 'a {
    FdJacobian::new(move |x: &DVector<f64>| problem.rhs(x), u.clone())
}

/// A problem defined by closures; the Jacobian is either supplied as a dense
/// matrix function or falls back to finite differences. Meant for tests and
/// small studies.
pub struct ClosureProblem {
    dim: usize,
    f: Box<dyn Fn(&DVector<f64>) -> DVector<f64>>,
    jac: Option<Box<dyn Fn(&DVector<f64>) -> DMatrix<f64>>>,
}

impl ClosureProblem {
    pub fn new(dim: usize, f: impl Fn(&DVector<f64>) -> DVector<f64> + 'static) -> Self {
        Self { dim, f: Box::new(f), jac: None }
    }

    pub fn with_jacobian(
        dim: usize,
        f: impl Fn(&DVector<f64>) -> DVector<f64> + 'static,
        jac: impl Fn(&DVector<f64>) -> DMatrix<f64> + 'static,
    ) -> Self {
        Self { dim, f: Box::new(f), jac: Some(Box::new(jac)) }
    }
}

impl SemilinearProblem for ClosureProblem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&self, u: &DVector<f64>) -> DVector<f64> {
        (self.f)(u)
    }

    fn jacobian_at(&self, u: &DVector<f64>) -> Box<dyn LinearOperator + '_> {
        match &self.jac {
            Some(jac) => Box::new(DenseOperator::new(jac(u))),
            None => Box::new(FdJacobian::new(|x: &DVector<f64>| (self.f)(x), u.clone())),
        }
    }
}

/// One step's frozen linearization: the state `u_n`, the cached `F(u_n)`,
/// the Jacobian `J_n`, and the remainder map `g_n(u) = F(u) - J_n u`.
pub struct LinearizationFrame<'p> {
    problem: &'p dyn SemilinearProblem,
    u: DVector<f64>,
    fu: DVector<f64>,
    jac: Box<dyn LinearOperator + 'p>,
}

impl<'p> LinearizationFrame<'p> {
    pub fn linearize(problem: &'p dyn SemilinearProblem, u_n: &DVector<f64>) -> Result<Self> {
        if u_n.len() != problem.dim() {
            return Err(Error::Dimension(format!(
                "state length {} does not match problem dimension {}",
                u_n.len(),
                problem.dim()
            )));
        }
        if u_n.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("linearization state contains NaN/inf".into()));
        }
        let fu = problem.rhs(u_n);
        if fu.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("F(u_n) contains NaN/inf".into()));
        }
        let jac = problem.jacobian_at(u_n);
        Ok(Self { problem, u: u_n.clone(), fu, jac })
    }

    pub fn state(&self) -> &DVector<f64> {
        &self.u
    }

    /// Cached `F(u_n)`.
    pub fn rhs_at_state(&self) -> &DVector<f64> {
        &self.fu
    }

    pub fn jacobian(&self) -> &dyn LinearOperator {
        self.jac.as_ref()
    }

    /// The remainder `g_n(u) = F(u) - J_n u`.
    pub fn g(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut out = self.problem.rhs(u);
        let ju = self.jac.apply(u);
        out -= ju;
        out
    }

    /// `D = g_n(stage) - g_n(u_n) = F(stage) - F(u_n) - J_n (stage - u_n)`,
    /// formed from the difference directly so the two large `J u` terms never
    /// appear separately.
    pub fn remainder_diff(&self, stage: &DVector<f64>) -> DVector<f64> {
        let mut d = self.problem.rhs(stage);
        d -= &self.fu;
        let diff = stage - &self.u;
        d -= self.jac.apply(&diff);
        d
    }
}
