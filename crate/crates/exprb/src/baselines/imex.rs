//! First-order IMEX splitting: implicit Euler on the stiff skew block,
//! explicit Euler on the nonlinearity.
//!
//! Named "imex-splitting" everywhere to keep it distinct from the
//! variational IMEX integrators used in production solvers — this is the
//! plain Ascher-style splitting, present as a first-order comparison point.

use crate::matfunc::SpdMatrix;
use crate::oscillators::StiffFirstOrderForm;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// The splitting with its per-step-size factorization. Solving
/// `(I - h B) u = b` with `B (w1, w2) = (Omega w2, -Omega w1)` reduces by
/// block elimination to the SPD system `(I + h^2 A) u2 = b2 - h Omega b1`,
/// then `u1 = b1 + h Omega u2`; one Cholesky factorization serves every step.
pub struct ImexSplitting<'a> {
    form: &'a StiffFirstOrderForm,
    h: f64,
    solver: SpdMatrix,
}

impl<'a> ImexSplitting<'a> {
    pub fn new(form: &'a StiffFirstOrderForm, h: f64) -> Result<Self> {
        if !(h >= 0.0 && h.is_finite()) {
            return Err(Error::InvalidArg(format!(
                "step size must be nonnegative and finite, got {h}"
            )));
        }
        let d = form.half_dim();
        let shifted = DMatrix::identity(d, d) + (h * h) * form.assembled().a_matrix();
        let solver = SpdMatrix::new(shifted)?;
        Ok(Self { form, h, solver })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `u_next` from `(I - h B) u_next = u + h G(u)`.
    pub fn step(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        let d = self.form.half_dim();
        if u.len() != 2 * d {
            return Err(Error::Dimension(format!(
                "state length {} does not match form dimension {}",
                u.len(),
                2 * d
            )));
        }
        let h = self.h;
        // b = u + h G(u); G = (0, g(x, v))
        let (x, v) = self.form.xv_from_u(u);
        let mut b2 = u.rows(d, d).into_owned();
        b2.axpy(h, &self.form.assembled().g(&x, &v), 1.0);
        let b1 = u.rows(0, d).into_owned();

        let omega = self.form.omega();
        let mut rhs = b2;
        rhs.axpy(-h, &omega.apply(&b1), 1.0);
        let u2 = self.solver.solve(&rhs);
        let mut u1 = b1;
        u1.axpy(h, &omega.apply(&u2), 1.0);

        let mut out = DVector::zeros(2 * d);
        out.rows_mut(0, d).copy_from(&u1);
        out.rows_mut(d, d).copy_from(&u2);
        if !out.iter().all(|c| c.is_finite()) {
            return Err(Error::NonFinite("imex-splitting step produced a non-finite state".into()));
        }
        Ok(out)
    }
}

/// Single-shot convenience: factorizes, steps once.
pub fn imex_step(form: &StiffFirstOrderForm, u: &DVector<f64>, h: f64) -> Result<DVector<f64>> {
    ImexSplitting::new(form, h)?.step(u)
}
