//! Symmetric positive definite matrices with a cached Cholesky factor.

use super::{check_finite, check_square};
use crate::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// Relative tolerance for the symmetry check at construction.
const SYMMETRY_RTOL: f64 = 1e-12;

/// An SPD matrix together with its Cholesky factorization.
///
/// The factor is computed once at construction and is immutable afterwards;
/// repeated solves (`Omega^{-1} v` inside Jacobian applications, state
/// conversions) cost two triangular substitutions each.
pub struct SpdMatrix {
    mat: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl SpdMatrix {
    /// Validates symmetry (to relative 1e-12) and positive definiteness
    /// (Cholesky must succeed).
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        check_square(&mat)?;
        check_finite(&mat, "SPD candidate")?;
        let scale = mat.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(f64::MIN_POSITIVE);
        for i in 0..mat.nrows() {
            for j in (i + 1)..mat.ncols() {
                let asym = (mat[(i, j)] - mat[(j, i)]).abs();
                if asym > SYMMETRY_RTOL * scale {
                    return Err(Error::NotSpd(format!(
                        "asymmetry {asym:.3e} at ({i},{j}) exceeds {SYMMETRY_RTOL:.0e} relative"
                    )));
                }
            }
        }
        let chol = Cholesky::new(mat.clone())
            .ok_or_else(|| Error::NotSpd("Cholesky factorization failed".into()))?;
        Ok(Self { mat, chol })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// `self * v`.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.mat * v
    }

    pub fn apply_into(&self, v: &DVector<f64>, out: &mut DVector<f64>) {
        out.gemv(1.0, &self.mat, v, 0.0);
    }

    /// `self^{-1} v` through the cached factor.
    pub fn solve(&self, v: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(v)
    }

    pub fn solve_in_place(&self, v: &mut DVector<f64>) {
        self.chol.solve_mut(v);
    }
}

/// Free-function form of [`SpdMatrix::solve`]: returns `m^{-1} v` using the
/// factorization cached in `m`.
pub fn spd_inverse_apply(m: &SpdMatrix, v: &DVector<f64>) -> DVector<f64> {
    m.solve(v)
}
