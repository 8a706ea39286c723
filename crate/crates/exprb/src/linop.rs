//! Matrix-free linear operators.
//!
//! Everything downstream of the dense kernels works through [`LinearOperator`]
//! so that structured Jacobians (block skew forms, spring Jacobians) never
//! have to be materialized. Implementations must behave linearly; sparsity
//! and caching live inside the implementation.

use nalgebra::{DMatrix, DVector};

/// The action `y = M x` of a (finite-dimensional) linear map.
pub trait LinearOperator {
    /// Dimension of the (square) operator.
    fn dim(&self) -> usize;

    /// Writes `M x` into `y`. Both vectors must have length [`dim`](Self::dim).
    fn apply_into(&self, x: &DVector<f64>, y: &mut DVector<f64>);

    /// Allocating convenience wrapper around [`apply_into`](Self::apply_into).
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.dim());
        self.apply_into(x, &mut y);
        y
    }
}

/// A dense matrix viewed as an operator.
pub struct DenseOperator {
    mat: DMatrix<f64>,
}

impl DenseOperator {
    /// Panics if `mat` is not square.
    pub fn new(mat: DMatrix<f64>) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "operator matrix must be square");
        Self { mat }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.mat.nrows()
    }

    fn apply_into(&self, x: &DVector<f64>, y: &mut DVector<f64>) {
        y.gemv(1.0, &self.mat, x, 0.0);
    }
}

/// `y = factor * (M x)`; used to form `h J` without copying the operator.
pub struct ScaledOperator<'a> {
    pub op: &'a dyn LinearOperator,
    pub factor: f64,
}

impl<'a> ScaledOperator<'a> {
    pub fn new(op: &'a dyn LinearOperator, factor: f64) -> Self {
        Self { op, factor }
    }
}

impl LinearOperator for ScaledOperator<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply_into(&self, x: &DVector<f64>, y: &mut DVector<f64>) {
        self.op.apply_into(x, y);
        *y *= self.factor;
    }
}

/// `y = x - shift * (M x)`; the implicit-Euler system matrix `I - h J`.
pub struct ShiftedOperator<'a> {
    pub op: &'a dyn LinearOperator,
    pub shift: f64,
}

impl<'a> ShiftedOperator<'a> {
    pub fn new(op: &'a dyn LinearOperator, shift: f64) -> Self {
        Self { op, shift }
    }
}

impl LinearOperator for ShiftedOperator<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply_into(&self, x: &DVector<f64>, y: &mut DVector<f64>) {
        self.op.apply_into(x, y);
        y.zip_apply(x, |yi, xi| *yi = xi - self.shift * *yi);
    }
}

/// Power-iteration estimate of the spectral norm of `op`.
///
/// Deterministic: the start vector is a fixed ramp. Good to a few percent
/// after the default 60 iterations, which is all the step-size heuristics
/// and diagnostics need.
pub fn spectral_norm_est(op: &dyn LinearOperator, iters: usize) -> f64 {
    let n = op.dim();
    if n == 0 {
        return 0.0;
    }
    let mut x = DVector::from_fn(n, |i, _| 1.0 + (i as f64) / (n as f64));
    let mut y = DVector::zeros(n);
    x /= x.norm();
    let mut est = 0.0;
    for _ in 0..iters.max(1) {
        op.apply_into(&x, &mut y);
        est = y.norm();
        if est == 0.0 {
            return 0.0;
        }
        x.copy_from(&y);
        x /= est;
    }
    est
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_operator_applies_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let op = DenseOperator::new(m);
        let x = DVector::from_vec(vec![1.0, 1.0]);
        let y = op.apply(&x);
        assert_eq!(y[0], 3.0);
        assert_eq!(y[1], 7.0);
    }

    #[test]
    fn scaled_and_shifted_operators() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let op = DenseOperator::new(m);
        let sc = ScaledOperator { op: &op, factor: 2.0 };
        let x = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(sc.apply(&x)[1], -2.0);
        let sh = ShiftedOperator { op: &op, shift: 0.5 };
        let y = sh.apply(&x);
        assert_eq!(y[0], 1.0);
        assert_eq!(y[1], 0.5);
    }

    #[test]
    fn spectral_norm_estimate_close_for_symmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -7.0]);
        let op = DenseOperator::new(m);
        let est = spectral_norm_est(&op, 100);
        assert!((est - 7.0).abs() < 1e-6, "est = {est}");
    }
}
