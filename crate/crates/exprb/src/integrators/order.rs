//! Stiff order-condition verifier.
//!
//! For a scheme with nodes `c_i` and weights `b_i`, the four conditions are
//!
//! 1. `sum b_i(Z) c_i^2 = 2 phi_3(Z)`            (order 3)
//! 2. `sum b_i(Z) c_i^3 = 6 phi_4(Z)`            (order 4)
//! 3. `sum b_i(Z) c_i^4 = 24 phi_5(Z)`           (order 5)
//! 4. `sum b_i(Z) c_i K psi_{3,i}(Z) = 0`        (order 5)
//!
//! with `psi_{3,i}(z) = sum_{k=2}^{i-1} a_ik(z) c_k^2/2 - c_i^3 phi_3(c_i z)`
//! and arbitrary square matrices `Z`, `K`. The sums run over the interior
//! stages. The verifier evaluates everything densely and returns the four
//! Frobenius residuals; a scheme of stiff order q makes the first q-2
//! residuals vanish.

use super::scheme::{PhiPoly, SchemeSpec};
use crate::matfunc::phi_dense;
use crate::{Error, Result};
use nalgebra::DMatrix;

fn eval_poly(poly: &PhiPoly, phis: &[DMatrix<f64>], n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, n);
    for &(k, coeff) in poly.terms() {
        out += &phis[k - 1] * coeff;
    }
    out
}

/// Frobenius residuals of the four stiff order conditions at (`z`, `k`).
pub fn verify_order_conditions(
    scheme: &SchemeSpec,
    z: &DMatrix<f64>,
    k: &DMatrix<f64>,
) -> Result<Vec<f64>> {
    if z.nrows() != z.ncols() {
        return Err(Error::NotSquare { rows: z.nrows(), cols: z.ncols() });
    }
    if k.shape() != z.shape() {
        return Err(Error::Dimension(format!(
            "K is {:?} but Z is {:?}",
            k.shape(),
            z.shape()
        )));
    }
    let n = z.nrows();
    let phis = phi_dense(5, z)?;
    let nodes = scheme.nodes();
    let extra = nodes.len();
    let b: Vec<DMatrix<f64>> =
        (0..extra).map(|i| eval_poly(scheme.b_weight(i), &phis, n)).collect();

    let mut r1 = -2.0 * &phis[2];
    let mut r2 = -6.0 * &phis[3];
    let mut r3 = -24.0 * &phis[4];
    let mut r4 = DMatrix::zeros(n, n);
    for i in 0..extra {
        let c = nodes[i];
        r1 += &b[i] * (c * c);
        r2 += &b[i] * (c * c * c);
        r3 += &b[i] * (c * c * c * c);

        // psi_{3,i}: the a-row contributes at the unscaled argument, the
        // phi_3 term at the stage's own node.
        let phi3_ci = phi_dense(3, &(z * c))?.pop().expect("phi_3 present");
        let mut psi = phi3_ci * (-c * c * c);
        for (kk, poly) in scheme.a_row(i).iter().enumerate() {
            let ck = nodes[kk];
            psi += eval_poly(poly, &phis, n) * (ck * ck / 2.0);
        }
        r4 += &b[i] * c * k * psi;
    }
    Ok(vec![r1.norm(), r2.norm(), r3.norm(), r4.norm()])
}
