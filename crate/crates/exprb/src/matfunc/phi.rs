//! The phi-functions of exponential integrators.
//!
//! `phi_0(z) = e^z` and `phi_{k+1}(z) = (phi_k(z) - 1/k!) / z`, with
//! `phi_k(0) = 1/k!`. Scheme weights are linear combinations of these
//! evaluated at `h J`.

use super::{check_finite, check_square, expm_dense, PHI_MAX_INDEX};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Radius below which the forward recursion loses accuracy (each division by
/// `z` amplifies the rounding error of the subtraction) and the Taylor series
/// of the target index is used instead. The series needs about a dozen terms
/// at the switch point.
const SERIES_RADIUS: f64 = 1.0;

fn factorial(k: usize) -> f64 {
    let mut f = 1.0f64;
    for i in 2..=k {
        f *= i as f64;
    }
    f
}

/// Direct Taylor evaluation of `phi_k(z) = sum_j z^j / (k + j)!`.
fn phi_series(k: usize, z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0 / factorial(k), 0.0);
    let mut sum = term;
    for j in 1..=64 {
        term = term * z / ((k + j) as f64);
        sum += term;
        if term.norm() <= f64::EPSILON * sum.norm() {
            break;
        }
    }
    sum
}

fn phi_complex(k: usize, z: Complex64) -> Complex64 {
    assert!(k <= PHI_MAX_INDEX, "phi index {k} out of range");
    if k == 0 {
        return z.exp();
    }
    if z.norm() < SERIES_RADIUS {
        return phi_series(k, z);
    }
    // Forward recursion from e^z; stable for |z| >= 1.
    let mut phi = z.exp();
    for j in 0..k {
        phi = (phi - 1.0 / factorial(j)) / z;
    }
    phi
}

/// Scalar `phi_k(z)` for real `z`. Supports `k <= 9`.
pub fn phi_scalar(k: usize, z: f64) -> f64 {
    phi_complex(k, Complex64::new(z, 0.0)).re
}

/// Scalar `phi_k(z)` for complex `z`. Supports `k <= 9`.
pub fn phi_scalar_complex(k: usize, z: Complex64) -> Complex64 {
    phi_complex(k, z)
}

/// All of `phi_1(Z) .. phi_p(Z)` from a single exponential of the augmented
/// block matrix
///
/// ```text
///   [ Z  I  0 ... 0 ]
///   [ 0  0  I ... 0 ]
///   [ ...        I  ]
///   [ 0  0  0 ... 0 ]
/// ```
///
/// whose exponential carries `phi_j(Z)` in the top block row, column block
/// `j`. One dense exponential of size `n (p + 1)` yields every index.
pub fn phi_dense(p: usize, z: &DMatrix<f64>) -> Result<Vec<DMatrix<f64>>> {
    check_square(z)?;
    check_finite(z, "phi operand")?;
    if p == 0 {
        return Ok(Vec::new());
    }
    if p > PHI_MAX_INDEX {
        return Err(Error::InvalidArg(format!("phi index {p} exceeds {PHI_MAX_INDEX}")));
    }
    let n = z.nrows();
    let big = n * (p + 1);
    let mut s = DMatrix::zeros(big, big);
    s.view_mut((0, 0), (n, n)).copy_from(z);
    for blk in 0..p {
        s.view_mut((blk * n, (blk + 1) * n), (n, n))
            .copy_from(&DMatrix::identity(n, n));
    }
    let e = expm_dense(&s)?;
    let mut out = Vec::with_capacity(p);
    for j in 1..=p {
        out.push(e.view((0, j * n), (n, n)).into_owned());
    }
    Ok(out)
}

/// Dense reference evaluation of `phi_0(Z) v_0 + phi_1(Z) v_1 + ... +
/// phi_p(Z) v_p` with `p = vectors.len() - 1`.
///
/// Quadratic storage and cubic time; used as the oracle that the Krylov
/// evaluator is checked against, and for small exact-flow comparisons.
pub fn phi_apply_dense(z: &DMatrix<f64>, vectors: &[DVector<f64>]) -> Result<DVector<f64>> {
    check_square(z)?;
    if vectors.is_empty() {
        return Err(Error::InvalidArg("phi combination needs at least v_0".into()));
    }
    let n = z.nrows();
    for (k, v) in vectors.iter().enumerate() {
        if v.len() != n {
            return Err(Error::Dimension(format!(
                "v_{k} has length {} but the operator has dimension {n}",
                v.len()
            )));
        }
    }
    let p = vectors.len() - 1;
    let mut acc = expm_dense(z)? * &vectors[0];
    if p > 0 {
        let phis = phi_dense(p, z)?;
        for k in 1..=p {
            acc += &phis[k - 1] * &vectors[k];
        }
    }
    Ok(acc)
}
