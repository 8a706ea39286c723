//! Dense matrix exponential by scaling-and-squaring.

use super::{check_finite, check_square, one_norm};
use crate::{Error, Result};
use nalgebra::DMatrix;

/// Numerator coefficients of the degree-13 diagonal rational approximant to
/// `exp` (the denominator uses the same coefficients with alternating signs).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Norm threshold below which the degree-13 approximant is full accuracy.
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential `e^Z` of a square matrix.
///
/// Uses one fixed degree-13 diagonal rational approximant after scaling
/// `Z / 2^s` to norm at most [`THETA13`], then squares `s` times. Intended
/// for moderate norms (the evaluator feeds it projected matrices with norm
/// up to a few tens; the reference path takes norms up to ~1e4, which costs
/// about 14 squarings).
pub fn expm_dense(z: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_square(z)?;
    check_finite(z, "expm operand")?;
    let n = z.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }

    let norm = one_norm(z);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as u32
    } else {
        0
    };
    let a = z / 2f64.powi(s as i32);

    let id = DMatrix::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;

    let b = &PADE13;
    let u_inner = &a6 * (b[13] * &a6 + b[11] * &a4 + b[9] * &a2)
        + b[7] * &a6
        + b[5] * &a4
        + b[3] * &a2
        + b[1] * &id;
    let u = &a * u_inner;
    let v = &a6 * (b[12] * &a6 + b[10] * &a4 + b[8] * &a2)
        + b[6] * &a6
        + b[4] * &a4
        + b[2] * &a2
        + b[0] * &id;

    let denom = &v - &u;
    let numer = &v + &u;
    let lu = denom.lu();
    let mut f = lu
        .solve(&numer)
        .ok_or_else(|| Error::LinearSolve("singular denominator in expm".into()))?;

    for _ in 0..s {
        f = &f * &f;
    }
    check_finite(&f, "expm result")?;
    Ok(f)
}
