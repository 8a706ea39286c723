//! Dense matrix functions: exponential, phi-functions, SPD square roots.
//!
//! These kernels are the reference path of the crate. They are meant for the
//! moderate dimensions that show up in scene assembly and in the small
//! projected systems of the Krylov evaluator (a few hundred rows), not for
//! large sparse operators.

mod expm;
mod phi;
mod spd;
mod sqrtm;

pub use expm::expm_dense;
pub use phi::{phi_apply_dense, phi_dense, phi_scalar, phi_scalar_complex};
pub use spd::{spd_inverse_apply, SpdMatrix};
pub use sqrtm::{sqrtm_newton, sqrtm_newton_traced, sqrtm_schur, NewtonSqrtTrace};

use crate::{Error, Result};
use nalgebra::DMatrix;

/// Largest phi index the crate supports (schemes use up to phi_5; the
/// evaluator's error estimate needs one more on top of p <= 8).
pub const PHI_MAX_INDEX: usize = 9;

pub(crate) fn check_square(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(())
}

pub(crate) fn check_finite(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("{what} contains NaN or infinity")));
    }
    Ok(())
}

/// Maximum column sum; the norm used to pick the exponential scaling.
pub(crate) fn one_norm(m: &DMatrix<f64>) -> f64 {
    let mut best = 0.0f64;
    for c in m.column_iter() {
        let s: f64 = c.iter().map(|x| x.abs()).sum();
        best = best.max(s);
    }
    best
}
