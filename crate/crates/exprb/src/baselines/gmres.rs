//! Restarted GMRES with modified Gram–Schmidt and Givens rotations.
//!
//! The implicit-Euler baseline solves `(I - h J) delta = -G(w)` matrix-free;
//! the Jacobian is only available as an action, and it is not symmetric, so
//! GMRES is the natural inner solver. Full orthogonalization within a cycle,
//! restart after `restart` basis vectors.

use crate::linop::LinearOperator;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct GmresConfig {
    /// Relative residual target `|b - A x| <= tol |b|`.
    pub tol: f64,
    /// Krylov dimension per cycle.
    pub restart: usize,
    /// Total operator applications across cycles.
    pub max_matvecs: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self { tol: 1e-12, restart: 50, max_matvecs: 500 }
    }
}

#[derive(Debug)]
pub struct GmresOutcome {
    pub x: DVector<f64>,
    pub matvecs: usize,
    /// Achieved relative residual.
    pub residual: f64,
}

/// Solves `A x = b` from a zero initial guess.
pub fn gmres(op: &dyn LinearOperator, b: &DVector<f64>, cfg: &GmresConfig) -> Result<GmresOutcome> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::Dimension(format!(
            "rhs length {} does not match operator dimension {n}",
            b.len()
        )));
    }
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) || cfg.restart == 0 || cfg.max_matvecs == 0 {
        return Err(Error::InvalidArg("gmres needs tol > 0, restart >= 1, max_matvecs >= 1".into()));
    }
    let bnorm = b.norm();
    if bnorm == 0.0 {
        return Ok(GmresOutcome { x: DVector::zeros(n), matvecs: 0, residual: 0.0 });
    }

    let m = cfg.restart;
    let mut x = DVector::zeros(n);
    let mut matvecs = 0usize;
    let mut rel = f64::INFINITY;

    while matvecs < cfg.max_matvecs {
        let r = b - op.apply(&x);
        matvecs += 1;
        let beta = r.norm();
        rel = beta / bnorm;
        if !rel.is_finite() {
            return Err(Error::NonFinite("gmres residual".into()));
        }
        if rel <= cfg.tol {
            return Ok(GmresOutcome { x, matvecs, residual: rel });
        }

        let mut basis: Vec<DVector<f64>> = vec![r / beta];
        let mut hess = DMatrix::zeros(m + 1, m);
        let mut g = DVector::zeros(m + 1);
        g[0] = beta;
        let mut cs = vec![0.0f64; m];
        let mut sn = vec![0.0f64; m];
        let mut k = 0usize;

        for j in 0..m {
            if matvecs >= cfg.max_matvecs {
                break;
            }
            let mut w = op.apply(&basis[j]);
            matvecs += 1;
            for (i, v) in basis.iter().enumerate() {
                let hij = w.dot(v);
                hess[(i, j)] = hij;
                w.axpy(-hij, v, 1.0);
            }
            let hnext = w.norm();
            hess[(j + 1, j)] = hnext;

            // previously accumulated rotations, then a new one for this column
            for i in 0..j {
                let (hi, hi1) = (hess[(i, j)], hess[(i + 1, j)]);
                hess[(i, j)] = cs[i] * hi + sn[i] * hi1;
                hess[(i + 1, j)] = -sn[i] * hi + cs[i] * hi1;
            }
            let denom = hess[(j, j)].hypot(hess[(j + 1, j)]);
            if denom == 0.0 {
                // column vanished entirely; nothing more in this subspace
                k = j;
                break;
            }
            cs[j] = hess[(j, j)] / denom;
            sn[j] = hess[(j + 1, j)] / denom;
            hess[(j, j)] = denom;
            hess[(j + 1, j)] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            k = j + 1;

            let breakdown = hnext <= 1e-14 * bnorm;
            if g[j + 1].abs() / bnorm <= cfg.tol || breakdown {
                break;
            }
            basis.push(w / hnext);
        }

        if k > 0 {
            // back-substitution on the rotated (upper triangular) Hessenberg
            let mut y = DVector::zeros(k);
            for i in (0..k).rev() {
                let mut s = g[i];
                for l in (i + 1)..k {
                    s -= hess[(i, l)] * y[l];
                }
                y[i] = s / hess[(i, i)];
            }
            for (i, v) in basis.iter().take(k).enumerate() {
                x.axpy(y[i], v, 1.0);
            }
        } else {
            break;
        }
    }

    let r = b - op.apply(&x);
    rel = rel.min(r.norm() / bnorm);
    if rel <= cfg.tol {
        return Ok(GmresOutcome { x, matvecs, residual: rel });
    }
    Err(Error::LinearSolve(format!(
        "gmres stalled at relative residual {rel:.3e} after {matvecs} operator applications \
         (target {:.1e})",
        cfg.tol
    )))
}
