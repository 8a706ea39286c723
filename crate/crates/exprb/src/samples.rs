//! Seeded random matrices and vectors for tests and benches.
//!
//! Everything here is deterministic given the seed. Spectra are kept in the
//! closed left half-plane so matrix exponentials stay bounded; "stiff" then
//! means a large norm, not unstable growth.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The project-wide seeded generator.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

/// Haar-ish random orthogonal matrix via QR with the sign convention that
/// makes the factorization unique (diagonal of R nonnegative).
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let qr = a.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Symmetric negative semidefinite matrix with spectral norm `norm`.
pub fn random_symmetric_stable(rng: &mut ChaCha8Rng, n: usize, norm: f64) -> DMatrix<f64> {
    let q = random_orthogonal(rng, n);
    let mut eigs = DVector::from_fn(n, |_, _| -norm * rng.gen_range(0.0..1.0));
    eigs[0] = -norm;
    &q * DMatrix::from_diagonal(&eigs) * q.transpose()
}

/// Symmetric positive definite matrix with condition number `cond` and
/// largest eigenvalue `norm`.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, cond: f64, norm: f64) -> DMatrix<f64> {
    assert!(cond >= 1.0 && norm > 0.0);
    let q = random_orthogonal(rng, n);
    let lo = norm / cond;
    let mut eigs = DVector::from_fn(n, |_, _| {
        // Log-uniform between the extremes so small eigenvalues show up.
        lo * (norm / lo).powf(rng.gen_range(0.0..1.0))
    });
    eigs[0] = norm;
    if n > 1 {
        eigs[1] = lo;
    }
    let m = &q * DMatrix::from_diagonal(&eigs) * q.transpose();
    // Symmetrize away the O(eps) asymmetry from the two products.
    0.5 * (&m + m.transpose())
}

/// Skew-symmetric matrix with spectral norm `norm` (rotation blocks
/// conjugated by a random orthogonal matrix; odd dimension leaves one zero
/// eigenvalue).
pub fn random_skew(rng: &mut ChaCha8Rng, n: usize, norm: f64) -> DMatrix<f64> {
    let q = random_orthogonal(rng, n);
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n / 2 {
        let w = if i == 0 { norm } else { norm * rng.gen_range(0.0..1.0) };
        b[(2 * i, 2 * i + 1)] = w;
        b[(2 * i + 1, 2 * i)] = -w;
    }
    let m = &q * b * q.transpose();
    0.5 * (&m - m.transpose())
}

/// Nonsymmetric stable matrix: dominant skew part of norm `norm`, a modest
/// negative symmetric part, plus a small general perturbation whose absolute
/// size is capped so the log-norm stays ~O(1) and exponentials stay bounded
/// even for very stiff draws.
pub fn random_stable(rng: &mut ChaCha8Rng, n: usize, norm: f64) -> DMatrix<f64> {
    let skew = random_skew(rng, n, norm);
    let sym = random_symmetric_stable(rng, n, 0.3 * norm);
    let eps = 2.0 / n as f64;
    let g = DMatrix::from_fn(n, n, |_, _| eps * rng.gen_range(-1.0..1.0));
    skew + sym + g
}
