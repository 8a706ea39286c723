//! Arnoldi process with depth-2 incomplete orthogonalization (IOM2).
//!
//! Each new direction `M v_j` is orthogonalized against only the two most
//! recent basis vectors. The Hessenberg recurrence
//! `M V_m = V_m H_m + h_{m+1,m} v_{m+1} e_m^T` still holds to rounding, which
//! is what the projected phi-evaluation relies on; orthogonality of the
//! basis is only approximate, and its drift can be surfaced through
//! [`KrylovBasis::ortho_defect`].

use super::stats::KrylovStats;
use crate::linop::LinearOperator;
use nalgebra::{DMatrix, DVector};

/// Happy-breakdown threshold relative to the norm of the start vector.
pub const BREAKDOWN_RTOL: f64 = 1e-14;

/// A partially built Krylov basis for `(M, b)`.
pub struct KrylovBasis {
    /// Basis vectors; `v.len() == m`, plus one trailing residual direction
    /// when no breakdown occurred.
    v: Vec<DVector<f64>>,
    /// Hessenberg entries, `(m_alloc + 1) x m_alloc`, filled up to column m.
    h: DMatrix<f64>,
    /// Columns built so far.
    m: usize,
    /// Norm of the start vector.
    beta: f64,
    /// Set when the residual vanished and the subspace is invariant.
    breakdown: bool,
}

impl KrylovBasis {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn breakdown(&self) -> bool {
        self.breakdown
    }

    /// The `m x m` Hessenberg block.
    pub fn hessenberg(&self) -> nalgebra::DMatrixView<'_, f64> {
        self.h.view((0, 0), (self.m, self.m))
    }

    /// The residual coupling `h_{m+1,m}` (zero after breakdown).
    pub fn h_next(&self) -> f64 {
        if self.breakdown || self.m == 0 {
            0.0
        } else {
            self.h[(self.m, self.m - 1)]
        }
    }

    pub fn basis_vector(&self, j: usize) -> &DVector<f64> {
        &self.v[j]
    }

    /// `beta * V_m y` for a small coefficient vector `y` of length `m`.
    pub fn lift(&self, y: &DVector<f64>) -> DVector<f64> {
        let n = self.v[0].len();
        let mut out = DVector::zeros(n);
        for j in 0..self.m {
            out.axpy(self.beta * y[j], &self.v[j], 1.0);
        }
        out
    }

    /// Worst deviation of `V_m^T V_m` from the identity.
    pub fn ortho_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.m {
            for j in i..self.m {
                let d = self.v[i].dot(&self.v[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((d - target).abs());
            }
        }
        worst
    }

    /// Grows the basis to `m_target` columns (no-op after breakdown).
    pub fn extend(&mut self, op: &dyn LinearOperator, m_target: usize, stats: &mut KrylovStats) {
        let m_target = m_target.min(self.h.ncols());
        while self.m < m_target && !self.breakdown {
            let j = self.m;
            let mut w = op.apply(&self.v[j]);
            stats.matvecs += 1;
            stats.basis_matvecs += 1;
            // Depth-2 orthogonalization: the two most recent vectors.
            let lo = j.saturating_sub(1);
            for i in lo..=j {
                let hij = self.v[i].dot(&w);
                self.h[(i, j)] = hij;
                w.axpy(-hij, &self.v[i], 1.0);
            }
            let nrm = w.norm();
            self.m = j + 1;
            if nrm <= BREAKDOWN_RTOL * self.beta {
                self.h[(j + 1, j)] = 0.0;
                self.breakdown = true;
            } else {
                self.h[(j + 1, j)] = nrm;
                w /= nrm;
                self.v.push(w);
            }
        }
    }
}

/// Builds an IOM2 basis of dimension (at most) `m` for `(op, b)`.
///
/// `b` must be nonzero. `m_alloc` bounds how far the basis may later be
/// extended; Hessenberg storage is allocated for it up front.
pub fn iom2_arnoldi(
    op: &dyn LinearOperator,
    b: &DVector<f64>,
    m: usize,
    m_alloc: usize,
    stats: &mut KrylovStats,
) -> KrylovBasis {
    let beta = b.norm();
    assert!(beta > 0.0, "Krylov start vector must be nonzero");
    let m_alloc = m_alloc.max(m).max(1);
    let mut basis = KrylovBasis {
        v: vec![b / beta],
        h: DMatrix::zeros(m_alloc + 1, m_alloc),
        m: 0,
        beta,
        breakdown: false,
    };
    basis.extend(op, m, stats);
    basis
}
