//! Instrumentation for the Krylov evaluator.

/// Counters collected across one evaluator call (or merged across the calls
/// of an integration step / whole run).
#[derive(Clone, Debug, Default)]
pub struct KrylovStats {
    /// Accepted substeps.
    pub substeps: usize,
    /// Krylov dimension used by each accepted substep (0 for substeps whose
    /// phi-term vanished and needed no subspace at all).
    pub dims: Vec<usize>,
    /// Total operator applications.
    pub matvecs: usize,
    /// Portion of `matvecs` spent building bases.
    pub basis_matvecs: usize,
    /// Portion of `matvecs` spent in the substep recurrence.
    pub recurrence_matvecs: usize,
    /// Recurrence applications skipped because the operand was exactly zero.
    pub skipped_matvecs: usize,
    /// Rejected substep attempts.
    pub rejections: usize,
    /// Worst basis orthogonality defect seen, if tracking was enabled.
    /// Depth-2 orthogonalization lets the basis drift; this surfaces the
    /// drift instead of silently trusting the projection.
    pub max_ortho_defect: Option<f64>,
}

impl KrylovStats {
    pub fn merge(&mut self, other: &KrylovStats) {
        self.substeps += other.substeps;
        self.dims.extend_from_slice(&other.dims);
        self.matvecs += other.matvecs;
        self.basis_matvecs += other.basis_matvecs;
        self.recurrence_matvecs += other.recurrence_matvecs;
        self.skipped_matvecs += other.skipped_matvecs;
        self.rejections += other.rejections;
        self.max_ortho_defect = match (self.max_ortho_defect, other.max_ortho_defect) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
    }

    /// Sum of per-substep Krylov dimensions.
    pub fn dim_sum(&self) -> usize {
        self.dims.iter().sum()
    }

    pub(crate) fn note_ortho_defect(&mut self, defect: f64) {
        let cur = self.max_ortho_defect.unwrap_or(0.0);
        self.max_ortho_defect = Some(cur.max(defect));
    }
}
