//! Substep-size and subspace-dimension adaptation.

/// Tuning knobs of the controller. The defaults are the contract the rest of
/// the crate is tested against.
#[derive(Clone, Debug)]
pub struct ControllerConfig {
    /// Safety factor applied to the tolerance ratio.
    pub safety: f64,
    /// Largest factor by which tau may grow in one adaptation.
    pub tau_grow_max: f64,
    /// Smallest factor by which tau may shrink in one adaptation.
    pub tau_shrink_min: f64,
    /// Largest factor by which m may grow in one adaptation (4/3).
    pub m_grow_max: f64,
    /// Smallest factor by which m may shrink in one adaptation (3/4).
    pub m_shrink_min: f64,
    /// Assumed error reduction per added Krylov dimension.
    pub kappa: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            safety: 0.9,
            tau_grow_max: 2.0,
            tau_shrink_min: 0.2,
            m_grow_max: 4.0 / 3.0,
            m_shrink_min: 0.75,
            kappa: 2.0,
        }
    }
}

/// Outcome of one adaptation decision.
#[derive(Clone, Copy, Debug)]
pub struct SubstepPlan {
    /// Whether the substep that produced the estimate is accepted.
    pub accept: bool,
    pub next_tau: f64,
    pub next_m: usize,
}

/// Decides acceptance and proposes the next `(tau, m)`.
///
/// * Acceptance: `est <= budget` where `budget = tol * tau` (the tolerance
///   is budgeted proportionally to substep length).
/// * The new tau always follows
///   `tau * min(2, max(0.2, 0.9 (budget/est)^{1/(p+1)}))`.
/// * The subspace dimension additionally moves when that is cheaper per unit
///   time, comparing operator applications per unit time, `(m + p)/tau`, of
///   the tau-move and the m-move; growth is capped at 4/3x, shrinking at
///   3/4x, and `m` never exceeds `m_cap`.
/// * A zero estimate (exact substep, e.g. after a happy breakdown) grows tau
///   by the maximum factor and shrinks m.
pub fn plan_substep(
    cfg: &ControllerConfig,
    est: f64,
    tol: f64,
    tau: f64,
    m: usize,
    p: usize,
    m_cap: usize,
) -> SubstepPlan {
    let budget = tol * tau;
    let m_f = m as f64;
    let m_lo = ((m_f * cfg.m_shrink_min).ceil() as usize).max(1);
    let m_hi = ((m_f * cfg.m_grow_max).floor() as usize).max(m + 1).min(m_cap.max(1));

    if est <= 0.0 {
        return SubstepPlan { accept: true, next_tau: tau * cfg.tau_grow_max, next_m: m_lo.min(m) };
    }

    let accept = est <= budget;
    let expo = 1.0 / (p as f64 + 1.0);
    let factor = (cfg.safety * (budget / est).powf(expo))
        .clamp(cfg.tau_shrink_min, cfg.tau_grow_max);
    let tau_cand = tau * factor;

    // Would-be m from the per-dimension error reduction heuristic.
    let shift = (est / budget).ln() / cfg.kappa.ln();
    let m_cand_raw = (m_f + shift).round();
    let m_cand = if m_cand_raw.is_finite() {
        (m_cand_raw.max(1.0) as usize).clamp(m_lo, m_hi).min(m_cap.max(1))
    } else {
        m
    };

    // Cost in operator applications per unit of integrated time.
    let cost_tau = (m_f + p as f64) / tau_cand;
    let cost_m = (m_cand as f64 + p as f64) / tau;
    let next_m = if m_cand != m && cost_m < cost_tau { m_cand } else { m };

    SubstepPlan { accept, next_tau: tau_cand, next_m }
}
