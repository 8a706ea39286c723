//! Stability-limit search: geometric bisection on a blowup predicate.

use crate::config::{IntegratorKind, RunConfig};
use crate::runner::run_system;
use exprb::oscillators::ParticleSystem;
use exprb::{Error, Result};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    /// Largest step size observed stable.
    pub h_stable: f64,
    /// Smallest step size observed unstable.
    pub h_unstable: f64,
    /// Geometric midpoint of the final bracket, rounded to 2 significant
    /// figures (the bracket is narrowed until it is tighter than that).
    pub boundary: f64,
    pub probes: usize,
}

/// Rounds to 2 significant figures.
pub fn round_sig2(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let exp = x.abs().log10().floor();
    let scale = 10f64.powf(exp - 1.0);
    (x / scale).round() * scale
}

/// Bisects the stability boundary of `probe` (true = stable) between a
/// stable `h_lo` and an unstable `h_hi`. Bisection is geometric — stability
/// limits are scale quantities — and stops once `h_hi / h_lo <= 1.01`, well
/// inside 2 significant figures.
pub fn bisect_stability(
    probe: &mut dyn FnMut(f64) -> Result<bool>,
    h_lo: f64,
    h_hi: f64,
) -> Result<StabilityReport> {
    if !(h_lo > 0.0 && h_hi > h_lo) || !h_hi.is_finite() {
        return Err(Error::InvalidArg(format!(
            "need 0 < h_lo < h_hi, got [{h_lo}, {h_hi}]"
        )));
    }
    let mut probes = 0usize;
    let mut check = |h: f64, probes: &mut usize| -> Result<bool> {
        *probes += 1;
        probe(h)
    };
    if !check(h_lo, &mut probes)? {
        return Err(Error::InvalidArg(format!(
            "no bracket: h_lo = {h_lo:.3e} is already unstable"
        )));
    }
    if check(h_hi, &mut probes)? {
        return Err(Error::InvalidArg(format!(
            "no bracket: h_hi = {h_hi:.3e} is still stable"
        )));
    }
    let (mut lo, mut hi) = (h_lo, h_hi);
    while hi / lo > 1.01 {
        let mid = (lo * hi).sqrt();
        if check(mid, &mut probes)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(StabilityReport {
        h_stable: lo,
        h_unstable: hi,
        boundary: round_sig2((lo * hi).sqrt()),
        probes,
    })
}

/// The scene blowup predicate: a run is unstable when it aborts with a
/// numerical failure (non-finite state, exhausted iteration or Krylov
/// budgets, failed linear/Newton solves) or its total energy ever exceeds
/// ten times the initial energy. Configuration errors still propagate.
///
/// The energy comparison needs a scene whose initial energy is nonzero
/// (stretched springs or a velocity kick); starting at an equilibrium with
/// zero total energy leaves only a tiny absolute cushion and ordinary
/// integration drift would read as instability.
pub fn scene_stability_probe<'a>(
    system: &'a ParticleSystem,
    integrator: IntegratorKind,
    t_end: f64,
    krylov_tol: f64,
) -> impl FnMut(f64) -> Result<bool> + 'a {
    move |h: f64| {
        let mut cfg = RunConfig::new("stability-probe", integrator, h, t_end);
        cfg.krylov_tol = krylov_tol;
        match run_system(system, &cfg) {
            Ok(out) => {
                let e0 = out.rows[0].total;
                Ok(out.max_total_energy() <= 10.0 * e0.abs() + 1e-9)
            }
            Err(
                Error::NonFinite(_)
                | Error::MaxIter(_)
                | Error::KrylovBudget(_)
                | Error::NewtonDiverged(_)
                | Error::LinearSolve(_),
            ) => Ok(false),
            Err(e) => Err(e),
        }
    }
}
