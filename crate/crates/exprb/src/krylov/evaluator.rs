//! The adaptive substepping evaluator.

use super::arnoldi::{iom2_arnoldi, KrylovBasis};
use super::controller::{plan_substep, ControllerConfig};
use super::stats::KrylovStats;
use crate::linop::LinearOperator;
use crate::matfunc::expm_dense;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Largest number of right-hand-side vectors (p <= 8).
pub const P_MAX: usize = 8;

/// Configuration of the Krylov evaluator.
#[derive(Clone, Debug)]
pub struct KrylovConfig {
    /// Relative accuracy target for the combination.
    pub tol: f64,
    /// Krylov dimension of the first substep.
    pub m_init: usize,
    /// Hard cap on the Krylov dimension.
    pub m_max: usize,
    /// Failure threshold: substeps may not shrink below this fraction of the
    /// requested interval.
    pub tau_min_frac: f64,
    /// Failure threshold for rejected attempts of a single substep.
    pub max_rejections: usize,
    /// Failure threshold for accepted substeps over the whole interval;
    /// guards against stalled runs (e.g. tau pinned near the floor making no
    /// progress). Legitimate work can be slow: a strongly nonnormal operator
    /// whose dimension caps m well below what its norm wants may honestly
    /// need ~1e5 substeps, so the default is deliberately generous.
    pub max_substeps: usize,
    /// Skip operator applications whose operand is exactly zero (the results
    /// are bit-identical either way; the skip only saves work).
    pub zero_skip: bool,
    /// Record basis orthogonality defects in the stats (costs an extra
    /// O(m^2 n) pass per substep; meant for diagnostics and tests).
    pub track_basis_quality: bool,
    pub controller: ControllerConfig,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            m_init: 10,
            m_max: 128,
            tau_min_frac: 1e-10,
            max_rejections: 40,
            max_substeps: 1_000_000,
            zero_skip: true,
            track_basis_quality: false,
            controller: ControllerConfig::default(),
        }
    }
}

impl KrylovConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// A phi-combination request; bundles the operator with the vectors
/// `v_0 .. v_p` and the output scales.
pub struct PhiRequest<'a> {
    pub op: &'a dyn LinearOperator,
    pub vectors: &'a [DVector<f64>],
    pub scales: &'a [f64],
}

impl PhiRequest<'_> {
    fn validate(&self) -> Result<usize> {
        let n = self.op.dim();
        if n == 0 {
            return Err(Error::InvalidArg("operator dimension must be positive".into()));
        }
        if self.vectors.is_empty() {
            return Err(Error::InvalidArg("phi combination needs at least v_0".into()));
        }
        let p = self.vectors.len() - 1;
        if p > P_MAX {
            return Err(Error::InvalidArg(format!("p = {p} exceeds the supported {P_MAX}")));
        }
        for (k, v) in self.vectors.iter().enumerate() {
            if v.len() != n {
                return Err(Error::Dimension(format!(
                    "v_{k} has length {} but the operator dimension is {n}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("v_{k} contains NaN or infinity")));
            }
        }
        if self.scales.is_empty() {
            return Err(Error::InvalidArg("at least one output scale is required".into()));
        }
        let mut prev = 0.0;
        for &c in self.scales {
            if !c.is_finite() || c <= prev || c > 1.0 {
                return Err(Error::InvalidArg(format!(
                    "scales must be strictly increasing within (0, 1], got {:?}",
                    self.scales
                )));
            }
            prev = c;
        }
        Ok(p)
    }
}

/// The vectors `w_0 .. w_p` of one substep starting at time `t`:
/// `w_0 = u` and `w_j = M w_{j-1} + sum_l t^l/l! v_{j+l}`.
///
/// With these, the solution of the polynomially forced ODE behind the
/// combination satisfies
/// `u(t + tau) = sum_{j<p} tau^j/j! w_j + tau^p phi_p(tau M) w_p`,
/// so each substep needs a single phi action. When `zero_skip` is set the
/// operator application is skipped for an exactly zero operand (common on
/// early substeps when `u` starts at zero); skipping never changes results.
pub fn substep_recurrence(
    op: &dyn LinearOperator,
    u: &DVector<f64>,
    t: f64,
    vectors: &[DVector<f64>],
    zero_skip: bool,
    stats: &mut KrylovStats,
) -> Vec<DVector<f64>> {
    let p = vectors.len() - 1;
    let n = u.len();
    let mut w = Vec::with_capacity(p + 1);
    w.push(u.clone());
    for j in 1..=p {
        let prev = &w[j - 1];
        let mut next = if zero_skip && prev.iter().all(|&x| x == 0.0) {
            stats.skipped_matvecs += 1;
            DVector::zeros(n)
        } else {
            stats.matvecs += 1;
            stats.recurrence_matvecs += 1;
            op.apply(prev)
        };
        let mut coef = 1.0;
        for l in 0..=(p - j) {
            next.axpy(coef, &vectors[j + l], 1.0);
            coef *= t / (l + 1) as f64;
        }
        w.push(next);
    }
    w
}

/// `sum_{j=0}^{p-1} tau^j/j! w_j` (zero vector when `p == 0`).
fn poly_part(w: &[DVector<f64>], tau: f64, p: usize) -> DVector<f64> {
    let n = w[0].len();
    let mut acc = DVector::zeros(n);
    let mut coef = 1.0;
    for (j, wj) in w.iter().take(p).enumerate() {
        acc.axpy(coef, wj, 1.0);
        coef *= tau / (j + 1) as f64;
    }
    acc
}

/// Projected update and error term of one substep attempt.
///
/// Exponentiates the Hessenberg block augmented with `p + 1` phi columns;
/// column `p` of the augmented block feeds the update. The returned error
/// term is the residual factor `|e_m^T phi_{p+1}(tau H) e_1|` -- the bottom
/// entry of the last phi column, which decays both as `tau` shrinks and as
/// the basis grows. Overflow inside the small exponential is reported as an
/// error so the caller can shrink the substep instead of aborting.
fn project_update(
    basis: &KrylovBasis,
    w: &[DVector<f64>],
    tau: f64,
    p: usize,
) -> Result<(DVector<f64>, f64)> {
    let me = basis.m();
    let q = p + 1;
    let dim = me + q;
    let mut s = DMatrix::zeros(dim, dim);
    s.view_mut((0, 0), (me, me)).copy_from(&(basis.hessenberg() * tau));
    s[(0, me)] = 1.0;
    for r in 0..q - 1 {
        s[(me + r, me + r + 1)] = 1.0;
    }
    let e = expm_dense(&s)?;
    let err_term = e[(me - 1, me + q - 1)].abs();
    let u_next = if p == 0 {
        let col = e.view((0, 0), (me, 1)).column(0).into_owned();
        basis.lift(&col)
    } else {
        let mut acc = poly_part(w, tau, p);
        let col = e.view((0, me + p - 1), (me, 1)).column(0).into_owned();
        acc.axpy(tau.powi(p as i32), &basis.lift(&col), 1.0);
        acc
    };
    Ok((u_next, err_term))
}

/// Evaluates `phi_0(M)v_0 + phi_1(M)v_1 + ... + phi_p(M)v_p`.
pub fn phi_combination(
    op: &dyn LinearOperator,
    vectors: &[DVector<f64>],
    cfg: &KrylovConfig,
) -> Result<(DVector<f64>, KrylovStats)> {
    let (mut results, stats) = phi_combination_multi(op, vectors, &[1.0], cfg)?;
    Ok((results.pop().expect("one scale, one result"), stats))
}

/// Multi-scale evaluation: returns `u(c)` for every requested scale `c`,
/// where `u` solves the polynomially forced ODE behind the combination. The
/// output at scale `c` equals the single-scale combination with operator
/// `c M` and vectors `c^k v_k`. Substep boundaries land exactly on every
/// requested scale; nothing is interpolated.
pub fn phi_combination_multi(
    op: &dyn LinearOperator,
    vectors: &[DVector<f64>],
    scales: &[f64],
    cfg: &KrylovConfig,
) -> Result<(Vec<DVector<f64>>, KrylovStats)> {
    let req = PhiRequest { op, vectors, scales };
    let p = req.validate()?;
    let n = op.dim();
    let mut stats = KrylovStats::default();
    let t_last = *scales.last().unwrap();
    let tau_floor = cfg.tau_min_frac * t_last;
    let mut results = Vec::with_capacity(scales.len());

    let m_cap = cfg.m_max.min(n).max(1);
    let mut m = cfg.m_init.clamp(1, m_cap);
    let mut tau = t_last;
    let mut u = vectors[0].clone();
    let mut t = 0.0f64;
    let mut node_idx = 0usize;

    while node_idx < scales.len() {
        if stats.substeps >= cfg.max_substeps {
            return Err(Error::KrylovBudget(format!(
                "interval not covered after {} substeps (reached t = {t:.3e} of {t_last:.3e})",
                stats.substeps
            )));
        }
        let target = scales[node_idx];
        let remaining = target - t;
        let clipped = tau < remaining;
        let mut tau_cur = if clipped { tau } else { remaining };

        let w = substep_recurrence(op, &u, t, vectors, cfg.zero_skip, &mut stats);

        // A zero w_p makes the substep purely polynomial and therefore exact
        // for any tau; take the whole remaining stretch to the node.
        if w[p].iter().all(|&x| x == 0.0) {
            tau_cur = remaining;
            let u_next = poly_part(&w, tau_cur, p);
            stats.substeps += 1;
            stats.dims.push(0);
            let plan = plan_substep(&cfg.controller, 0.0, cfg.tol, tau_cur, m, p, m_cap);
            tau = tau.max(plan.next_tau);
            m = plan.next_m;
            u = u_next;
            t = target;
            results.push(u.clone());
            node_idx += 1;
            continue;
        }

        let mut basis = iom2_arnoldi(op, &w[p], m, m_cap, &mut stats);
        if cfg.track_basis_quality {
            stats.note_ortho_defect(basis.ortho_defect());
        }
        let mut rejections_here = 0usize;
        loop {
            let attempt = project_update(&basis, &w, tau_cur, p);
            let (u_next, est) = match attempt {
                Ok((u_next, err_term)) => {
                    let est_abs =
                        tau_cur.powi(p as i32) * basis.beta() * basis.h_next().abs() * err_term;
                    let denom = u_next.norm().max(u.norm()).max(f64::MIN_POSITIVE);
                    (Some(u_next), est_abs / denom)
                }
                // Overflow in the small exponential: treat as an infinitely
                // bad estimate and let the controller shrink the substep.
                Err(Error::NonFinite(_)) => (None, f64::INFINITY),
                Err(e) => return Err(e),
            };

            let plan = plan_substep(&cfg.controller, est, cfg.tol, tau_cur, basis.m(), p, m_cap);
            if plan.accept {
                let u_next = u_next.expect("accepted attempts carry an update");
                stats.substeps += 1;
                stats.dims.push(basis.m());
                let landed = tau_cur >= target - t;
                if landed {
                    t = target;
                    results.push(u_next.clone());
                    node_idx += 1;
                    // A node-clipped substep says nothing against the current
                    // tau; keep whichever is larger.
                    tau = tau.max(plan.next_tau);
                } else {
                    t += tau_cur;
                    tau = plan.next_tau;
                }
                m = plan.next_m;
                u = u_next;
                break;
            }

            stats.rejections += 1;
            rejections_here += 1;
            if rejections_here > cfg.max_rejections {
                return Err(Error::KrylovBudget(format!(
                    "substep at t = {t:.3e} rejected {rejections_here} times \
                     (tau = {tau_cur:.3e}, m = {}, est = {est:.3e}, tol = {:.3e})",
                    basis.m(),
                    cfg.tol
                )));
            }
            if plan.next_m > basis.m() && !basis.breakdown() {
                basis.extend(op, plan.next_m, &mut stats);
                if cfg.track_basis_quality {
                    stats.note_ortho_defect(basis.ortho_defect());
                }
            }
            let next_tau = plan.next_tau.min(target - t);
            if next_tau < tau_floor {
                return Err(Error::KrylovBudget(format!(
                    "substep size {next_tau:.3e} fell below the floor {tau_floor:.3e} \
                     at t = {t:.3e} (est = {est:.3e}, m = {})",
                    basis.m()
                )));
            }
            tau_cur = next_tau;
        }
    }

    Ok((results, stats))
}
