//! One-step maps: dedicated exprb-euler/exprb42/pexprb43 paths and the
//! generic table driver.
//!
//! All steppers share the same shape: one multi-scale Krylov call delivers
//! the Rosenbrock-Euler increments `c_i h phi_1(c_i h J) F(u_n)` for every
//! stage at once, and (for schemes with corrections) a second call applies
//! the `b_i` weights to the stage differences `D_ni`. The operator passed to
//! the evaluator is `h J_n`; scale factors fold the nodes in.

use super::problem::LinearizationFrame;
use super::scheme::{exprb42 as exprb42_table, exprb_euler as euler_table, pexprb43 as pexprb43_table, PhiPoly, SchemeSpec};
use crate::krylov::{phi_combination, phi_combination_multi, KrylovConfig, KrylovStats};
use crate::linop::ScaledOperator;
use crate::{Error, Result};
use nalgebra::DVector;

/// Outcome of a single step.
pub struct StepResult {
    pub u_next: DVector<f64>,
    /// Interior stage states `U_n2 .. U_ns` in order.
    pub stages: Vec<DVector<f64>>,
    /// Aggregate over every Krylov call the step made.
    pub stats: KrylovStats,
}

fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArg(format!("step size must be positive, got {h}")));
    }
    Ok(())
}

/// `u_{n+1} = u_n + h phi_1(h J_n) F(u_n)`; one Krylov call.
pub fn step_exprb_euler(
    frame: &LinearizationFrame<'_>,
    h: f64,
    cfg: &KrylovConfig,
) -> Result<StepResult> {
    check_h(h)?;
    let n = frame.state().len();
    let op = ScaledOperator::new(frame.jacobian(), h);
    let vectors = [DVector::zeros(n), frame.rhs_at_state() * h];
    let (y, stats) = phi_combination(&op, &vectors, cfg)?;
    Ok(StepResult { u_next: frame.state() + y, stages: vec![], stats })
}

/// Two-stage fourth-order scheme, two Krylov calls: the first evaluates the
/// Euler increment at node 3/4 (giving `U_n2`), the second combines
/// `phi_1(hJ) hF` with `(32/9) h phi_3(hJ) D_n2`.
pub fn step_exprb42(
    frame: &LinearizationFrame<'_>,
    h: f64,
    cfg: &KrylovConfig,
) -> Result<StepResult> {
    check_h(h)?;
    let n = frame.state().len();
    let op = ScaledOperator::new(frame.jacobian(), h);
    let hf = frame.rhs_at_state() * h;

    let base = [DVector::zeros(n), hf.clone()];
    let (mut incs, stats1) = phi_combination_multi(&op, &base, &[0.75], cfg)?;
    let u2 = frame.state() + incs.pop().expect("one scale");
    let d2 = frame.remainder_diff(&u2);

    let update = [
        DVector::zeros(n),
        hf,
        DVector::zeros(n),
        d2 * (32.0 / 9.0 * h),
    ];
    let (y, stats2) = phi_combination(&op, &update, cfg)?;
    let mut stats = stats1;
    stats.merge(&stats2);
    Ok(StepResult { u_next: frame.state() + y, stages: vec![u2], stats })
}

/// Three-stage scheme with independent stages, two Krylov calls: the first
/// is a multi-scale evaluation at nodes [1/2, 1] (giving `U_n2` and `U_n3`
/// together), the second applies the phi_3/phi_4 weights to the stage
/// differences and lands on `u_{n+1} = U_n3 + w`.
pub fn step_pexprb43(
    frame: &LinearizationFrame<'_>,
    h: f64,
    cfg: &KrylovConfig,
) -> Result<StepResult> {
    check_h(h)?;
    let n = frame.state().len();
    let op = ScaledOperator::new(frame.jacobian(), h);
    let hf = frame.rhs_at_state() * h;

    let base = [DVector::zeros(n), hf];
    let (incs, stats1) = phi_combination_multi(&op, &base, &[0.5, 1.0], cfg)?;
    let u2 = frame.state() + &incs[0];
    let u3 = frame.state() + &incs[1];
    let d2 = frame.remainder_diff(&u2);
    let d3 = frame.remainder_diff(&u3);

    let v3 = &d2 * (16.0 * h) + &d3 * (-2.0 * h);
    let v4 = &d2 * (-48.0 * h) + &d3 * (12.0 * h);
    let update = [
        DVector::zeros(n),
        DVector::zeros(n),
        DVector::zeros(n),
        v3,
        v4,
    ];
    let (w, stats2) = phi_combination(&op, &update, cfg)?;
    let mut stats = stats1;
    stats.merge(&stats2);
    let u_next = &u3 + w;
    Ok(StepResult { u_next, stages: vec![u2, u3], stats })
}

/// Builds the vector list `v_0..v_jmax` for one correction call from phi
/// polynomials applied to stage differences: `v_j += h * coeff * d` for every
/// `(j, coeff)` term. Returns `None` when every contribution is zero.
fn assemble_correction(
    polys_with_d: &[(&PhiPoly, &DVector<f64>)],
    h: f64,
    n: usize,
) -> Option<Vec<DVector<f64>>> {
    let jmax = polys_with_d
        .iter()
        .flat_map(|(poly, _)| poly.terms().iter().map(|&(j, _)| j))
        .max()?;
    let mut vectors = vec![DVector::zeros(n); jmax + 1];
    let mut any = false;
    for (poly, d) in polys_with_d {
        for &(j, coeff) in poly.terms() {
            if coeff != 0.0 {
                vectors[j].axpy(h * coeff, d, 1.0);
                any = true;
            }
        }
    }
    any.then_some(vectors)
}

/// Table-driven step for any [`SchemeSpec`]. Matches the dedicated steppers
/// on their own tables to roundoff (they differ only in how the work is
/// batched into Krylov calls).
pub fn step_generic(
    scheme: &SchemeSpec,
    frame: &LinearizationFrame<'_>,
    h: f64,
    cfg: &KrylovConfig,
) -> Result<StepResult> {
    check_h(h)?;
    let n = frame.state().len();
    let op = ScaledOperator::new(frame.jacobian(), h);
    let hf = frame.rhs_at_state() * h;

    // One multi-scale call covers the Euler increment at every node plus the
    // update's own node 1.
    let mut scales: Vec<f64> = scheme.nodes().to_vec();
    scales.push(1.0);
    scales.sort_by(|x, y| x.partial_cmp(y).expect("validated nodes"));
    scales.dedup();
    let base = [DVector::zeros(n), hf];
    let (incs, mut stats) = phi_combination_multi(&op, &base, &scales, cfg)?;
    let inc_at = |c: f64| -> &DVector<f64> {
        let idx = scales.iter().position(|&s| s == c).expect("node is a scale");
        &incs[idx]
    };

    let extra = scheme.stages() - 1;
    let mut stage_states = Vec::with_capacity(extra);
    let mut diffs: Vec<DVector<f64>> = Vec::with_capacity(extra);
    for idx in 0..extra {
        let c = scheme.nodes()[idx];
        let mut u_stage = frame.state() + inc_at(c);
        let row = scheme.a_row(idx);
        let pairs: Vec<(&PhiPoly, &DVector<f64>)> =
            row.iter().zip(diffs.iter()).collect();
        if let Some(vectors) = assemble_correction(&pairs, h, n) {
            let (corr, s) = phi_combination(&op, &vectors, cfg)?;
            stats.merge(&s);
            u_stage += corr;
        }
        diffs.push(frame.remainder_diff(&u_stage));
        stage_states.push(u_stage);
    }

    let mut u_next = frame.state() + inc_at(1.0);
    let pairs: Vec<(&PhiPoly, &DVector<f64>)> = (0..extra)
        .map(|i| (scheme.b_weight(i), &diffs[i]))
        .collect();
    if let Some(vectors) = assemble_correction(&pairs, h, n) {
        let (corr, s) = phi_combination(&op, &vectors, cfg)?;
        stats.merge(&s);
        u_next += corr;
    }
    Ok(StepResult { u_next, stages: stage_states, stats })
}

/// Scheme selector: the three built-in steppers plus arbitrary tables.
#[derive(Clone, Debug)]
pub enum Stepper {
    ExprbEuler,
    Exprb42,
    Pexprb43,
    Generic(SchemeSpec),
}

impl Stepper {
    pub fn name(&self) -> &str {
        match self {
            Stepper::ExprbEuler => "exprb-euler",
            Stepper::Exprb42 => "exprb42",
            Stepper::Pexprb43 => "pexprb43",
            Stepper::Generic(s) => s.name(),
        }
    }

    /// The scheme table this stepper realizes.
    pub fn scheme(&self) -> SchemeSpec {
        match self {
            Stepper::ExprbEuler => euler_table(),
            Stepper::Exprb42 => exprb42_table(),
            Stepper::Pexprb43 => pexprb43_table(),
            Stepper::Generic(s) => s.clone(),
        }
    }

    pub fn step(
        &self,
        frame: &LinearizationFrame<'_>,
        h: f64,
        cfg: &KrylovConfig,
    ) -> Result<StepResult> {
        match self {
            Stepper::ExprbEuler => step_exprb_euler(frame, h, cfg),
            Stepper::Exprb42 => step_exprb42(frame, h, cfg),
            Stepper::Pexprb43 => step_pexprb43(frame, h, cfg),
            Stepper::Generic(s) => step_generic(s, frame, h, cfg),
        }
    }
}
