//! Adaptive Krylov evaluation of phi-function combinations.
//!
//! The target quantity is `phi_0(M)v_0 + phi_1(M)v_1 + ... + phi_p(M)v_p`,
//! which equals `u(1)` for the linear ODE
//!
//! ```text
//! u'(t) = M u(t) + v_1 + t v_2 + ... + t^{p-1}/(p-1)! v_p,   u(0) = v_0.
//! ```
//!
//! The evaluator integrates this ODE with adaptive substeps. On each substep
//! of size `tau` only a single `phi_p(tau M) w_p` action is needed (the rest
//! of the update is a short polynomial in `tau`), and that action is
//! projected onto a Krylov subspace built with depth-2 incomplete
//! orthogonalization. Both the substep size and the subspace dimension adapt
//! to an error estimate.
//!
//! Multi-scale requests (`scales = [c_1 < ... < c_q]`) force substep
//! boundaries onto each `c_k` and report `u(c_k)` there, so one pass serves
//! every stage of an exponential Rosenbrock step.

mod arnoldi;
mod controller;
mod evaluator;
mod stats;

pub use arnoldi::{iom2_arnoldi, KrylovBasis, BREAKDOWN_RTOL};
pub use controller::{plan_substep, ControllerConfig, SubstepPlan};
pub use evaluator::{
    phi_combination, phi_combination_multi, substep_recurrence, KrylovConfig, PhiRequest,
};
pub use stats::KrylovStats;
