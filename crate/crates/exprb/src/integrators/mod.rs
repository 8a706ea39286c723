//! Exponential Rosenbrock time steppers.
//!
//! Problems are posed as `u' = F(u)`. Each step linearizes around the
//! current state: `J_n = F'(u_n)`, `g_n(u) = F(u) - J_n u`, so the stiff
//! part of the dynamics travels through phi-functions of `h J_n` while the
//! remainder `g_n` — whose Jacobian vanishes at `u_n` — enters only through
//! the small stage differences `D_ni = g_n(U_ni) - g_n(u_n)`.
//!
//! The dedicated steppers ([`step_exprb_euler`], [`step_exprb42`],
//! [`step_pexprb43`]) each use at most two Krylov calls per step by bundling
//! stages into multi-scale evaluations. [`step_generic`] drives any
//! [`SchemeSpec`] table and reproduces the dedicated paths to roundoff.

mod drive;
mod order;
mod problem;
mod scheme;
mod step;

pub use drive::{integrate, StepObservation, Trajectory};
pub use order::verify_order_conditions;
pub use problem::{fd_jacobian, ClosureProblem, LinearizationFrame, SemilinearProblem};
pub use scheme::{exprb42, exprb_euler, pexprb43, PhiPoly, SchemeSpec};
pub use step::{step_exprb42, step_exprb_euler, step_generic, step_pexprb43, StepResult, Stepper};
