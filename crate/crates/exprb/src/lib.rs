//! Exponential Rosenbrock integrators for stiff, oscillatory ODEs.
//!
//! The crate is organized around the semilinear form `u' = F(u)` with a
//! per-step dynamic linearization `J_n = F'(u_n)`, `g_n(u) = F(u) - J_n u`.
//! Exponential schemes advance the linearized part exactly through
//! phi-functions of `h J_n`, which makes them immune to the step-size
//! restrictions that stiff spring forces impose on explicit methods.
//!
//! Modules:
//!
//! * [`matfunc`] — dense matrix exponential, phi-functions, SPD square roots,
//!   and Cholesky-backed SPD solves. Small and dense; serves as the reference
//!   path everything else is checked against.
//! * [`krylov`] — the workhorse evaluator for linear combinations
//!   `phi_0(M)v_0 + phi_1(M)v_1 + ... + phi_p(M)v_p` using adaptive
//!   substepping in a Krylov subspace with incomplete (depth-2)
//!   orthogonalization. Supports multi-scale outputs so one call serves all
//!   stages of a scheme.
//! * [`integrators`] — Rosenbrock–Euler, exprb42 and pexprb43 steppers, a
//!   generic table-driven stage driver, the stiff order-condition verifier,
//!   and a fixed-step integration loop.
//! * [`oscillators`] — mass–spring particle systems, assembly into
//!   `x'' = -Ax + g(x)`, the skew-symmetric first-order form
//!   `u = (Omega x, x')`, energy diagnostics, scene builders and JSON I/O.
//! * [`baselines`] — RK4, BDF-1 (Newton + matrix-free GMRES), Stoermer–Verlet
//!   and an IMEX splitting, used for comparison studies.
//! * [`samples`] — seeded random matrices and small test problems shared by
//!   tests and benches.

mod error;
pub mod baselines;
pub mod integrators;
pub mod krylov;
pub mod linop;
pub mod matfunc;
pub mod oscillators;
pub mod samples;

pub use error::{Error, Result};
pub use linop::{DenseOperator, LinearOperator, ScaledOperator, ShiftedOperator};
