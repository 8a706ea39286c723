//! Benchmark driver for the exprb toolkit.
//!
//! The CLI front-end lives in `main.rs`; everything it does is reachable
//! in-process through this library so studies and tests can skip process
//! spawning: [`runner::run_system`] for single trajectories,
//! [`converge::converge_system`] for error-vs-h tables,
//! [`stability::bisect_stability`] for stability-limit searches, and
//! [`verify`] for scheme order-condition reports.

pub mod config;
pub mod converge;
pub mod runner;
pub mod stability;
pub mod verify;

pub use config::{IntegratorKind, RunConfig};
pub use converge::{converge_system, thread_count, ConvergeConfig, ConvergeOutput};
pub use runner::{run, run_system, trace_csv, RunOutput, RunSummary, TraceRow, TRACE_VERSION};
pub use stability::{bisect_stability, round_sig2, scene_stability_probe, StabilityReport};
pub use verify::{corrupted_scheme_residual, verify_builtin_schemes, SchemeReport};
