//! Run configuration shared by the CLI and the in-process test drivers.

use exprb::{Error, Result};
use serde::Serialize;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

/// Every integrator the bench can drive. The three exponential schemes step
/// the first-order form `u = (Omega x, v)`; rk4/bdf1/imex-splitting step the
/// same form with classical rules; verlet works on `(x, v)` directly and
/// never needs the matrix square root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorKind {
    ExprbEuler,
    Exprb42,
    Pexprb43,
    Rk4,
    Bdf1,
    Verlet,
    ImexSplitting,
}

impl IntegratorKind {
    pub const ALL: [IntegratorKind; 7] = [
        IntegratorKind::ExprbEuler,
        IntegratorKind::Exprb42,
        IntegratorKind::Pexprb43,
        IntegratorKind::Rk4,
        IntegratorKind::Bdf1,
        IntegratorKind::Verlet,
        IntegratorKind::ImexSplitting,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            IntegratorKind::ExprbEuler => "exprb-euler",
            IntegratorKind::Exprb42 => "exprb42",
            IntegratorKind::Pexprb43 => "pexprb43",
            IntegratorKind::Rk4 => "rk4",
            IntegratorKind::Bdf1 => "bdf1",
            IntegratorKind::Verlet => "verlet",
            IntegratorKind::ImexSplitting => "imex-splitting",
        }
    }

    pub fn is_exponential(&self) -> bool {
        matches!(
            self,
            IntegratorKind::ExprbEuler | IntegratorKind::Exprb42 | IntegratorKind::Pexprb43
        )
    }
}

impl fmt::Display for IntegratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IntegratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IntegratorKind::ALL
            .iter()
            .find(|k| k.name() == s)
            .copied()
            .ok_or_else(|| {
                let known: Vec<&str> = IntegratorKind::ALL.iter().map(|k| k.name()).collect();
                Error::InvalidArg(format!(
                    "unknown integrator '{s}'; known: {}",
                    known.join(", ")
                ))
            })
    }
}

/// One benchmark run: scene, integrator, step size, horizon, and plumbing.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scene: PathBuf,
    pub integrator: IntegratorKind,
    pub h: f64,
    pub t_end: f64,
    /// Relative tolerance handed to the Krylov evaluator (exponential
    /// integrators only).
    pub krylov_tol: f64,
    /// Trace rows are written every `cadence` steps (the initial and final
    /// states always appear).
    pub cadence: usize,
    /// Recorded in outputs; consumed by the randomized subcommands.
    pub seed: u64,
    /// Fill the wall-clock column. Off by default: timings are
    /// hardware-dependent and would break the bit-identical-output contract.
    pub timing: bool,
}

impl RunConfig {
    pub fn new(scene: impl Into<PathBuf>, integrator: IntegratorKind, h: f64, t_end: f64) -> Self {
        Self {
            scene: scene.into(),
            integrator,
            h,
            t_end,
            krylov_tol: 1e-8,
            cadence: 1,
            seed: 0,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::InvalidArg(format!("h must be positive, got {}", self.h)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidArg(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        if !(self.krylov_tol > 0.0) || !self.krylov_tol.is_finite() {
            return Err(Error::InvalidArg(format!(
                "krylov tolerance must be positive, got {}",
                self.krylov_tol
            )));
        }
        if self.cadence == 0 {
            return Err(Error::InvalidArg("cadence must be at least 1".into()));
        }
        Ok(())
    }
}
