//! The run core: drives any integrator over a scene with a fixed step,
//! collecting per-step trace rows and a machine-readable summary.

use crate::config::{IntegratorKind, RunConfig};
use exprb::baselines::{bdf1_step, imex_step, rk4_step, verlet_step, ImexSplitting, NewtonConfig};
use exprb::integrators::{LinearizationFrame, Stepper};
use exprb::krylov::{KrylovConfig, KrylovStats};
use exprb::oscillators::{
    assemble, load_scene, to_first_order, AssembledSystem, EnergyReport, ParticleSystem,
    StiffFirstOrderForm,
};
use exprb::{Error, Result};
use nalgebra::DVector;
use serde::Serialize;
use std::fmt::Write as _;
use std::time::Instant;

pub const TRACE_VERSION: &str = "exprb-trace v1";

/// One emitted trace row. Krylov counters aggregate every step since the
/// previous row (so column sums are cadence-independent); they stay zero for
/// the classical integrators.
#[derive(Clone, Debug)]
pub struct TraceRow {
    pub step: usize,
    pub t: f64,
    pub kinetic: f64,
    pub elastic: f64,
    pub external: f64,
    pub total: f64,
    pub state_norm: f64,
    pub substeps: usize,
    pub matvecs: usize,
    pub skipped: usize,
    pub rejections: usize,
    pub max_dim: usize,
    pub wall_ms: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub trace_version: &'static str,
    pub scene: String,
    pub integrator: &'static str,
    pub h: f64,
    pub t_end: f64,
    pub krylov_tol: f64,
    pub seed: u64,
    pub cadence: usize,
    pub steps: usize,
    pub final_t: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    /// `|E_end - E_0| / |E_0|`, or the absolute difference when `E_0 = 0`.
    pub energy_drift_rel: f64,
    pub final_state_norm: f64,
    pub krylov_substeps: usize,
    pub krylov_matvecs: usize,
    pub krylov_skipped: usize,
    pub krylov_rejections: usize,
    pub completed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms_total: Option<f64>,
}

#[derive(Debug)]
pub struct RunOutput {
    pub rows: Vec<TraceRow>,
    pub summary: RunSummary,
    final_xv: (DVector<f64>, DVector<f64>),
}

impl RunOutput {
    /// Final `(x, v)` in physical coordinates; the common ground for error
    /// measurements across integrators with different state spaces.
    pub fn final_xv(&self) -> &(DVector<f64>, DVector<f64>) {
        &self.final_xv
    }

    pub fn max_total_energy(&self) -> f64 {
        self.rows.iter().map(|r| r.total).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Either representation of the assembled physics: the first-order form for
/// integrators that need `Omega`, or the bare assembly for verlet (which
/// works on `(x, v)` and skips the square-root cost entirely).
enum Physics {
    FirstOrder(StiffFirstOrderForm),
    Direct(AssembledSystem),
}

enum Engine<'a> {
    Exponential { form: &'a StiffFirstOrderForm, stepper: Stepper, cfg: KrylovConfig },
    Rk4 { form: &'a StiffFirstOrderForm },
    Bdf1 { form: &'a StiffFirstOrderForm, newton: NewtonConfig },
    Imex { form: &'a StiffFirstOrderForm, split: ImexSplitting<'a> },
    Verlet { asm: &'a AssembledSystem },
}

enum State {
    U(DVector<f64>),
    Xv(DVector<f64>, DVector<f64>),
}

/// Loads the scene named by the config and runs it.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let system = load_scene(&cfg.scene)?;
    run_system(&system, cfg)
}

/// Runs an already-loaded scene. The trajectory itself is single-threaded
/// and deterministic: identical scene + config give identical rows.
pub fn run_system(system: &ParticleSystem, cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let asm = assemble(system)?;
    let physics = if cfg.integrator == IntegratorKind::Verlet {
        Physics::Direct(asm)
    } else {
        let (x0, v0) = asm.gather_state();
        Physics::FirstOrder(to_first_order(asm, &x0, &v0)?)
    };

    let engine = match (&physics, cfg.integrator) {
        (Physics::Direct(asm), _) => Engine::Verlet { asm },
        (Physics::FirstOrder(form), kind) => match kind {
            IntegratorKind::ExprbEuler => Engine::Exponential {
                form,
                stepper: Stepper::ExprbEuler,
                cfg: KrylovConfig::with_tol(cfg.krylov_tol),
            },
            IntegratorKind::Exprb42 => Engine::Exponential {
                form,
                stepper: Stepper::Exprb42,
                cfg: KrylovConfig::with_tol(cfg.krylov_tol),
            },
            IntegratorKind::Pexprb43 => Engine::Exponential {
                form,
                stepper: Stepper::Pexprb43,
                cfg: KrylovConfig::with_tol(cfg.krylov_tol),
            },
            IntegratorKind::Rk4 => Engine::Rk4 { form },
            IntegratorKind::Bdf1 => Engine::Bdf1 { form, newton: NewtonConfig::default() },
            IntegratorKind::ImexSplitting => {
                Engine::Imex { form, split: ImexSplitting::new(form, cfg.h)? }
            }
            IntegratorKind::Verlet => unreachable!("verlet uses the direct assembly"),
        },
    };

    let mut state = match &physics {
        Physics::Direct(asm) => {
            let (x0, v0) = asm.gather_state();
            State::Xv(x0, v0)
        }
        Physics::FirstOrder(form) => State::U(form.u0().clone()),
    };

    let mut rows = Vec::new();
    let mut totals = KrylovStats::default();
    let mut window = KrylovStats::default();
    let mut wall_total = 0.0f64;
    let mut wall_window = 0.0f64;

    let emit = |rows: &mut Vec<TraceRow>,
                step: usize,
                t: f64,
                state: &State,
                window: &KrylovStats,
                wall: Option<f64>| {
        let (energy, norm) = measure(&physics, state);
        rows.push(TraceRow {
            step,
            t,
            kinetic: energy.kinetic,
            elastic: energy.elastic,
            external: energy.external,
            total: energy.total(),
            state_norm: norm,
            substeps: window.substeps,
            matvecs: window.matvecs,
            skipped: window.skipped_matvecs,
            rejections: window.rejections,
            max_dim: window.dims.iter().copied().max().unwrap_or(0),
            wall_ms: wall,
        });
    };

    emit(&mut rows, 0, 0.0, &state, &window, cfg.timing.then_some(0.0));
    let e0 = rows[0].total;
    let norm0 = state_norm(&state);

    let mut t = 0.0f64;
    let mut step_index = 0usize;
    while t < cfg.t_end {
        let remaining = cfg.t_end - t;
        let landing = remaining <= cfg.h * (1.0 + 1e-9);
        let h_step = if landing { remaining } else { cfg.h };

        let started = cfg.timing.then(Instant::now);
        let stats = advance(&engine, &mut state, h_step, cfg.h).map_err(|e| match e {
            Error::NonFinite(msg) => Error::NonFinite(format!(
                "state diverged at step {} (t = {:.6e}): {msg}",
                step_index + 1,
                t + h_step
            )),
            other => other,
        })?;
        let norm = state_norm(&state);
        if !norm.is_finite() || norm > DIVERGENCE_NORM_FACTOR * (norm0 + 1.0) {
            return Err(Error::NonFinite(format!(
                "state diverged at step {} (t = {:.6e}): |u| = {norm:.3e}",
                step_index + 1,
                t + h_step
            )));
        }
        if let Some(s) = stats {
            window.merge(&s);
            totals.merge(&s);
        }
        if let Some(start) = started {
            let ms = start.elapsed().as_secs_f64() * 1e3;
            wall_window += ms;
            wall_total += ms;
        }

        t = if landing { cfg.t_end } else { t + cfg.h };
        step_index += 1;
        if step_index % cfg.cadence == 0 || landing {
            emit(&mut rows, step_index, t, &state, &window, cfg.timing.then_some(wall_window));
            window = KrylovStats::default();
            wall_window = 0.0;
        }
    }

    let last = rows.last().expect("at least the initial row");
    let e_final = last.total;
    let drift = if e0 != 0.0 { (e_final - e0).abs() / e0.abs() } else { (e_final - e0).abs() };
    let summary = RunSummary {
        trace_version: TRACE_VERSION,
        scene: cfg.scene.display().to_string(),
        integrator: cfg.integrator.name(),
        h: cfg.h,
        t_end: cfg.t_end,
        krylov_tol: cfg.krylov_tol,
        seed: cfg.seed,
        cadence: cfg.cadence,
        steps: step_index,
        final_t: t,
        energy_initial: e0,
        energy_final: e_final,
        energy_drift_rel: drift,
        final_state_norm: last.state_norm,
        krylov_substeps: totals.substeps,
        krylov_matvecs: totals.matvecs,
        krylov_skipped: totals.skipped_matvecs,
        krylov_rejections: totals.rejections,
        completed: true,
        wall_ms_total: cfg.timing.then_some(wall_total),
    };

    let final_xv = match (&physics, &state) {
        (Physics::FirstOrder(form), State::U(u)) => form.xv_from_u(u),
        (_, State::Xv(x, v)) => (x.clone(), v.clone()),
        _ => unreachable!("state kind is fixed per physics"),
    };
    Ok(RunOutput { rows, summary, final_xv })
}

/// Norm growth past this factor (relative to the start) is reported as
/// divergence; true blow-up crosses it long before overflowing to inf.
const DIVERGENCE_NORM_FACTOR: f64 = 1e12;

fn state_norm(state: &State) -> f64 {
    match state {
        State::U(u) => u.norm(),
        State::Xv(x, v) => (x.norm_squared() + v.norm_squared()).sqrt(),
    }
}

fn measure(physics: &Physics, state: &State) -> (EnergyReport, f64) {
    match (physics, state) {
        (Physics::Direct(asm), State::Xv(x, v)) => (asm.energy_xv(x, v), state_norm(state)),
        (Physics::FirstOrder(form), State::U(u)) => (form.energy(u), u.norm()),
        _ => unreachable!("state kind is fixed per physics"),
    }
}

/// One step of the selected engine; returns Krylov stats when the engine has
/// any. `h_run` is the configured step (the IMEX factorization is cached for
/// it); `h_step` differs only on the final, clipped step.
fn advance(
    engine: &Engine<'_>,
    state: &mut State,
    h_step: f64,
    h_run: f64,
) -> Result<Option<KrylovStats>> {
    match (engine, state) {
        (Engine::Exponential { form, stepper, cfg }, State::U(u)) => {
            let frame = LinearizationFrame::linearize(*form, u)?;
            let r = stepper.step(&frame, h_step, cfg)?;
            *u = r.u_next;
            Ok(Some(r.stats))
        }
        (Engine::Rk4 { form }, State::U(u)) => {
            *u = rk4_step(*form, u, h_step)?;
            Ok(None)
        }
        (Engine::Bdf1 { form, newton }, State::U(u)) => {
            *u = bdf1_step(*form, u, h_step, newton)?;
            Ok(None)
        }
        (Engine::Imex { form, split }, State::U(u)) => {
            *u = if h_step == h_run { split.step(u)? } else { imex_step(form, u, h_step)? };
            Ok(None)
        }
        (Engine::Verlet { asm }, State::Xv(x, v)) => {
            let accel = |xx: &DVector<f64>, vv: &DVector<f64>| asm.acceleration(xx, vv);
            let (xn, vn) = verlet_step(&accel, x, v, h_step)?;
            *x = xn;
            *v = vn;
            Ok(None)
        }
        _ => unreachable!("state kind is fixed per engine"),
    }
}

fn fmt_f64(x: f64) -> String {
    // shortest round-trip representation; deterministic across runs
    format!("{x}")
}

/// Renders the versioned trace CSV. Without `timing` the bytes depend only
/// on the scene and config.
pub fn trace_csv(cfg: &RunConfig, rows: &[TraceRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {TRACE_VERSION}");
    let _ = writeln!(
        out,
        "# scene={} integrator={} h={} t_end={} krylov_tol={:e} seed={} cadence={} timing={}",
        cfg.scene.display(),
        cfg.integrator,
        fmt_f64(cfg.h),
        fmt_f64(cfg.t_end),
        cfg.krylov_tol,
        cfg.seed,
        cfg.cadence,
        if cfg.timing { "on" } else { "off" },
    );
    let _ = writeln!(
        out,
        "# krylov columns aggregate all steps since the previous row; wall_ms is empty unless timing is on"
    );
    let _ = writeln!(
        out,
        "step,t,kinetic,elastic,external,total,state_norm,substeps,matvecs,skipped,rejections,max_dim,wall_ms"
    );
    for r in rows {
        let wall = r.wall_ms.map(|w| format!("{w:.3}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.step,
            fmt_f64(r.t),
            fmt_f64(r.kinetic),
            fmt_f64(r.elastic),
            fmt_f64(r.external),
            fmt_f64(r.total),
            fmt_f64(r.state_norm),
            r.substeps,
            r.matvecs,
            r.skipped,
            r.rejections,
            r.max_dim,
            wall,
        );
    }
    out
}
