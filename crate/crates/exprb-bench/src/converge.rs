//! Convergence studies: run an integrator list over a step-size ladder,
//! measure final-state errors against a fine reference, and fit log-log
//! slopes.

use crate::config::{IntegratorKind, RunConfig};
use crate::runner::run_system;
use exprb::oscillators::ParticleSystem;
use exprb::{Error, Result};
use serde::Serialize;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub const CONVERGE_VERSION: &str = "exprb-converge v1";

/// Reference solutions are always exprb42 at `min(hs)/16` with this Krylov
/// tolerance; the choice is recorded in every output.
pub const REFERENCE_KRYLOV_TOL: f64 = 1e-12;
pub const REFERENCE_REFINEMENT: f64 = 16.0;

#[derive(Clone, Debug)]
pub struct ConvergeConfig {
    pub integrators: Vec<IntegratorKind>,
    pub hs: Vec<f64>,
    pub t_end: f64,
    /// Tolerance for the *measured* runs (the reference has its own).
    pub krylov_tol: f64,
    pub threads: usize,
    /// Label recorded in outputs.
    pub scene_label: String,
}

impl ConvergeConfig {
    pub fn new(integrators: Vec<IntegratorKind>, hs: Vec<f64>, t_end: f64) -> Self {
        Self {
            integrators,
            hs,
            t_end,
            krylov_tol: 1e-8,
            threads: 1,
            scene_label: "inline".into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.integrators.is_empty() {
            return Err(Error::InvalidArg("at least one integrator required".into()));
        }
        if self.hs.len() < 3 {
            return Err(Error::InvalidArg(format!(
                "a convergence study needs at least 3 step sizes, got {}",
                self.hs.len()
            )));
        }
        if self.hs.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
            return Err(Error::InvalidArg("step sizes must be positive".into()));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidArg(format!("t_end must be positive, got {}", self.t_end)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergeRow {
    pub integrator: IntegratorKind,
    pub h: f64,
    /// `None` when the run diverged (marked, excluded from the fit).
    pub rel_err: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlopeFit {
    pub integrator: IntegratorKind,
    /// Least-squares slope of `ln err` vs `ln h`; `None` with < 2 usable
    /// points.
    pub slope: Option<f64>,
    pub points: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergeOutput {
    pub scene: String,
    pub t_end: f64,
    pub krylov_tol: f64,
    pub reference_integrator: &'static str,
    pub reference_h: f64,
    pub reference_krylov_tol: f64,
    pub rows: Vec<ConvergeRow>,
    pub fits: Vec<SlopeFit>,
}

/// Resolves the worker count: explicit flag, then the `EXPRB_BENCH_THREADS`
/// environment variable, then 1 (single-thread mode).
pub fn thread_count(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var("EXPRB_BENCH_THREADS").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(1)
        .max(1)
}

fn is_divergence(e: &Error) -> bool {
    matches!(
        e,
        Error::NonFinite(_)
            | Error::MaxIter(_)
            | Error::KrylovBudget(_)
            | Error::NewtonDiverged(_)
            | Error::LinearSolve(_)
    )
}

fn run_once(
    system: &ParticleSystem,
    label: &str,
    kind: IntegratorKind,
    h: f64,
    t_end: f64,
    tol: f64,
) -> Result<Option<(nalgebra::DVector<f64>, nalgebra::DVector<f64>)>> {
    let mut cfg = RunConfig::new(label, kind, h, t_end);
    cfg.krylov_tol = tol;
    cfg.cadence = usize::MAX; // only the landing row is kept
    match run_system(system, &cfg) {
        Ok(out) => Ok(Some(out.final_xv().clone())),
        Err(e) if is_divergence(&e) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Runs the study on an in-memory scene. Jobs are independent; with
/// `threads > 1` they run on a scoped worker pool, and because each job is
/// itself single-threaded and results are placed by job index, the output is
/// identical regardless of the worker count.
pub fn converge_system(system: &ParticleSystem, cfg: &ConvergeConfig) -> Result<ConvergeOutput> {
    cfg.validate()?;
    let mut hs = cfg.hs.clone();
    hs.sort_by(|a, b| b.partial_cmp(a).expect("validated finite"));
    hs.dedup();

    let h_ref = hs.last().unwrap() / REFERENCE_REFINEMENT;
    let reference = run_once(
        system,
        &cfg.scene_label,
        IntegratorKind::Exprb42,
        h_ref,
        cfg.t_end,
        REFERENCE_KRYLOV_TOL,
    )?
    .ok_or_else(|| {
        Error::NonFinite(format!("the reference run itself diverged at h = {h_ref:.3e}"))
    })?;
    let ref_norm = (reference.0.norm_squared() + reference.1.norm_squared()).sqrt();

    let jobs: Vec<(IntegratorKind, f64)> = cfg
        .integrators
        .iter()
        .flat_map(|&k| hs.iter().map(move |&h| (k, h)))
        .collect();

    let results: Vec<Result<Option<f64>>> = {
        let measure = |&(kind, h): &(IntegratorKind, f64)| -> Result<Option<f64>> {
            let xv = run_once(system, &cfg.scene_label, kind, h, cfg.t_end, cfg.krylov_tol)?;
            Ok(xv.map(|(x, v)| {
                ((&x - &reference.0).norm_squared() + (&v - &reference.1).norm_squared()).sqrt()
                    / ref_norm
            }))
        };
        let workers = cfg.threads.min(jobs.len()).max(1);
        if workers == 1 {
            jobs.iter().map(measure).collect()
        } else {
            let slots: Mutex<Vec<Option<Result<Option<f64>>>>> =
                Mutex::new((0..jobs.len()).map(|_| None).collect());
            let next = AtomicUsize::new(0);
            std::thread::scope(|scope| {
                for _ in 0..workers {
                    scope.spawn(|| loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= jobs.len() {
                            break;
                        }
                        let r = measure(&jobs[i]);
                        slots.lock().expect("worker poisoned the slots")[i] = Some(r);
                    });
                }
            });
            slots
                .into_inner()
                .expect("workers joined")
                .into_iter()
                .map(|slot| slot.expect("every job index was claimed"))
                .collect()
        }
    };

    let mut rows = Vec::with_capacity(jobs.len());
    for ((kind, h), result) in jobs.into_iter().zip(results) {
        rows.push(ConvergeRow { integrator: kind, h, rel_err: result? });
    }

    let fits = cfg
        .integrators
        .iter()
        .map(|&kind| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.integrator == kind)
                .filter_map(|r| r.rel_err.map(|e| (r.h, e)))
                .filter(|&(_, e)| e > 0.0)
                .collect();
            let slope = (pts.len() >= 2).then(|| fit_loglog(&pts));
            SlopeFit { integrator: kind, slope, points: pts.len() }
        })
        .collect();

    Ok(ConvergeOutput {
        scene: cfg.scene_label.clone(),
        t_end: cfg.t_end,
        krylov_tol: cfg.krylov_tol,
        reference_integrator: "exprb42",
        reference_h: h_ref,
        reference_krylov_tol: REFERENCE_KRYLOV_TOL,
        rows,
        fits,
    })
}

fn fit_loglog(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|&(h, _)| h.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, e)| e.ln()).collect();
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let den: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    num / den
}

/// Renders the error table as versioned CSV.
pub fn converge_csv(out: &ConvergeOutput) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {CONVERGE_VERSION}");
    let _ = writeln!(
        s,
        "# scene={} t_end={} krylov_tol={:e} reference={} h_ref={} (min h / {}) reference_krylov_tol={:e}",
        out.scene,
        out.t_end,
        out.krylov_tol,
        out.reference_integrator,
        out.reference_h,
        REFERENCE_REFINEMENT,
        out.reference_krylov_tol,
    );
    let _ = writeln!(s, "integrator,h,rel_err,status");
    for r in &out.rows {
        match r.rel_err {
            Some(e) => {
                let _ = writeln!(s, "{},{},{},ok", r.integrator, r.h, e);
            }
            None => {
                let _ = writeln!(s, "{},{},,diverged", r.integrator, r.h);
            }
        }
    }
    s
}
