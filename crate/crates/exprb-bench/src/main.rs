//! `exprb-bench` — scene runner and measurement CLI.
//!
//! Subcommands: `run` (trace one trajectory), `converge` (error-vs-h study),
//! `stability` (bisect the largest stable step), `verify` (order-condition
//! residuals), `scene-check` (validate and summarize a scene file).
//!
//! Outputs are deterministic byte-for-byte for a fixed config and seed as
//! long as `--timing` stays off. `EXPRB_BENCH_THREADS` (or `--threads`)
//! parallelizes convergence sweeps without changing any output bytes.

use clap::{Args, Parser, Subcommand};
use exprb_bench::config::{IntegratorKind, RunConfig};
use exprb_bench::converge::{converge_csv, converge_system, thread_count, ConvergeConfig};
use exprb_bench::runner::{run_system, trace_csv};
use exprb_bench::stability::{bisect_stability, scene_stability_probe};
use exprb_bench::verify::{corrupted_scheme_residual, verify_builtin_schemes};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "exprb-bench", version, about = "Benchmark driver for the exprb toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one integrator over a scene and emit a trace CSV plus a JSON
    /// summary
    Run(RunArgs),
    /// Error-vs-h study against an exprb42 reference at min(h)/16
    Converge(ConvergeArgs),
    /// Bisect the largest stable step size between a bracketing pair
    Stability(StabilityArgs),
    /// Verify the stiff order conditions of the built-in schemes
    Verify(VerifyArgs),
    /// Validate a scene file and print its assembled shape
    SceneCheck(SceneCheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scene JSON file
    scene: PathBuf,
    #[arg(long, default_value = "exprb42")]
    integrator: IntegratorKind,
    /// Step size
    #[arg(long)]
    h: f64,
    /// Simulated end time
    #[arg(long)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-8)]
    krylov_tol: f64,
    /// Emit a trace row every N steps (initial and final rows always appear)
    #[arg(long, default_value_t = 1)]
    cadence: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fill the wall-clock column (breaks bit-identical output)
    #[arg(long)]
    timing: bool,
    /// Write the trace CSV here instead of stdout
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the JSON summary here (default: stderr when the trace goes to
    /// stdout, stdout otherwise)
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    scene: PathBuf,
    /// Comma-separated integrator list
    #[arg(long, value_delimiter = ',', default_value = "exprb-euler,exprb42,pexprb43")]
    integrators: Vec<IntegratorKind>,
    /// Comma-separated step sizes (at least 3)
    #[arg(long, value_delimiter = ',', required = true)]
    hs: Vec<f64>,
    #[arg(long)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-8)]
    krylov_tol: f64,
    /// Worker threads (default: EXPRB_BENCH_THREADS, then 1)
    #[arg(long)]
    threads: Option<usize>,
    /// Write the error table CSV here instead of stdout
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct StabilityArgs {
    scene: PathBuf,
    #[arg(long)]
    integrator: IntegratorKind,
    /// Step size known (or believed) stable
    #[arg(long)]
    h_lo: f64,
    /// Step size known (or believed) unstable
    #[arg(long)]
    h_hi: f64,
    /// Horizon each probe simulates
    #[arg(long)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-8)]
    krylov_tol: f64,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    draws: usize,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct SceneCheckArgs {
    scene: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Converge(args) => cmd_converge(args),
        Cmd::Stability(args) => cmd_stability(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::SceneCheck(args) => cmd_scene_check(args),
    };
    if let Err(e) = outcome {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn write_text(path: &Option<PathBuf>, text: &str, default_to_stdout: bool) -> exprb::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| exprb::Error::SceneIo(format!("{}: {e}", p.display()))),
        None => {
            if default_to_stdout {
                print!("{text}");
            } else {
                eprint!("{text}");
            }
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable summary");
    s.push('\n');
    s
}

fn cmd_run(args: RunArgs) -> exprb::Result<()> {
    let cfg = RunConfig {
        scene: args.scene,
        integrator: args.integrator,
        h: args.h,
        t_end: args.t_end,
        krylov_tol: args.krylov_tol,
        cadence: args.cadence,
        seed: args.seed,
        timing: args.timing,
    };
    let system = exprb::oscillators::load_scene(&cfg.scene)?;
    let out = run_system(&system, &cfg)?;
    let csv = trace_csv(&cfg, &out.rows);
    let trace_to_stdout = args.trace.is_none();
    write_text(&args.trace, &csv, true)?;
    write_text(&args.summary, &to_json(&out.summary), !trace_to_stdout)?;
    Ok(())
}

fn cmd_converge(args: ConvergeArgs) -> exprb::Result<()> {
    let system = exprb::oscillators::load_scene(&args.scene)?;
    let cfg = ConvergeConfig {
        integrators: args.integrators,
        hs: args.hs,
        t_end: args.t_end,
        krylov_tol: args.krylov_tol,
        threads: thread_count(args.threads),
        scene_label: args.scene.display().to_string(),
    };
    let out = converge_system(&system, &cfg)?;
    let table_to_stdout = args.table.is_none();
    write_text(&args.table, &converge_csv(&out), true)?;
    write_text(&args.summary, &to_json(&out), !table_to_stdout)?;
    Ok(())
}

fn cmd_stability(args: StabilityArgs) -> exprb::Result<()> {
    let system = exprb::oscillators::load_scene(&args.scene)?;
    let mut probe =
        scene_stability_probe(&system, args.integrator, args.t_end, args.krylov_tol);
    let report = bisect_stability(&mut probe, args.h_lo, args.h_hi)?;
    write_text(&args.summary, &to_json(&report), true)?;
    Ok(())
}

#[derive(Serialize)]
struct VerifySummary {
    seed: u64,
    draws: usize,
    schemes: Vec<exprb_bench::verify::SchemeReport>,
    corrupted_scheme_delta: f64,
    corrupted_scheme_condition1_residual: f64,
}

fn cmd_verify(args: VerifyArgs) -> exprb::Result<()> {
    let schemes = verify_builtin_schemes(args.seed, args.draws)?;
    let delta = 1e-3;
    let corrupted = corrupted_scheme_residual(args.seed, args.draws, delta)?;
    for r in &schemes {
        eprintln!(
            "{:<12} conditions 1-4 max residuals: {:.3e} {:.3e} {:.3e} {:.3e}",
            r.scheme, r.max_residuals[0], r.max_residuals[1], r.max_residuals[2], r.max_residuals[3],
        );
    }
    eprintln!("corrupted exprb42 (b += {delta:.0e}) condition-1 residual: {corrupted:.3e}");
    let summary = VerifySummary {
        seed: args.seed,
        draws: args.draws,
        schemes,
        corrupted_scheme_delta: delta,
        corrupted_scheme_condition1_residual: corrupted,
    };
    write_text(&args.summary, &to_json(&summary), true)?;
    Ok(())
}

#[derive(Serialize)]
struct SceneCheckReport {
    scene: String,
    particles: usize,
    fixed_particles: usize,
    springs: usize,
    free_coordinates: usize,
    stiffness_norm: f64,
    has_gravity: bool,
    has_drag: bool,
}

fn cmd_scene_check(args: SceneCheckArgs) -> exprb::Result<()> {
    let system = exprb::oscillators::load_scene(&args.scene)?;
    let asm = exprb::oscillators::assemble(&system)?;
    let report = SceneCheckReport {
        scene: args.scene.display().to_string(),
        particles: system.n_particles(),
        fixed_particles: system.particles.iter().filter(|p| p.fixed).count(),
        springs: system.springs.len(),
        free_coordinates: asm.dim(),
        stiffness_norm: asm.a_matrix().norm(),
        has_gravity: system.external.gravity.is_some(),
        has_drag: system.external.drag.is_some(),
    };
    print!("{}", to_json(&report));
    Ok(())
}
