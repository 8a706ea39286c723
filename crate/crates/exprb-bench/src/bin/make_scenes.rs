//! Regenerates the scene files shipped under `scenes/`.
//!
//! Every scene is produced from the library builders plus deterministic
//! velocity kicks, so the JSON in the repository can always be rebuilt
//! byte-for-byte with `cargo run --bin make_scenes -- <dir>`.

use clap::Parser;
use exprb::oscillators::{save_scene, scene_chain, scene_lattice, ChainEnds, ParticleSystem};
use nalgebra::Vector3;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "make_scenes", about = "Write the bundled benchmark scenes")]
struct Cli {
    /// Output directory
    #[arg(default_value = "scenes")]
    out: PathBuf,
}

/// Deterministic per-particle velocity kick; fixed particles stay at rest.
fn kick(system: &mut ParticleSystem, f: impl Fn(usize) -> Vector3<f64>) {
    for (i, p) in system.particles.iter_mut().enumerate() {
        if !p.fixed {
            p.velocity = f(i);
        }
    }
}

/// Soft 8-particle hanging chain; quick smoke-test scene.
fn chain_small() -> ParticleSystem {
    let mut sys = scene_chain(8, 100.0, 0.5, 1.0, ChainEnds::FixFirst).expect("valid scene");
    sys.external.gravity = Some(Vector3::new(0.0, 0.0, -9.81));
    sys
}

/// 100-particle chain with k = 1e6 springs at their rest spacing, hanging
/// under gravity with a mixed axial/transverse kick. The axial component
/// drives nonlinear motion at the stiff frequencies and the transverse
/// components bend the chain, so convergence studies see the full problem,
/// not just its linearization. 99 free particles keep the first-order
/// dimension (594) assembled from 297 positions within the dense
/// square-root limit.
fn chain_stiff() -> ParticleSystem {
    let mut sys = scene_chain(100, 1.0e6, 0.1, 10.0, ChainEnds::FixFirst).expect("valid scene");
    sys.external.gravity = Some(Vector3::new(0.0, 0.0, -9.81));
    kick(&mut sys, |i| {
        let s = i as f64;
        Vector3::new(
            0.15 * (0.9 * s + 0.2).sin(),
            0.1 * (1.3 * s + 0.7).sin(),
            0.05 * (2.1 * s).cos(),
        )
    });
    sys
}

/// 3x3x3 lattice, bottom layer pinned, no gravity, started by a velocity
/// kick. The springs sit at their rest lengths, so the total energy at t = 0
/// is purely kinetic and strictly positive - the reference scene for
/// energy-drift measurements. The top mode is near 62 rad/s, putting an
/// h = 0.05 step just past the rk4 stability limit while the exponential
/// integrators still resolve the nonlinear remainder.
fn lattice_kicked() -> ParticleSystem {
    let mut sys = scene_lattice(3, 3, 3, 100.0, 10.0, 0.5, 1.0, true).expect("valid scene");
    kick(&mut sys, |i| {
        let s = i as f64;
        0.5 * Vector3::new(
            (0.7 * s + 0.3).sin(),
            (1.3 * s + 1.1).sin(),
            (2.1 * s + 2.0).sin(),
        )
    });
    sys
}

/// Exactly linear problem: zero-rest-length springs make the force globally
/// linear in the positions, and the fixed endpoint sits at the origin so no
/// constant term appears. Unit spacing leaves the chain stretched, which
/// excites every mode. Top frequency is near 1e3 rad/s.
fn chain_linear() -> ParticleSystem {
    scene_chain(10, 2.5e5, 0.0, 1.0, ChainEnds::FixFirst).expect("valid scene")
}

fn main() {
    let cli = Cli::parse();
    std::fs::create_dir_all(&cli.out).expect("create output directory");
    let scenes: [(&str, ParticleSystem); 4] = [
        ("chain-small.json", chain_small()),
        ("chain-stiff.json", chain_stiff()),
        ("lattice-kicked.json", lattice_kicked()),
        ("chain-linear.json", chain_linear()),
    ];
    for (name, sys) in scenes {
        let path = cli.out.join(name);
        save_scene(&path, &sys).expect("write scene");
        println!(
            "{}: {} particles, {} springs",
            path.display(),
            sys.n_particles(),
            sys.springs.len()
        );
    }
}
