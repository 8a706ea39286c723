//! JSON scene files.
//!
//! Schema: `particles` (mass, position, optional velocity/fixed), `springs`
//! (i, j, k, optional rest_length), optional `external` (gravity, drag).
//! Unknown fields are rejected; malformed documents report line/column from
//! the parser and semantic problems carry indexed field paths.

use super::scene::{External, Particle, ParticleSystem, Spring};
use crate::{Error, Result};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    particles: Vec<ParticleRec>,
    #[serde(default)]
    springs: Vec<SpringRec>,
    #[serde(default, skip_serializing_if = "ExternalRec::is_empty")]
    external: ExternalRec,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParticleRec {
    mass: f64,
    position: [f64; 3],
    #[serde(default)]
    velocity: [f64; 3],
    #[serde(default)]
    fixed: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpringRec {
    i: usize,
    j: usize,
    k: f64,
    #[serde(default)]
    rest_length: f64,
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ExternalRec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gravity: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    drag: Option<f64>,
}

impl ExternalRec {
    fn is_empty(&self) -> bool {
        self.gravity.is_none() && self.drag.is_none()
    }
}

/// Parses and validates a scene document.
pub fn parse_scene(text: &str) -> Result<ParticleSystem> {
    let file: SceneFile =
        serde_json::from_str(text).map_err(|e| Error::SceneIo(format!("parse error: {e}")))?;
    let system = ParticleSystem::new(
        file.particles
            .into_iter()
            .map(|p| Particle {
                mass: p.mass,
                position: Vector3::from(p.position),
                velocity: Vector3::from(p.velocity),
                fixed: p.fixed,
            })
            .collect(),
        file.springs
            .into_iter()
            .map(|s| Spring { i: s.i, j: s.j, stiffness: s.k, rest_length: s.rest_length })
            .collect(),
        External {
            gravity: file.external.gravity.map(Vector3::from),
            drag: file.external.drag,
        },
    );
    system.validate()?;
    Ok(system)
}

/// Pretty-printed document for a scene; shortest-round-trip float formatting
/// makes save/load bit-exact.
pub fn scene_to_json(system: &ParticleSystem) -> String {
    let file = SceneFile {
        particles: system
            .particles
            .iter()
            .map(|p| ParticleRec {
                mass: p.mass,
                position: p.position.into(),
                velocity: p.velocity.into(),
                fixed: p.fixed,
            })
            .collect(),
        springs: system
            .springs
            .iter()
            .map(|s| SpringRec { i: s.i, j: s.j, k: s.stiffness, rest_length: s.rest_length })
            .collect(),
        external: ExternalRec {
            gravity: system.external.gravity.map(Into::into),
            drag: system.external.drag,
        },
    };
    serde_json::to_string_pretty(&file).expect("scene serialization cannot fail")
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<ParticleSystem> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::SceneIo(format!("{}: {e}", path.display())))?;
    parse_scene(&text).map_err(|e| match e {
        Error::SceneIo(msg) => Error::SceneIo(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn save_scene(path: impl AsRef<Path>, system: &ParticleSystem) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, scene_to_json(system))
        .map_err(|e| Error::SceneIo(format!("{}: {e}", path.display())))
}
