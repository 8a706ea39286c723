//! Particle-system scenes: masses, springs, external forces, and the
//! deterministic chain/lattice builders used by the benchmarks.

use crate::{Error, Result};
use nalgebra::Vector3;

/// A point mass. Fixed particles keep their position for all time and must
/// carry zero velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct Particle {
    pub mass: f64,
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub fixed: bool,
}

/// An undirected spring between particles `i` and `j`. Each pair is listed
/// once; neighbor symmetry is implied by the edge representation.
#[derive(Clone, Debug, PartialEq)]
pub struct Spring {
    pub i: usize,
    pub j: usize,
    pub stiffness: f64,
    pub rest_length: f64,
}

/// External forces: uniform gravity (conservative, enters the energy budget)
/// and an optional linear drag `-c v` per particle. Drag is the only
/// velocity-dependent hook and is excluded from energy accounting.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct External {
    pub gravity: Option<Vector3<f64>>,
    pub drag: Option<f64>,
}

/// A complete scene. Plain data; [`ParticleSystem::validate`] is the
/// gatekeeper and is called by assembly and by the JSON loader.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleSystem {
    pub particles: Vec<Particle>,
    pub springs: Vec<Spring>,
    pub external: External,
}

impl ParticleSystem {
    pub fn new(particles: Vec<Particle>, springs: Vec<Spring>, external: External) -> Self {
        Self { particles, springs, external }
    }

    pub fn n_particles(&self) -> usize {
        self.particles.len()
    }

    /// Checks every structural invariant, reporting the first violation with
    /// an indexed field path (`particles[3].mass: ...`).
    pub fn validate(&self) -> Result<()> {
        if self.particles.is_empty() {
            return Err(Error::InvalidScene("scene has no particles".into()));
        }
        let n = self.particles.len();
        for (idx, p) in self.particles.iter().enumerate() {
            if !(p.mass > 0.0 && p.mass.is_finite()) {
                return Err(Error::InvalidScene(format!(
                    "particles[{idx}].mass: must be positive and finite, got {}",
                    p.mass
                )));
            }
            if !p.position.iter().all(|c| c.is_finite()) || !p.velocity.iter().all(|c| c.is_finite())
            {
                return Err(Error::InvalidScene(format!(
                    "particles[{idx}]: position/velocity must be finite"
                )));
            }
            if p.fixed && p.velocity.norm() != 0.0 {
                return Err(Error::InvalidScene(format!(
                    "particles[{idx}].velocity: fixed particles must have zero velocity"
                )));
            }
        }
        for (idx, s) in self.springs.iter().enumerate() {
            if s.i >= n || s.j >= n {
                return Err(Error::InvalidScene(format!(
                    "springs[{idx}]: particle index out of range (i={}, j={}, n={n})",
                    s.i, s.j
                )));
            }
            if s.i == s.j {
                return Err(Error::InvalidScene(format!(
                    "springs[{idx}]: endpoints must be distinct (both {})",
                    s.i
                )));
            }
            if !(s.stiffness > 0.0 && s.stiffness.is_finite()) {
                return Err(Error::InvalidScene(format!(
                    "springs[{idx}].k: must be positive and finite, got {}",
                    s.stiffness
                )));
            }
            if !(s.rest_length >= 0.0 && s.rest_length.is_finite()) {
                return Err(Error::InvalidScene(format!(
                    "springs[{idx}].rest_length: must be nonnegative and finite, got {}",
                    s.rest_length
                )));
            }
        }
        if let Some(g) = self.external.gravity {
            if !g.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidScene("external.gravity: must be finite".into()));
            }
        }
        if let Some(c) = self.external.drag {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::InvalidScene(format!(
                    "external.drag: must be nonnegative and finite, got {c}"
                )));
            }
        }
        Ok(())
    }
}

/// Which ends of a chain are pinned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainEnds {
    Free,
    FixFirst,
    FixLast,
    FixBoth,
}

/// A linear chain of `n` particles along +x, consecutive pairs joined by
/// identical springs. Particle `i` sits at `x = i * s` with spacing
/// `s = rest_length`, or unit spacing when the rest length is zero (keeps
/// endpoints distinct and gives zero-rest-length scenes a stretched start).
pub fn scene_chain(
    n: usize,
    stiffness: f64,
    rest_length: f64,
    mass: f64,
    ends: ChainEnds,
) -> Result<ParticleSystem> {
    if n < 2 {
        return Err(Error::InvalidScene(format!("chain needs at least 2 particles, got {n}")));
    }
    check_positive("chain stiffness", stiffness)?;
    check_positive("chain mass", mass)?;
    if !(rest_length >= 0.0 && rest_length.is_finite()) {
        return Err(Error::InvalidScene(format!(
            "chain rest length must be nonnegative, got {rest_length}"
        )));
    }
    let spacing = if rest_length > 0.0 { rest_length } else { 1.0 };
    let fix_first = matches!(ends, ChainEnds::FixFirst | ChainEnds::FixBoth);
    let fix_last = matches!(ends, ChainEnds::FixLast | ChainEnds::FixBoth);
    let particles = (0..n)
        .map(|i| Particle {
            mass,
            position: Vector3::new(i as f64 * spacing, 0.0, 0.0),
            velocity: Vector3::zeros(),
            fixed: (i == 0 && fix_first) || (i == n - 1 && fix_last),
        })
        .collect();
    let springs = (0..n - 1)
        .map(|i| Spring { i, j: i + 1, stiffness, rest_length })
        .collect();
    Ok(ParticleSystem::new(particles, springs, External::default()))
}

/// An `nx x ny x nz` grid of particles with spacing `spacing`, structural
/// springs along the axes (rest length = spacing) and, when `k_diag > 0`,
/// both diagonals of every axis-aligned face (rest length = spacing * sqrt 2).
/// Node order: index `ix + nx * (iy + ny * iz)`, x fastest. `fix_min_z` pins
/// the whole `iz = 0` layer.
pub fn scene_lattice(
    nx: usize,
    ny: usize,
    nz: usize,
    k_struct: f64,
    k_diag: f64,
    spacing: f64,
    mass: f64,
    fix_min_z: bool,
) -> Result<ParticleSystem> {
    if nx == 0 || ny == 0 || nz == 0 || nx * ny * nz < 2 {
        return Err(Error::InvalidScene(format!(
            "lattice dimensions must be positive with at least 2 particles, got {nx}x{ny}x{nz}"
        )));
    }
    check_positive("lattice structural stiffness", k_struct)?;
    check_positive("lattice spacing", spacing)?;
    check_positive("lattice mass", mass)?;
    if !(k_diag >= 0.0 && k_diag.is_finite()) {
        return Err(Error::InvalidScene(format!(
            "lattice diagonal stiffness must be nonnegative, got {k_diag}"
        )));
    }

    let id = |ix: usize, iy: usize, iz: usize| ix + nx * (iy + ny * iz);
    let mut particles = Vec::with_capacity(nx * ny * nz);
    for iz in 0..nz {
        for iy in 0..ny {
            for ix in 0..nx {
                particles.push(Particle {
                    mass,
                    position: Vector3::new(
                        ix as f64 * spacing,
                        iy as f64 * spacing,
                        iz as f64 * spacing,
                    ),
                    velocity: Vector3::zeros(),
                    fixed: fix_min_z && iz == 0,
                });
            }
        }
    }

    let mut springs = Vec::new();
    let mut add = |a: usize, b: usize, k: f64, rest: f64| {
        springs.push(Spring { i: a.min(b), j: a.max(b), stiffness: k, rest_length: rest });
    };
    for iz in 0..nz {
        for iy in 0..ny {
            for ix in 0..nx {
                if ix + 1 < nx {
                    add(id(ix, iy, iz), id(ix + 1, iy, iz), k_struct, spacing);
                }
                if iy + 1 < ny {
                    add(id(ix, iy, iz), id(ix, iy + 1, iz), k_struct, spacing);
                }
                if iz + 1 < nz {
                    add(id(ix, iy, iz), id(ix, iy, iz + 1), k_struct, spacing);
                }
            }
        }
    }
    if k_diag > 0.0 {
        let rest = spacing * std::f64::consts::SQRT_2;
        for iz in 0..nz {
            for iy in 0..ny {
                for ix in 0..nx {
                    // xy faces
                    if ix + 1 < nx && iy + 1 < ny {
                        add(id(ix, iy, iz), id(ix + 1, iy + 1, iz), k_diag, rest);
                        add(id(ix + 1, iy, iz), id(ix, iy + 1, iz), k_diag, rest);
                    }
                    // xz faces
                    if ix + 1 < nx && iz + 1 < nz {
                        add(id(ix, iy, iz), id(ix + 1, iy, iz + 1), k_diag, rest);
                        add(id(ix + 1, iy, iz), id(ix, iy, iz + 1), k_diag, rest);
                    }
                    // yz faces
                    if iy + 1 < ny && iz + 1 < nz {
                        add(id(ix, iy, iz), id(ix, iy + 1, iz + 1), k_diag, rest);
                        add(id(ix, iy + 1, iz), id(ix, iy, iz + 1), k_diag, rest);
                    }
                }
            }
        }
    }
    Ok(ParticleSystem::new(particles, springs, External::default()))
}

fn check_positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidScene(format!("{what} must be positive and finite, got {v}")))
    }
}
