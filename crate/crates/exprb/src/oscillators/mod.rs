//! Mass-spring particle systems and their stiff first-order form.
//!
//! The pipeline is scene -> [`assemble`] -> [`to_first_order`]:
//! a validated [`ParticleSystem`] is reduced to free coordinates with
//! `x'' = -A x + g(x, v)` (exact split: `K` is the zero-rest-length spring
//! Laplacian, all rest-length nonlinearity and external forcing lives in
//! `g`), then lifted to `u = (Omega x, x')` whose linear part is the
//! skew-symmetric block operator the exponential integrators feed on.

mod assemble;
mod energy;
mod first_order;
mod json;
mod scene;

pub use assemble::{assemble, AssembledSystem};
pub use energy::EnergyReport;
pub use first_order::{to_first_order, StiffFirstOrderForm, SCHUR_DOF_LIMIT};
pub use json::{load_scene, parse_scene, save_scene, scene_to_json};
pub use scene::{
    scene_chain, scene_lattice, ChainEnds, External, Particle, ParticleSystem, Spring,
};
