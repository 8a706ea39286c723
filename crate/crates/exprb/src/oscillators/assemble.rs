//! Assembly of a validated scene into the matrix form `x'' = -A x + g(x)`.
//!
//! `K` is the zero-rest-length spring Laplacian over free DOFs (3x3 identity
//! blocks weighted by the stiffness, plus a diagonal anchor block for springs
//! ending in a fixed particle). Everything else — rest-length corrections,
//! anchor constants, gravity, drag — lands in `g`, so `-A x + g(x, v)` equals
//! the true per-particle force law identically, not just to leading order.

use super::energy::EnergyReport;
use super::scene::ParticleSystem;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector, Vector3};

/// A scene reduced to free degrees of freedom. Immutable after construction;
/// free particles keep their original relative order, three coordinates each.
#[derive(Debug)]
pub struct AssembledSystem {
    system: ParticleSystem,
    free: Vec<usize>,
    slot_of: Vec<Option<usize>>,
    k_mat: DMatrix<f64>,
    a_mat: DMatrix<f64>,
}

pub fn assemble(system: &ParticleSystem) -> Result<AssembledSystem> {
    system.validate()?;
    let n = system.particles.len();
    let free: Vec<usize> =
        (0..n).filter(|&i| !system.particles[i].fixed).collect();
    if free.is_empty() {
        return Err(Error::InvalidScene("every particle is fixed; no free degrees of freedom".into()));
    }
    let mut slot_of = vec![None; n];
    for (slot, &p) in free.iter().enumerate() {
        slot_of[p] = Some(slot);
    }

    check_components(system, &free, &slot_of)?;

    let nf = free.len();
    let dim = 3 * nf;
    let mut k_mat = DMatrix::zeros(dim, dim);
    for s in &system.springs {
        match (slot_of[s.i], slot_of[s.j]) {
            (Some(a), Some(b)) => {
                for r in 0..3 {
                    k_mat[(3 * a + r, 3 * a + r)] += s.stiffness;
                    k_mat[(3 * b + r, 3 * b + r)] += s.stiffness;
                    k_mat[(3 * a + r, 3 * b + r)] -= s.stiffness;
                    k_mat[(3 * b + r, 3 * a + r)] -= s.stiffness;
                }
            }
            (Some(a), None) | (None, Some(a)) => {
                for r in 0..3 {
                    k_mat[(3 * a + r, 3 * a + r)] += s.stiffness;
                }
            }
            (None, None) => {}
        }
    }

    let mut a_mat = k_mat.clone();
    for (slot, &p) in free.iter().enumerate() {
        let inv_m = 1.0 / system.particles[p].mass;
        for r in 0..3 {
            let mut row = a_mat.row_mut(3 * slot + r);
            row *= inv_m;
        }
    }

    Ok(AssembledSystem { system: system.clone(), free, slot_of, k_mat, a_mat })
}

/// Every connected component of the free-spring graph must touch an anchor
/// (else the zero-rest-length Laplacian is singular) and must have one mass
/// (else `M^{-1} K` is not symmetric and the square root is undefined).
fn check_components(
    system: &ParticleSystem,
    free: &[usize],
    slot_of: &[Option<usize>],
) -> Result<()> {
    let nf = free.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nf];
    let mut anchored = vec![false; nf];
    for s in &system.springs {
        match (slot_of[s.i], slot_of[s.j]) {
            (Some(a), Some(b)) => {
                adj[a].push(b);
                adj[b].push(a);
            }
            (Some(a), None) | (None, Some(a)) => anchored[a] = true,
            (None, None) => {}
        }
    }
    let mut seen = vec![false; nf];
    for start in 0..nf {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut component = Vec::new();
        let mut has_anchor = false;
        while let Some(v) = stack.pop() {
            component.push(v);
            has_anchor |= anchored[v];
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        if !has_anchor {
            return Err(Error::InvalidScene(format!(
                "free particles {:?} form a component with no spring to a fixed particle; \
                 the stiffness matrix is singular (translation mode)",
                component.iter().map(|&v| free[v]).collect::<Vec<_>>()
            )));
        }
        let m0 = system.particles[free[component[0]]].mass;
        for &v in &component[1..] {
            let m = system.particles[free[v]].mass;
            if m != m0 {
                return Err(Error::InvalidScene(format!(
                    "particles {} and {} are spring-connected but have masses {} and {}; \
                     connected free particles must share a mass so that A = M^-1 K stays symmetric",
                    free[component[0]], free[v], m0, m
                )));
            }
        }
    }
    Ok(())
}

impl AssembledSystem {
    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    /// Number of free coordinates (3 per free particle).
    pub fn dim(&self) -> usize {
        3 * self.free.len()
    }

    pub fn system(&self) -> &ParticleSystem {
        &self.system
    }

    /// Original particle indices of the free slots, ascending.
    pub fn free_particles(&self) -> &[usize] {
        &self.free
    }

    pub fn k_matrix(&self) -> &DMatrix<f64> {
        &self.k_mat
    }

    pub fn a_matrix(&self) -> &DMatrix<f64> {
        &self.a_mat
    }

    pub fn free_mass(&self, slot: usize) -> f64 {
        self.system.particles[self.free[slot]].mass
    }

    /// Initial `(x0, v0)` gathered from the scene.
    pub fn gather_state(&self) -> (DVector<f64>, DVector<f64>) {
        let dim = self.dim();
        let mut x = DVector::zeros(dim);
        let mut v = DVector::zeros(dim);
        for (slot, &p) in self.free.iter().enumerate() {
            let part = &self.system.particles[p];
            for r in 0..3 {
                x[3 * slot + r] = part.position[r];
                v[3 * slot + r] = part.velocity[r];
            }
        }
        (x, v)
    }

    fn position_of(&self, x: &DVector<f64>, particle: usize) -> Vector3<f64> {
        match self.slot_of[particle] {
            Some(slot) => Vector3::new(x[3 * slot], x[3 * slot + 1], x[3 * slot + 2]),
            None => self.system.particles[particle].position,
        }
    }

    /// The nonlinear residual: rest-length corrections, anchor constants and
    /// external forces, divided by the particle mass, so that the equation of
    /// motion is exactly `x'' = -A x + g(x, v)`.
    pub fn g(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let dim = self.dim();
        assert_eq!(x.len(), dim, "position vector length");
        assert_eq!(v.len(), dim, "velocity vector length");
        let mut force = vec![Vector3::<f64>::zeros(); self.free.len()];

        for s in &self.system.springs {
            let (si, sj) = (self.slot_of[s.i], self.slot_of[s.j]);
            if si.is_none() && sj.is_none() {
                continue;
            }
            if s.rest_length > 0.0 {
                let d = self.position_of(x, s.i) - self.position_of(x, s.j);
                let r = d.norm();
                if r > 0.0 {
                    // f_i = -k (|d| - l) d/|d| = -k d + k l d/|d|; the first
                    // term is K's, the second is ours.
                    let c = d * (s.stiffness * s.rest_length / r);
                    if let Some(a) = si {
                        force[a] += c;
                    }
                    if let Some(b) = sj {
                        force[b] -= c;
                    }
                }
            }
            // Anchor constant: -k (x_free - p_fixed) leaves +k p_fixed beyond
            // the diagonal block K carries.
            match (si, sj) {
                (Some(a), None) => force[a] += s.stiffness * self.system.particles[s.j].position,
                (None, Some(b)) => force[b] += s.stiffness * self.system.particles[s.i].position,
                _ => {}
            }
        }

        if let Some(grav) = self.system.external.gravity {
            for (slot, &p) in self.free.iter().enumerate() {
                force[slot] += self.system.particles[p].mass * grav;
            }
        }
        if let Some(c) = self.system.external.drag {
            for slot in 0..self.free.len() {
                let vel = Vector3::new(v[3 * slot], v[3 * slot + 1], v[3 * slot + 2]);
                force[slot] -= c * vel;
            }
        }

        let mut out = DVector::zeros(dim);
        for (slot, &p) in self.free.iter().enumerate() {
            let inv_m = 1.0 / self.system.particles[p].mass;
            for r in 0..3 {
                out[3 * slot + r] = force[slot][r] * inv_m;
            }
        }
        out
    }

    /// `x'' = -A x + g(x, v)`.
    pub fn acceleration(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let mut acc = self.g(x, v);
        acc.gemv(-1.0, &self.a_mat, x, 1.0);
        acc
    }

    /// Analytic `dg/dx`. Only rest-length corrections contribute: per spring
    /// the block `(k l / r)(I - u u^T)` with `u = d/|d|`, mass-scaled per row.
    pub fn g_position_jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let dim = self.dim();
        assert_eq!(x.len(), dim, "position vector length");
        let mut jac = DMatrix::zeros(dim, dim);
        for s in &self.system.springs {
            if s.rest_length == 0.0 {
                continue;
            }
            let (si, sj) = (self.slot_of[s.i], self.slot_of[s.j]);
            if si.is_none() && sj.is_none() {
                continue;
            }
            let d = self.position_of(x, s.i) - self.position_of(x, s.j);
            let r = d.norm();
            if r == 0.0 {
                continue;
            }
            let u = d / r;
            let scale = s.stiffness * s.rest_length / r;
            let mut block = [[0.0; 3]; 3];
            for p in 0..3 {
                for q in 0..3 {
                    block[p][q] = scale * ((p == q) as usize as f64 - u[p] * u[q]);
                }
            }
            let mut add = |a: usize, b: usize, sign: f64| {
                for p in 0..3 {
                    for q in 0..3 {
                        jac[(3 * a + p, 3 * b + q)] += sign * block[p][q];
                    }
                }
            };
            match (si, sj) {
                (Some(a), Some(b)) => {
                    add(a, a, 1.0);
                    add(b, b, 1.0);
                    add(a, b, -1.0);
                    add(b, a, -1.0);
                }
                (Some(a), None) | (None, Some(a)) => add(a, a, 1.0),
                (None, None) => unreachable!(),
            }
        }
        for (slot, &p) in self.free.iter().enumerate() {
            let inv_m = 1.0 / self.system.particles[p].mass;
            for r in 0..3 {
                let mut row = jac.row_mut(3 * slot + r);
                row *= inv_m;
            }
        }
        jac
    }

    /// Per-DOF diagonal of `dg/dv` (drag only), or None without drag.
    pub fn velocity_jacobian_diag(&self) -> Option<DVector<f64>> {
        let c = self.system.external.drag?;
        if c == 0.0 {
            return None;
        }
        let mut diag = DVector::zeros(self.dim());
        for (slot, &p) in self.free.iter().enumerate() {
            let val = -c / self.system.particles[p].mass;
            for r in 0..3 {
                diag[3 * slot + r] = val;
            }
        }
        Some(diag)
    }

    /// Energy of the state. Elastic and gravity terms run over all particles
    /// (fixed ones contribute constants), kinetic only over free ones since
    /// fixed particles are static.
    pub fn energy_xv(&self, x: &DVector<f64>, v: &DVector<f64>) -> EnergyReport {
        let mut kinetic = 0.0;
        for (slot, &p) in self.free.iter().enumerate() {
            let vel = Vector3::new(v[3 * slot], v[3 * slot + 1], v[3 * slot + 2]);
            kinetic += 0.5 * self.system.particles[p].mass * vel.norm_squared();
        }
        let mut elastic = 0.0;
        for s in &self.system.springs {
            let d = self.position_of(x, s.i) - self.position_of(x, s.j);
            let stretch = d.norm() - s.rest_length;
            elastic += 0.5 * s.stiffness * stretch * stretch;
        }
        let mut external = 0.0;
        if let Some(grav) = self.system.external.gravity {
            for (idx, part) in self.system.particles.iter().enumerate() {
                external -= part.mass * grav.dot(&self.position_of(x, idx));
            }
        }
        EnergyReport { kinetic, elastic, external }
    }
}
