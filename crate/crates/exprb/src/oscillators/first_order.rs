//! The stiff first-order reformulation `u = (Omega x, x')`.
//!
//! With `Omega = sqrt(A)` the second-order equation `x'' = -A x + g(x)`
//! becomes `u' = B u + (0, g)` where `B (w1, w2) = (Omega w2, -Omega w1)` is
//! skew-symmetric — its spectrum sits on the imaginary axis in conjugate
//! pairs, which is what lets exponential integrators take steps far beyond
//! any CFL bound. The square root is computed once per scene: spectral route
//! up to [`SCHUR_DOF_LIMIT`] coordinates, Newton iteration above it.

use super::assemble::AssembledSystem;
use super::energy::EnergyReport;
use crate::integrators::SemilinearProblem;
use crate::linop::LinearOperator;
use crate::matfunc::{sqrtm_newton, sqrtm_schur, SpdMatrix};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Largest coordinate count that still uses the spectral square root.
pub const SCHUR_DOF_LIMIT: usize = 300;

/// Residual tolerance handed to the Newton square root on large scenes.
const NEWTON_SQRT_TOL: f64 = 1e-10;

/// The assembled scene together with `Omega` and the initial state.
pub struct StiffFirstOrderForm {
    asm: AssembledSystem,
    omega: SpdMatrix,
    u0: DVector<f64>,
}

/// Builds the first-order form with `u_0 = (Omega x_0, v_0)`.
pub fn to_first_order(
    asm: AssembledSystem,
    x0: &DVector<f64>,
    v0: &DVector<f64>,
) -> Result<StiffFirstOrderForm> {
    let d = asm.dim();
    if x0.len() != d || v0.len() != d {
        return Err(Error::Dimension(format!(
            "initial state has lengths {}/{}, scene has {d} free coordinates",
            x0.len(),
            v0.len()
        )));
    }
    if !(x0.iter().all(|c| c.is_finite()) && v0.iter().all(|c| c.is_finite())) {
        return Err(Error::NonFinite("initial state".into()));
    }
    let a_spd = SpdMatrix::new(asm.a_matrix().clone())?;
    let omega = if d <= SCHUR_DOF_LIMIT {
        sqrtm_schur(&a_spd)?
    } else {
        sqrtm_newton(&a_spd, NEWTON_SQRT_TOL, 50)?
    };
    let resid = (omega.matrix() * omega.matrix() - asm.a_matrix()).norm()
        / asm.a_matrix().norm().max(f64::MIN_POSITIVE);
    if resid > 1e-10 {
        return Err(Error::MaxIter(format!(
            "square-root residual {resid:.3e} exceeds the 1e-10 contract"
        )));
    }
    let mut u0 = DVector::zeros(2 * d);
    u0.rows_mut(0, d).copy_from(&omega.apply(x0));
    u0.rows_mut(d, d).copy_from(v0);
    Ok(StiffFirstOrderForm { asm, omega, u0 })
}

impl StiffFirstOrderForm {
    pub fn assembled(&self) -> &AssembledSystem {
        &self.asm
    }

    pub fn omega(&self) -> &SpdMatrix {
        &self.omega
    }

    /// Coordinate count of one block (= the second-order dimension).
    pub fn half_dim(&self) -> usize {
        self.asm.dim()
    }

    pub fn u0(&self) -> &DVector<f64> {
        &self.u0
    }

    pub fn u_from_xv(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let d = self.half_dim();
        assert_eq!(x.len(), d, "position length");
        assert_eq!(v.len(), d, "velocity length");
        let mut u = DVector::zeros(2 * d);
        u.rows_mut(0, d).copy_from(&self.omega.apply(x));
        u.rows_mut(d, d).copy_from(v);
        u
    }

    /// Recovers `(x, v) = (Omega^{-1} u_1, u_2)` through the cached factor.
    pub fn xv_from_u(&self, u: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let d = self.half_dim();
        assert_eq!(u.len(), 2 * d, "state length");
        let u1 = u.rows(0, d).into_owned();
        let v = u.rows(d, d).into_owned();
        (self.omega.solve(&u1), v)
    }

    /// The skew block operator: `(w1, w2) -> (Omega w2, -Omega w1)`.
    pub fn apply_block(&self, w: &DVector<f64>) -> DVector<f64> {
        let d = self.half_dim();
        assert_eq!(w.len(), 2 * d, "state length");
        let w1 = w.rows(0, d).into_owned();
        let w2 = w.rows(d, d).into_owned();
        let mut out = DVector::zeros(2 * d);
        out.rows_mut(0, d).copy_from(&self.omega.apply(&w2));
        out.rows_mut(d, d).copy_from(&(-self.omega.apply(&w1)));
        out
    }

    /// Dense `[[0, Omega], [-Omega, 0]]` for small-scene diagnostics.
    pub fn dense_block_matrix(&self) -> DMatrix<f64> {
        let d = self.half_dim();
        let mut m = DMatrix::zeros(2 * d, 2 * d);
        m.view_mut((0, d), (d, d)).copy_from(self.omega.matrix());
        m.view_mut((d, 0), (d, d)).copy_from(&(-self.omega.matrix().clone()));
        m
    }

    /// `F'(u_n) w` with the analytic nonlinearity Jacobian.
    pub fn jacobian_action(&self, u_n: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        SemilinearProblem::jacobian_at(self, u_n).apply(w)
    }

    pub fn energy(&self, u: &DVector<f64>) -> EnergyReport {
        let (x, v) = self.xv_from_u(u);
        self.asm.energy_xv(&x, &v)
    }
}

impl SemilinearProblem for StiffFirstOrderForm {
    fn dim(&self) -> usize {
        2 * self.half_dim()
    }

    fn rhs(&self, u: &DVector<f64>) -> DVector<f64> {
        let d = self.half_dim();
        assert_eq!(u.len(), 2 * d, "state length");
        let u1 = u.rows(0, d).into_owned();
        let v = u.rows(d, d).into_owned();
        let x = self.omega.solve(&u1);
        let mut out = DVector::zeros(2 * d);
        out.rows_mut(0, d).copy_from(&self.omega.apply(&v));
        let mut bottom = -self.omega.apply(&u1);
        bottom += self.asm.g(&x, &v);
        out.rows_mut(d, d).copy_from(&bottom);
        out
    }

    fn jacobian_at(&self, u: &DVector<f64>) -> Box<dyn LinearOperator + '_> {
        let d = self.half_dim();
        assert_eq!(u.len(), 2 * d, "state length");
        let u1 = u.rows(0, d).into_owned();
        let x = self.omega.solve(&u1);
        let gx = self.asm.g_position_jacobian(&x);
        let gx = if gx.iter().all(|&v| v == 0.0) { None } else { Some(gx) };
        Box::new(FormJacobian { form: self, gx, vdiag: self.asm.velocity_jacobian_diag() })
    }
}

/// `J_n = B + G'(u_n)` frozen at one state; `G'` splits into a position block
/// `g_x Omega^{-1}` and a diagonal velocity block (drag).
struct FormJacobian<'a> {
    form: &'a StiffFirstOrderForm,
    gx: Option<DMatrix<f64>>,
    vdiag: Option<DVector<f64>>,
}

impl LinearOperator for FormJacobian<'_> {
    fn dim(&self) -> usize {
        2 * self.form.half_dim()
    }

    fn apply_into(&self, w: &DVector<f64>, y: &mut DVector<f64>) {
        let d = self.form.half_dim();
        let w1 = w.rows(0, d).into_owned();
        let w2 = w.rows(d, d).into_owned();
        y.rows_mut(0, d).copy_from(&self.form.omega.apply(&w2));
        let mut bottom = -self.form.omega.apply(&w1);
        if let Some(gx) = &self.gx {
            let t = self.form.omega.solve(&w1);
            bottom.gemv(1.0, gx, &t, 1.0);
        }
        if let Some(diag) = &self.vdiag {
            for i in 0..d {
                bottom[i] += diag[i] * w2[i];
            }
        }
        y.rows_mut(d, d).copy_from(&bottom);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::{integrate, Stepper};
    use crate::krylov::KrylovConfig;
    use crate::oscillators::assemble::assemble;
    use crate::oscillators::scene::{scene_chain, ChainEnds};
    use crate::samples::{random_vector, seeded};
    use nalgebra::Vector3;

    fn chain_form(
        n: usize,
        k: f64,
        rest: f64,
        gravity: Option<Vector3<f64>>,
    ) -> StiffFirstOrderForm {
        let mut sys = scene_chain(n, k, rest, 1.0, ChainEnds::FixFirst).unwrap();
        sys.external.gravity = gravity;
        let asm = assemble(&sys).unwrap();
        let (x0, v0) = asm.gather_state();
        to_first_order(asm, &x0, &v0).unwrap()
    }

    #[test]
    fn zero_state_maps_to_gravity_only_rhs() {
        let grav = Vector3::new(0.0, 0.0, -9.81);
        let form = chain_form(3, 40.0, 0.0, Some(grav));
        let d = form.half_dim();
        let u = DVector::zeros(2 * d);
        let f = form.rhs(&u);
        assert_eq!(f.rows(0, d).into_owned(), DVector::zeros(d));
        let expected = form.asm.g(&DVector::zeros(d), &DVector::zeros(d));
        assert_eq!(f.rows(d, d).into_owned(), expected);
        for slot in 0..form.asm.n_free() {
            assert_eq!(expected[3 * slot + 2], -9.81);
        }
    }

    #[test]
    fn block_operator_squares_to_minus_a() {
        let form = chain_form(4, 90.0, 0.4, None);
        let d = form.half_dim();
        let mut rng = seeded(0x5eed_0101);
        let w = random_vector(&mut rng, 2 * d);
        let twice = form.apply_block(&form.apply_block(&w));
        let a = form.asm.a_matrix();
        let w1 = w.rows(0, d).into_owned();
        let w2 = w.rows(d, d).into_owned();
        let mut expected = DVector::zeros(2 * d);
        expected.rows_mut(0, d).copy_from(&(-(a * &w1)));
        expected.rows_mut(d, d).copy_from(&(-(a * &w2)));
        let rel = (&twice - &expected).norm() / expected.norm();
        assert!(rel <= 1e-12, "block square mismatch {rel:.3e}");
    }

    #[test]
    fn state_round_trip() {
        let form = chain_form(5, 250.0, 0.3, None);
        let d = form.half_dim();
        let mut rng = seeded(0x5eed_0102);
        for _ in 0..5 {
            let x = random_vector(&mut rng, d);
            let v = random_vector(&mut rng, d);
            let u = form.u_from_xv(&x, &v);
            let (x2, v2) = form.xv_from_u(&u);
            assert!((&x2 - &x).norm() / x.norm() <= 1e-12);
            assert_eq!(v2, v);
        }
    }

    #[test]
    fn block_operator_is_skew_and_infinitesimal_symplectic() {
        let form = chain_form(5, 320.0, 0.25, None);
        let dim = 2 * form.half_dim();
        let d = form.half_dim();
        let mut rng = seeded(0x5eed_0103);
        // J (u1, u2) = (u2, -u1)
        let apply_j = |w: &DVector<f64>| {
            let mut out = DVector::zeros(dim);
            out.rows_mut(0, d).copy_from(&w.rows(d, d));
            out.rows_mut(d, d).copy_from(&(-w.rows(0, d).into_owned()));
            out
        };
        for _ in 0..10 {
            let u = random_vector(&mut rng, dim);
            let w = random_vector(&mut rng, dim);
            let au = form.apply_block(&u);
            let skew = au.dot(&u).abs() / (au.norm() * u.norm());
            assert!(skew <= 1e-12, "skew defect {skew:.3e}");
            let lhs = apply_j(&au).dot(&w);
            let rhs = u.dot(&apply_j(&form.apply_block(&w)));
            let rel = (lhs - rhs).abs() / lhs.abs().max(1.0);
            assert!(rel <= 1e-12, "symplectic defect {rel:.3e}");
        }
    }

    #[test]
    fn linear_scene_jacobian_equals_block_operator() {
        // zero rest lengths + constant gravity: g' = 0, so J = B exactly
        let form = chain_form(4, 75.0, 0.0, Some(Vector3::new(0.0, 0.0, -9.81)));
        let dim = 2 * form.half_dim();
        let mut rng = seeded(0x5eed_0104);
        let u = random_vector(&mut rng, dim);
        let w = random_vector(&mut rng, dim);
        assert_eq!(form.jacobian_action(&u, &w), form.apply_block(&w));

        // first-block-only input: result is (0, -Omega w1)
        let d = form.half_dim();
        let mut w1_only = DVector::zeros(dim);
        w1_only.rows_mut(0, d).copy_from(&w.rows(0, d));
        let out = form.jacobian_action(&u, &w1_only);
        assert_eq!(out.rows(0, d).into_owned(), DVector::zeros(d));
        let expected = -form.omega().apply(&w.rows(0, d).into_owned());
        assert_eq!(out.rows(d, d).into_owned(), expected);
    }

    #[test]
    fn jacobian_matches_finite_differences_at_first_order() {
        let form = chain_form(4, 50.0, 0.7, Some(Vector3::new(0.0, 0.0, -9.81)));
        let dim = 2 * form.half_dim();
        let mut rng = seeded(0x5eed_0105);
        let u = form.u0() + 0.1 * random_vector(&mut rng, dim);
        let w = random_vector(&mut rng, dim);
        let jw = form.jacobian_action(&u, &w);
        let fu = form.rhs(&u);
        let mut logs = Vec::new();
        for exp in [-3.0f64, -4.0, -5.0, -6.0, -7.0] {
            let eps = 10.0f64.powf(exp);
            let fd = (form.rhs(&(&u + eps * &w)) - &fu) / eps;
            let err = (&fd - &jw).norm();
            logs.push((eps.ln(), err.ln()));
        }
        // least-squares slope of ln err vs ln eps
        let n = logs.len() as f64;
        let sx: f64 = logs.iter().map(|l| l.0).sum();
        let sy: f64 = logs.iter().map(|l| l.1).sum();
        let sxx: f64 = logs.iter().map(|l| l.0 * l.0).sum();
        let sxy: f64 = logs.iter().map(|l| l.0 * l.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!((0.7..=1.3).contains(&slope), "FD consistency slope {slope:.3}");
    }

    #[test]
    fn small_block_matrix_has_paired_imaginary_eigenvalues() {
        let form = chain_form(4, 180.0, 0.5, None);
        let dense = form.dense_block_matrix();
        let scale = dense.norm();
        let eigs = dense.complex_eigenvalues();
        let mut imags: Vec<f64> = eigs.iter().map(|l| l.im).collect();
        for l in eigs.iter() {
            assert!(l.re.abs() <= 1e-8 * scale, "eigenvalue {l} strays off the imaginary axis");
        }
        imags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = imags.len();
        for i in 0..n / 2 {
            let gap = (imags[i] + imags[n - 1 - i]).abs();
            assert!(gap <= 1e-8 * scale, "unpaired imaginary parts {} / {}", imags[i], imags[n - 1 - i]);
        }
    }

    #[test]
    fn fine_step_reference_conserves_energy() {
        // undamped chain lifted to z = 1 so the initial energy is well away
        // from zero; a fine exprb42 trajectory stands in for the exact flow
        let mut sys = scene_chain(5, 100.0, 0.5, 1.0, ChainEnds::FixFirst).unwrap();
        for p in &mut sys.particles {
            p.position.z = 1.0;
        }
        sys.external.gravity = Some(Vector3::new(0.0, 0.0, -9.81));
        let asm = assemble(&sys).unwrap();
        let (x0, v0) = asm.gather_state();
        let form = to_first_order(asm, &x0, &v0).unwrap();
        let e0 = form.energy(form.u0()).total();
        assert!(e0.abs() > 1.0, "test scene should start with O(1) energy, got {e0}");
        let cfg = KrylovConfig::with_tol(1e-12);
        let traj =
            integrate(&form, &Stepper::Exprb42, form.u0(), 0.0, 10.0, 2.5e-4, &cfg, None).unwrap();
        let e1 = form.energy(traj.final_state()).total();
        let drift = (e1 - e0).abs() / e0.abs();
        assert!(drift <= 1e-6, "energy drift {drift:.3e} over 10 s");
    }
}
