//! Classical comparison integrators: RK4, implicit Euler (BDF-1) with a
//! matrix-free Newton–Krylov solve, velocity Verlet, and a first-order IMEX
//! splitting. These set the baseline the exponential schemes are measured
//! against; none of them gets a stability safeguard beyond non-finite
//! detection, since blowup behavior is part of what the benchmarks record.

mod bdf1;
mod gmres;
mod imex;
mod rk4;
mod verlet;

pub use bdf1::{bdf1_step, NewtonConfig};
pub use gmres::{gmres, GmresConfig, GmresOutcome};
pub use imex::{imex_step, ImexSplitting};
pub use rk4::rk4_step;
pub use verlet::verlet_step;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillators::{assemble, scene_chain, to_first_order, ChainEnds};
    use nalgebra::DVector;

    #[test]
    fn bdf1_dissipates_a_stiff_chain() {
        // longitudinal kick on a stiff chain: the excited modes sit near
        // h*omega ~ 1 where implicit Euler damps hard; energy must fall
        // monotonically and lose well over 10% across 10 s
        let sys = scene_chain(5, 1e4, 0.3, 1.0, ChainEnds::FixFirst).unwrap();
        let asm = assemble(&sys).unwrap();
        let (x0, _) = asm.gather_state();
        let mut v0 = DVector::zeros(asm.dim());
        for slot in 0..asm.n_free() {
            v0[3 * slot] = 0.3 * ((slot + 1) as f64).sin();
        }
        let form = to_first_order(asm, &x0, &v0).unwrap();
        let cfg = NewtonConfig::default();
        let mut u = form.u0().clone();
        let e0 = form.energy(&u).total();
        assert!(e0 > 0.05, "kick energy too small: {e0}");
        let mut prev = e0;
        let h = 0.01;
        for _ in 0..1000 {
            u = bdf1_step(&form, &u, h, &cfg).unwrap();
            let e = form.energy(&u).total();
            assert!(e <= prev + 1e-6 * e0, "energy rose from {prev} to {e}");
            prev = e;
        }
        let drop = (e0 - prev) / e0;
        assert!(drop >= 0.10, "implicit Euler only dissipated {:.1}%", drop * 100.0);
    }
}
