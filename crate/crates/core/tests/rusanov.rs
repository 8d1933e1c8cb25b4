use std::sync::Arc;

use esfv_core::analysis::{inject_to_fine, lp_norm};
use esfv_core::cases;
use esfv_core::driver::{run_to, simulate, Scheme};
use esfv_core::eos::Eos;
use esfv_core::field::{CellField, CellVectorField};
use esfv_core::mesh::StructuredMesh;
use esfv_core::rusanov::{rusanov_flux, rusanov_step, Conserved, RusanovParams};
use esfv_core::state::State;

fn l1_diff(coarse: &State, fine: &State) -> f64 {
    let inj = inject_to_fine(&coarse.rho, fine.mesh()).unwrap();
    let diff = CellField::from_fn(fine.mesh().clone(), |k| inj[k] - fine.rho[k]);
    lp_norm(&diff, 1.0)
}

#[test]
fn mass_and_momentum_conserved_every_step() {
    let case = cases::kelvin_helmholtz();
    let s0 = case.initial_state(32).unwrap();
    let m0 = s0.total_mass();
    let p0 = s0.total_momentum();
    simulate(s0, &case.eos, Scheme::Rusanov(RusanovParams::default()), 0.05, |ev| {
        assert!((ev.diagnostics.mass - m0).abs() <= 1e-13 * m0);
        for (p, q) in ev.diagnostics.momentum.iter().zip(&p0) {
            assert!((p - q).abs() <= 1e-13 * m0);
        }
        Ok(())
    })
    .unwrap();
}

#[test]
fn delta_shock_self_convergence() {
    let case = cases::delta_shock(1.0).unwrap();
    let runs: Vec<State> = [64, 128, 256, 512]
        .iter()
        .map(|&k| run_to(case.initial_state(k).unwrap(), &case.eos, Scheme::Rusanov(RusanovParams::default()), case.t_end).unwrap())
        .collect();
    let diffs: Vec<f64> = runs.windows(2).map(|w| l1_diff(&w[0], &w[1])).collect();
    assert!(diffs.windows(2).all(|d| d[1] < d[0]), "{diffs:?}");
}

#[test]
fn sod_like_tube_converges_and_stays_positive() {
    let eos = Eos::new(1.0, 1.4).unwrap();
    let build = |k: usize| {
        let mesh = Arc::new(StructuredMesh::uniform(1, k, 0.0, 1.0).unwrap());
        let rho = CellField::from_fn(mesh.clone(), |c| if (c * 4) / k == 1 || (c * 4) / k == 2 { 1.0 } else { 0.125 });
        State::new(rho, CellVectorField::zeros(mesh), 0.0).unwrap()
    };
    let runs: Vec<State> = [64, 128, 256]
        .iter()
        .map(|&k| run_to(build(k), &eos, Scheme::Rusanov(RusanovParams::default()), 0.1).unwrap())
        .collect();
    assert!(runs.iter().all(|s| s.rho.min() > 0.0));
    let d1 = l1_diff(&runs[0], &runs[1]);
    let d2 = l1_diff(&runs[1], &runs[2]);
    assert!(d2 < d1, "{d1} {d2}");
    // symmetric data stays symmetric
    let s = &runs[2];
    let k = s.rho.len();
    for c in 0..k {
        assert!((s.rho[c] - s.rho[k - 1 - c]).abs() < 1e-12);
        assert!((s.u.get(c, 0) + s.u.get(k - 1 - c, 0)).abs() < 1e-12);
    }
}

#[test]
fn flux_is_consistent_with_the_physical_flux() {
    let eos = Eos::new(1.0, 1.4).unwrap();
    let u = Conserved::new(1.3, &[0.4, -0.7]);
    let f = rusanov_flux(&u, &u, &[0.0, 1.0], &eos);
    let v = -0.7 / 1.3;
    assert!((f.rho - 1.3 * v).abs() < 1e-15);
    assert!((f.m[0] - 0.4 * v).abs() < 1e-15);
    assert!((f.m[1] - (-0.7 * v + eos.pressure(1.3))).abs() < 1e-15);
}

#[test]
fn step_never_passes_final_time() {
    let case = cases::delta_shock(1.0).unwrap();
    let s = case.initial_state(32).unwrap();
    let (next, dt) = rusanov_step(&s, &RusanovParams::default(), &case.eos, 1e-6).unwrap();
    assert_eq!(dt, 1e-6);
    assert_eq!(next.time, 1e-6);
    assert!(rusanov_step(&next, &RusanovParams::default(), &case.eos, 1e-6).is_err());
    assert!(rusanov_step(&s, &RusanovParams { cfl: 0.0 }, &case.eos, 1.0).is_err());
}
