//! Building blocks of the velocity-stabilized scheme: the pressure-gradient
//! velocity shift, the sign-split face velocities, the implicit mass
//! residual, the explicit momentum update and the timestep bound.

use crate::calculus::{disc_grad, gather_face_fluxes, neg, pos, upwind_div, upwind_div_vector, FaceSplits};
use crate::eos::Eos;
use crate::field::{scale_by, CellField, CellVectorField};
use crate::mesh::Face;
use crate::state::State;

pub fn pressure_field(rho: &CellField, eos: &Eos) -> CellField {
    rho.map(|r| eos.pressure(r))
}

/// `δu = η δt ∇_T p`
pub fn velocity_shift(p_new: &CellField, dt: f64, eta: f64) -> CellVectorField {
    disc_grad(p_new).scaled(eta * dt)
}

/// Splits a normal velocity `u·ν` and shift `δu·ν` into
/// `(u⁺ - δu⁻, u⁻ - δu⁺)`, the upwind-biased halves of `(u - δu)·ν`.
pub fn split_velocity(u_normal: f64, du_normal: f64) -> (f64, f64) {
    (pos(u_normal) - neg(du_normal), neg(u_normal) - pos(du_normal))
}

/// Split stabilized velocity on `face`, seen from its left cell.
pub fn split_face_velocity(u_old: &CellVectorField, shift: &CellVectorField, face: &Face) -> (f64, f64) {
    let a = face.axis;
    let un = 0.5 * (u_old.get(face.left, a) + u_old.get(face.right, a));
    let dn = 0.5 * (shift.get(face.left, a) + shift.get(face.right, a));
    split_velocity(un, dn)
}

pub fn face_splits(u_old: &CellVectorField, shift: &CellVectorField) -> FaceSplits {
    let mesh = u_old.mesh();
    let n = mesh.n_faces();
    let mut splits = FaceSplits::zeros(n);
    for face in mesh.faces() {
        let (p, m) = split_face_velocity(u_old, shift, &face);
        splits.vplus[face.index] = p;
        splits.vminus[face.index] = m;
    }
    splits
}

/// Everything the scheme derives from a candidate density at fixed `(uⁿ, δt, η)`.
#[derive(Debug, Clone)]
pub struct Stabilization {
    pub grad_p: CellVectorField,
    pub shift: CellVectorField,
    pub splits: FaceSplits,
}

pub fn stabilization(rho: &CellField, u_old: &CellVectorField, dt: f64, eta: f64, eos: &Eos) -> Stabilization {
    let grad_p = disc_grad(&pressure_field(rho, eos));
    let shift = grad_p.scaled(eta * dt);
    let splits = face_splits(u_old, &shift);
    Stabilization { grad_p, shift, splits }
}

/// `(ρ - ρⁿ)/δt + div_T^up(ρ, vⁿ)` with `vⁿ` built from `uⁿ` and the shift of `p(ρ)`.
pub fn mass_residual(rho_candidate: &CellField, state: &State, dt: f64, eta: f64, eos: &Eos) -> CellField {
    let stab = stabilization(rho_candidate, &state.u, dt, eta, eos);
    let div = upwind_div(rho_candidate, &stab.splits);
    CellField::from_fn(rho_candidate.mesh().clone(), |k| {
        (rho_candidate[k] - state.rho[k]) / dt + div[k]
    })
}

/// Conservative momentum balance solved for `uⁿ⁺¹`:
/// `ρⁿ⁺¹uⁿ⁺¹ = ρⁿuⁿ - δt div_T^up(ρⁿ⁺¹uⁿ, vⁿ) - δt ∇_T pⁿ⁺¹`.
pub fn momentum_update(state: &State, rho_new: &CellField, stab: &Stabilization, dt: f64) -> CellVectorField {
    let m_old = state.momentum();
    let flux_div = upwind_div_vector(&scale_by(rho_new, &state.u), &stab.splits);
    let mut u_new = CellVectorField::zeros(state.mesh().clone());
    for k in 0..rho_new.len() {
        for d in 0..u_new.dim() {
            let m = m_old.get(k, d) - dt * flux_div.get(k, d) - dt * stab.grad_p.get(k, d);
            u_new.cell_mut(k)[d] = m / rho_new[k];
        }
    }
    u_new
}

/// Non-conservative velocity form of the same update:
/// `uⁿ⁺¹_K = uⁿ_K - δt/(|K| ρⁿ⁺¹_K) Σ_σ |σ| (uⁿ_L - uⁿ_K) F⁻_{σ,K} - δt (∇_T p)_K / ρⁿ⁺¹_K`.
/// Agrees with [`momentum_update`] whenever the mass balance holds exactly.
pub fn velocity_update(state: &State, rho_new: &CellField, stab: &Stabilization, dt: f64) -> CellVectorField {
    let mesh = state.mesh().clone();
    let dim = mesh.dim();
    let vol = mesh.cell_volume();
    let n = mesh.n_cells();
    let mut u_new = CellVectorField::zeros(mesh.clone());
    for k in 0..n {
        for d in 0..dim {
            let uk = state.u.get(k, d);
            let mut sum = 0.0;
            for axis in 0..dim {
                let area = mesh.face_area(axis);
                let right = mesh.neighbor(k, axis, 1);
                let left = mesh.neighbor(k, axis, -1);
                // own face: v⁻_{σ,K} = vminus; back face: v⁻_{σ,K} = -vplus of that face
                let f_own = rho_new[right] * stab.splits.vminus[axis * n + k];
                let f_back = rho_new[left] * -stab.splits.vplus[axis * n + left];
                sum += area * (state.u.get(right, d) - uk) * f_own + area * (state.u.get(left, d) - uk) * f_back;
            }
            u_new.cell_mut(k)[d] = uk - dt * sum / (vol * rho_new[k]) - dt * stab.grad_p.get(k, d) / rho_new[k];
        }
    }
    u_new
}

/// `|K| ρ_K / (2 Σ_σ |σ| (-F⁻_{σ,K}))` for a single cell.
pub fn cfl_bound_cell(volume: f64, rho: f64, sum_area_neg_flux: f64) -> f64 {
    if sum_area_neg_flux > 0.0 {
        volume * rho / (2.0 * sum_area_neg_flux)
    } else {
        f64::INFINITY
    }
}

/// Per cell `Σ_σ |σ| (-F⁻_{σ,K})` with `F⁻_{σ,K} = ρ_L v⁻_{σ,K}`.
pub fn negative_flux_sums(rho: &CellField, splits: &FaceSplits) -> Vec<f64> {
    let mesh = rho.mesh();
    let n = mesh.n_cells();
    // inflow from the right neighbour through the own face, and from the left
    // neighbour through the back face (where v⁻_{σ,K} = -v⁺ of the face)
    let inflow_own: Vec<f64> = mesh.faces().map(|f| f.area * rho[f.right] * -splits.vminus[f.index]).collect();
    let inflow_back: Vec<f64> = mesh.faces().map(|f| f.area * rho[f.left] * splits.vplus[f.index]).collect();
    (0..n)
        .map(|k| {
            (0..mesh.dim())
                .map(|axis| inflow_own[axis * n + k] + inflow_back[axis * n + mesh.neighbor(k, axis, -1)])
                .sum()
        })
        .collect()
}

/// Unscaled minimum over cells of the entropy timestep bound.
pub fn cfl_bound(rho: &CellField, splits: &FaceSplits) -> f64 {
    let vol = rho.mesh().cell_volume();
    negative_flux_sums(rho, splits)
        .iter()
        .enumerate()
        .map(|(k, &s)| cfl_bound_cell(vol, rho[k], s))
        .fold(f64::INFINITY, f64::min)
}

/// `cfl_safety × min_K bound`, capped by the remaining simulation time.
pub fn admissible_dt(rho_estimate: &CellField, splits: &FaceSplits, cfl_safety: f64, remaining: f64) -> f64 {
    (cfl_safety * cfl_bound(rho_estimate, splits)).min(remaining)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyCheck {
    pub eta_ok: bool,
    pub dt_ok: bool,
}

impl EntropyCheck {
    pub fn ok(&self) -> bool {
        self.eta_ok && self.dt_ok
    }
}

/// `η ≥ 1/ρⁿ⁺¹_K` and `δt ≤ |K|ρⁿ⁺¹_K / (2Σ|σ|(-F⁻))` in every cell.
pub fn check_entropy_conditions(rho_new: &CellField, splits: &FaceSplits, dt: f64, eta: f64) -> EntropyCheck {
    let eta_ok = eta >= 1.0 / rho_new.min();
    let dt_ok = dt <= cfl_bound(rho_new, splits);
    EntropyCheck { eta_ok, dt_ok }
}

/// `div_T v` evaluated from the face normal velocities `v⁺ + v⁻`.
pub fn face_velocity_divergence(mesh: &std::sync::Arc<crate::mesh::StructuredMesh>, splits: &FaceSplits) -> CellField {
    let fluxes: Vec<f64> = mesh.faces().map(|f| f.area * splits.normal_velocity(f.index)).collect();
    gather_face_fluxes(mesh, &fluxes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::StructuredMesh;
    use std::sync::Arc;

    fn line(k: usize, lo: f64, hi: f64) -> Arc<StructuredMesh> {
        Arc::new(StructuredMesh::uniform(1, k, lo, hi).unwrap())
    }

    #[test]
    fn shift_examples() {
        let m = line(4, 0.0, 1.0);
        let p = CellField::constant(m.clone(), 2.0);
        assert!(velocity_shift(&p, 0.1, 2.0).values().iter().all(|&v| v == 0.0));
        let p = CellField::new(m, vec![0.0, 1.0, 0.0, -1.0]).unwrap();
        let s = velocity_shift(&p, 0.1, 2.0);
        assert!((s.get(0, 0) - 0.8).abs() < 1e-14);
        let s2 = velocity_shift(&p, 0.1, 4.0);
        for (a, b) in s.values().iter().zip(s2.values()) {
            assert_eq!(2.0 * a, *b);
        }
    }

    #[test]
    fn split_examples() {
        assert_eq!(split_velocity(3.0, 0.0), (3.0, 0.0));
        assert_eq!(split_velocity(0.0, 2.0), (0.0, -2.0));
        assert_eq!(split_velocity(-1.0, -2.0), (2.0, -1.0));
        for (u, du) in [(0.3, -1.2), (-2.0, 0.5), (1.0, 1.0)] {
            let (p, m) = split_velocity(u, du);
            assert!(p >= 0.0 && m <= 0.0);
            assert!((p + m - (u - du)).abs() < 1e-15);
        }
    }

    #[test]
    fn cfl_bound_hand_case() {
        assert_eq!(cfl_bound_cell(1.0, 1.0, 2.0), 0.25);
        assert_eq!(cfl_bound_cell(1.0, 1.0, 0.0), f64::INFINITY);
    }

    #[test]
    fn zero_velocity_uniform_density_is_capped_by_remaining_time() {
        let m = line(8, 0.0, 1.0);
        let rho = CellField::constant(m.clone(), 1.0);
        let splits = FaceSplits::zeros(m.n_faces());
        assert_eq!(admissible_dt(&rho, &splits, 0.9, 0.3), 0.3);
    }

    #[test]
    fn refining_halves_the_bound() {
        let mk = |k| {
            let m = line(k, 0.0, 1.0);
            let rho = CellField::from_fn(m.clone(), |c| 1.0 + 0.5 * ((c * 8 / k) % 3) as f64);
            let u = CellVectorField::constant(m.clone(), &[0.7]);
            let zero = CellVectorField::zeros(m);
            cfl_bound(&rho, &face_splits(&u, &zero))
        };
        let coarse = mk(8);
        let fine = mk(16);
        assert!((coarse / fine - 2.0).abs() < 1e-12, "{coarse} {fine}");
    }

    #[test]
    fn entropy_check_examples() {
        let m = line(4, 0.0, 1.0);
        let rho = CellField::new(m.clone(), vec![0.5, 1.0, 2.0, 1.5]).unwrap();
        let splits = FaceSplits::new(vec![1.0; 4], vec![-0.5; 4]).unwrap();
        let c = check_entropy_conditions(&rho, &splits, 0.0, 2.0 / rho.min());
        assert!(c.eta_ok && c.dt_ok);
        let c = check_entropy_conditions(&rho, &splits, 0.0, 0.5);
        assert!(!c.eta_ok);
    }

    #[test]
    fn uniform_state_has_zero_residual() {
        let m = line(6, 0.0, 1.0);
        let eos = Eos::new(1.0, 1.4).unwrap();
        let still = State::uniform(m.clone(), 1.3, &[0.0]).unwrap();
        let r = mass_residual(&still.rho, &still, 0.1, 1.0, &eos);
        assert!(r.values().iter().all(|&v| v == 0.0));
        let moving = State::uniform(m, 1.3, &[0.8]).unwrap();
        let r = mass_residual(&moving.rho, &moving, 0.1, 1.0, &eos);
        assert!(r.max_abs() < 1e-14);
    }
}
