//! Discrete energy and the per-cell kinetic-energy and renormalization
//! identities satisfied by an accepted step.
//!
//! Every residual is divided by the magnitude of the operands entering that
//! cell's identity (before any cancellation), so round-off shows up at the
//! level of machine epsilon irrespective of the state's magnitude.

use crate::eos::Eos;
use crate::field::CellField;
use crate::mesh::StructuredMesh;
use crate::state::State;

use super::solver::StepRecord;

/// `E_K = ½ρ_K|u_K|² + ψ_γ(ρ_K)` per cell and `Σ|K|E_K`.
pub fn discrete_energy(state: &State, eos: &Eos) -> (CellField, f64) {
    let speed2 = state.u.norm_squared();
    let e = CellField::from_fn(state.mesh().clone(), |k| {
        0.5 * state.rho[k] * speed2[k] + eos.pressure_potential(state.rho[k])
    });
    let total = e.integral();
    (e, total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyIdentityReport {
    /// Scaled residual of the kinetic-energy identity.
    pub kinetic: Vec<f64>,
    /// Scaled residual of the renormalization identity with the exact
    /// remainder; only available for `γ = 2`, where `ψ''` is constant.
    pub renormalization: Option<Vec<f64>>,
    /// Remainder implied by the renormalization identity, scaled.
    pub implied_remainder: Vec<f64>,
}

impl EnergyIdentityReport {
    pub fn max_kinetic(&self) -> f64 {
        max_abs(&self.kinetic)
    }

    pub fn max_renormalization(&self) -> Option<f64> {
        self.renormalization.as_deref().map(max_abs)
    }

    pub fn min_implied_remainder(&self) -> f64 {
        self.implied_remainder.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn scaled(residual: f64, magnitude: f64) -> f64 {
    if magnitude > 0.0 {
        residual / magnitude
    } else {
        residual
    }
}

/// The faces of `cell` as `(neighbour, |σ|, v⁺_{σ,K}, v⁻_{σ,K})`.
fn cell_splits<'a>(
    mesh: &'a StructuredMesh,
    record: &'a StepRecord,
    cell: usize,
) -> impl Iterator<Item = (usize, f64, f64, f64)> + 'a {
    mesh.cell_faces(cell).map(move |(face, sign)| {
        let (p, m) = (record.splits.vplus[face.index], record.splits.vminus[face.index]);
        if sign > 0.0 {
            (face.right, face.area, p, m)
        } else {
            (face.left, face.area, -m, -p)
        }
    })
}

/// Evaluates the discrete identities for the step `old → new` using the
/// exact face velocities and pressure gradient recorded by the solver.
pub fn verify_energy_identities(old: &State, new: &State, record: &StepRecord, eos: &Eos) -> EnergyIdentityReport {
    let mesh = old.mesh();
    let n = mesh.n_cells();
    let dim = mesh.dim();
    let vol = mesh.cell_volume();
    let (dt, eta) = (record.dt, record.eta);
    let rho0 = &old.rho;
    let rho1 = &new.rho;

    let speed2_old = old.u.norm_squared();
    let quadratic = eos.gamma() == 2.0;
    let psi = |r: f64| eos.pressure_potential(r);

    let mut kinetic = Vec::with_capacity(n);
    let mut renormalization = Vec::with_capacity(n);
    let mut implied_remainder = Vec::with_capacity(n);
    for k in 0..n {
        let uk = old.u.cell(k);
        let u1 = new.u.cell(k);
        let gp = record.grad_p.cell(k);
        let ke_new = 0.5 * rho1[k] * u1.iter().map(|x| x * x).sum::<f64>();
        let ke_old = 0.5 * rho0[k] * speed2_old[k];
        let (psi_new, psi_old, p_new) = (psi(rho1[k]), psi(rho0[k]), eos.pressure(rho1[k]));

        // face sums, each with the magnitude of its operands
        let (mut ke_flux, mut ke_flux_mag) = (0.0, 0.0);
        let (mut s_face, mut s_face_mag) = (0.0, 0.0);
        let (mut psi_flux, mut psi_flux_mag) = (0.0, 0.0);
        let (mut div_v, mut div_v_mag) = (0.0, 0.0);
        let mut exact_face = 0.0;
        for (l, area, vp, vm) in cell_splits(mesh, record, k) {
            let w = area / vol;
            let ke_l = 0.5 * rho1[l] * speed2_old[l];
            let ke_k = 0.5 * rho1[k] * speed2_old[k];
            ke_flux += w * (ke_k * vp + ke_l * vm);
            ke_flux_mag += w * (ke_k * vp - ke_l * vm);
            let du2: f64 = (0..dim).map(|d| (old.u.get(l, d) - uk[d]).powi(2)).sum();
            let s = 0.5 * w * du2 * -(rho1[l] * vm);
            s_face += s;
            s_face_mag += s.abs();
            psi_flux += w * (psi(rho1[k]) * vp + psi(rho1[l]) * vm);
            psi_flux_mag += w * (psi(rho1[k]) * vp - psi(rho1[l]) * vm);
            div_v += w * (vp + vm);
            div_v_mag += w * (vp - vm);
            if quadratic {
                exact_face += 0.5 * w * -vm * (rho1[k] - rho1[l]).powi(2) * 2.0 * eos.a();
            }
        }

        // kinetic energy
        let t1 = (ke_new - ke_old) / dt;
        let t3: f64 = (0..dim).map(|d| gp[d] * (uk[d] - eta * dt * gp[d])).sum();
        let t3_mag: f64 = (0..dim).map(|d| (gp[d] * uk[d]).abs() + eta * dt * gp[d] * gp[d]).sum();
        let jump2: f64 = (0..dim).map(|d| (u1[d] - uk[d]).powi(2)).sum();
        let s_time = -0.5 * rho1[k] * jump2 / dt;
        let dissipation = eta * dt * gp.iter().map(|g| g * g).sum::<f64>();
        let sum = t1 + ke_flux + t3 + s_time + s_face + dissipation;
        let mag = (ke_new + ke_old) / dt + ke_flux_mag + t3_mag + s_time.abs() + s_face_mag + dissipation;
        kinetic.push(scaled(sum, mag));

        // renormalization
        let r_time = (psi_new - psi_old) / dt;
        let implied = -(r_time + psi_flux + p_new * div_v);
        let mag = (psi_new + psi_old) / dt + psi_flux_mag + p_new * div_v_mag;
        implied_remainder.push(scaled(implied, mag));
        if quadratic {
            let exact = 0.5 / dt * (rho1[k] - rho0[k]).powi(2) * 2.0 * eos.a() + exact_face;
            renormalization.push(scaled(implied - exact, mag + exact));
        }
    }
    EnergyIdentityReport {
        kinetic,
        renormalization: quadratic.then_some(renormalization),
        implied_remainder,
    }
}
