//! Explicit first-order finite volumes with the local Lax-Friedrichs
//! (Rusanov) flux, used for reference solutions.

use crate::eos::Eos;
use crate::error::{invalid, Error, Result};
use crate::field::{CellField, CellVectorField};
use crate::mesh::MAX_DIM;
use crate::state::State;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RusanovParams {
    pub cfl: f64,
}

impl Default for RusanovParams {
    fn default() -> Self {
        RusanovParams { cfl: 0.45 }
    }
}

impl RusanovParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return invalid(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        Ok(())
    }
}

/// Conserved variables `(ρ, m)`; unused momentum components are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conserved {
    pub rho: f64,
    pub m: [f64; MAX_DIM],
}

impl Conserved {
    pub fn new(rho: f64, m: &[f64]) -> Self {
        let mut mm = [0.0; MAX_DIM];
        mm[..m.len()].copy_from_slice(m);
        Conserved { rho, m: mm }
    }

    fn velocity(&self) -> [f64; MAX_DIM] {
        self.m.map(|m| m / self.rho)
    }
}

fn dot(a: &[f64; MAX_DIM], b: &[f64; MAX_DIM]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Physical flux `f(U)·ν`.
fn physical_flux(u: &Conserved, normal: &[f64; MAX_DIM], eos: &Eos) -> Conserved {
    let vel = u.velocity();
    let un = dot(&vel, normal);
    let p = eos.pressure(u.rho);
    let mut m = [0.0; MAX_DIM];
    for d in 0..MAX_DIM {
        m[d] = u.m[d] * un + p * normal[d];
    }
    Conserved { rho: u.rho * un, m }
}

/// Largest signal speed `|u·ν| + c` of a state.
pub fn wave_speed(u: &Conserved, normal: &[f64; MAX_DIM], eos: &Eos) -> f64 {
    dot(&u.velocity(), normal).abs() + eos.sound_speed(u.rho)
}

/// `F = ½(f(U_L) + f(U_R))·ν - ½λ(U_R - U_L)` with `λ` the larger of the two
/// signal speeds.
pub fn rusanov_flux(left: &Conserved, right: &Conserved, normal: &[f64], eos: &Eos) -> Conserved {
    debug_assert!(left.rho > 0.0 && right.rho > 0.0, "non-positive density in flux");
    let mut nu = [0.0; MAX_DIM];
    nu[..normal.len()].copy_from_slice(normal);
    let fl = physical_flux(left, &nu, eos);
    let fr = physical_flux(right, &nu, eos);
    let lambda = wave_speed(left, &nu, eos).max(wave_speed(right, &nu, eos));
    let mut m = [0.0; MAX_DIM];
    for d in 0..MAX_DIM {
        m[d] = 0.5 * (fl.m[d] + fr.m[d]) - 0.5 * lambda * (right.m[d] - left.m[d]);
    }
    Conserved {
        rho: 0.5 * (fl.rho + fr.rho) - 0.5 * lambda * (right.rho - left.rho),
        m,
    }
}

fn conserved_cells(state: &State) -> Vec<Conserved> {
    let m = state.momentum();
    (0..state.rho.len()).map(|k| Conserved::new(state.rho[k], m.cell(k))).collect()
}

/// `cfl · min_axis h / max_face λ`, capped by the remaining time.
pub fn rusanov_dt(state: &State, params: &RusanovParams, eos: &Eos, remaining: f64) -> f64 {
    let mesh = state.mesh();
    let cells = conserved_cells(state);
    let mut lambda: f64 = 0.0;
    for axis in 0..mesh.dim() {
        let mut nu = [0.0; MAX_DIM];
        nu[axis] = 1.0;
        for c in &cells {
            lambda = lambda.max(wave_speed(c, &nu, eos));
        }
    }
    let h = mesh.spacing().iter().copied().fold(f64::INFINITY, f64::min);
    if lambda > 0.0 {
        (params.cfl * h / lambda).min(remaining)
    } else {
        remaining
    }
}

/// One explicit step of length `min(dt_cfl, t_end - t)`. Returns the new state
/// and the step used.
pub fn rusanov_step(state: &State, params: &RusanovParams, eos: &Eos, t_end: f64) -> Result<(State, f64)> {
    params.validate()?;
    let remaining = t_end - state.time;
    if !(remaining > 0.0) {
        return invalid(format!("state time {} is not before t_end {t_end}", state.time));
    }
    let mesh = state.mesh().clone();
    let n = mesh.n_cells();
    let dim = mesh.dim();
    let vol = mesh.cell_volume();
    let dt = rusanov_dt(state, params, eos, remaining);
    let cells = conserved_cells(state);

    let fluxes: Vec<Conserved> = mesh
        .faces()
        .map(|f| {
            let mut nu = [0.0; MAX_DIM];
            nu[f.axis] = 1.0;
            let flux = rusanov_flux(&cells[f.left], &cells[f.right], &nu[..dim], eos);
            Conserved { rho: f.area * flux.rho, m: flux.m.map(|x| f.area * x) }
        })
        .collect();

    let mut rho = vec![0.0; n];
    let mut u = vec![0.0; n * dim];
    for k in 0..n {
        let mut acc = cells[k];
        for axis in 0..dim {
            let own = &fluxes[axis * n + k];
            let back = &fluxes[axis * n + mesh.neighbor(k, axis, -1)];
            acc.rho -= dt / vol * (own.rho - back.rho);
            for d in 0..dim {
                acc.m[d] -= dt / vol * (own.m[d] - back.m[d]);
            }
        }
        if !(acc.rho > 0.0) {
            return Err(Error::NegativeDensity { cell: k, value: acc.rho });
        }
        rho[k] = acc.rho;
        for d in 0..dim {
            u[k * dim + d] = acc.m[d] / acc.rho;
        }
    }
    let time = if dt == remaining { t_end } else { state.time + dt };
    let next = State::new(CellField::new(mesh.clone(), rho)?, CellVectorField::new(mesh, u)?, time)?;
    Ok((next, dt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::StructuredMesh;
    use std::sync::Arc;

    #[test]
    fn consistency_and_antisymmetry() {
        let eos = Eos::new(1.0, 1.4).unwrap();
        let u = Conserved::new(1.3, &[0.4, -0.2]);
        let f = rusanov_flux(&u, &u, &[0.6, 0.8], &eos);
        let exact = physical_flux(&u, &[0.6, 0.8, 0.0], &eos);
        assert!((f.rho - exact.rho).abs() < 1e-15);
        for d in 0..2 {
            assert!((f.m[d] - exact.m[d]).abs() < 1e-15);
        }
        let v = Conserved::new(0.7, &[-0.1, 0.5]);
        let a = rusanov_flux(&u, &v, &[1.0, 0.0], &eos);
        let b = rusanov_flux(&v, &u, &[-1.0, 0.0], &eos);
        assert!((a.rho + b.rho).abs() < 1e-15);
        for d in 0..2 {
            assert!((a.m[d] + b.m[d]).abs() < 1e-15);
        }
    }

    #[test]
    fn still_contact_mass_flux() {
        let eos = Eos::new(1.0, 1.4).unwrap();
        let f = rusanov_flux(&Conserved::new(1.0, &[0.0]), &Conserved::new(0.2, &[0.0]), &[1.0], &eos);
        let lambda = 1.4f64.sqrt();
        assert!((f.rho - (-0.5 * lambda * (0.2 - 1.0))).abs() < 1e-15);
    }

    #[test]
    fn uniform_state_is_fixed() {
        let mesh = Arc::new(StructuredMesh::uniform(2, 6, 0.0, 1.0).unwrap());
        let eos = Eos::new(1.0, 1.4).unwrap();
        let s = State::uniform(mesh, 1.2, &[0.3, -0.7]).unwrap();
        let (next, _) = rusanov_step(&s, &RusanovParams::default(), &eos, 1.0).unwrap();
        for (a, b) in next.rho.values().iter().zip(s.rho.values()) {
            assert!((a - b).abs() < 1e-14);
        }
        for (a, b) in next.u.values().iter().zip(s.u.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
