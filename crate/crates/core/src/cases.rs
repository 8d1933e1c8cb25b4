//! Benchmark problems: initial data, pressure law, domain and final time.

use std::sync::Arc;

use crate::eos::Eos;
use crate::error::{invalid, Result};
use crate::mesh::{StructuredMesh, MAX_DIM};
use crate::projection::{project_scalar, project_vector};
use crate::state::State;

/// Pointwise initial density and velocity.
pub type InitialData = fn(&[f64]) -> (f64, [f64; MAX_DIM]);

#[derive(Debug, Clone)]
pub struct CaseSpec {
    pub name: &'static str,
    pub dim: usize,
    pub lower: f64,
    pub upper: f64,
    pub eos: Eos,
    pub initial: InitialData,
    pub t_end: f64,
    pub reference_k: usize,
    /// `κ` for the δ-shock family; `None` elsewhere.
    pub kappa: Option<f64>,
}

pub const CASE_NAMES: [&str; 3] = ["cylindrical-explosion", "kelvin-helmholtz", "delta-shock"];

pub const DELTA_SHOCK_KAPPAS: [f64; 4] = [1.0, 1e-2, 1e-3, 1e-5];

impl CaseSpec {
    pub fn mesh(&self, k: usize) -> Result<Arc<StructuredMesh>> {
        Ok(Arc::new(StructuredMesh::uniform(self.dim, k, self.lower, self.upper)?))
    }

    /// Cell averages of the initial density and velocity on a `k^dim` grid.
    pub fn initial_state(&self, k: usize) -> Result<State> {
        let mesh = self.mesh(k)?;
        let f = self.initial;
        let rho = project_scalar(&mesh, |x| f(x).0);
        let u = project_vector(&mesh, |x| f(x).1);
        State::new(rho, u, 0.0)
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        (self.initial)(x).0
    }

    pub fn velocity(&self, x: &[f64]) -> [f64; MAX_DIM] {
        (self.initial)(x).1
    }
}

/// Looks a case up by its CLI name; `kappa` is required for the δ-shock only.
pub fn by_name(name: &str, kappa: Option<f64>) -> Result<CaseSpec> {
    match name {
        "cylindrical-explosion" => Ok(cylindrical_explosion()),
        "kelvin-helmholtz" => Ok(kelvin_helmholtz()),
        "delta-shock" => delta_shock(kappa.unwrap_or(1.0)),
        other => invalid(format!("unknown case '{other}' (expected one of {})", CASE_NAMES.join(", "))),
    }
}

fn cylindrical_initial(x: &[f64]) -> (f64, [f64; MAX_DIM]) {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let r = r2.sqrt();
    let rho = if r2 <= 0.25 { 2.0 } else { 1.0 };
    let mut u = [0.0; MAX_DIM];
    if r > 1e-15 {
        let alpha = (1.0 - r).max(0.0) * (1.0 - (-16.0 * r2).exp());
        u[0] = -alpha / rho * x[0] / r;
        u[1] = -alpha / rho * x[1] / r;
    }
    (rho, u)
}

pub fn cylindrical_explosion() -> CaseSpec {
    CaseSpec {
        name: "cylindrical-explosion",
        dim: 2,
        lower: -1.0,
        upper: 1.0,
        eos: Eos::new(1.0, 1.4).expect("valid pressure law"),
        initial: cylindrical_initial,
        t_end: 0.25,
        reference_k: 2048,
        kappa: None,
    }
}

const KH_AMPLITUDE: f64 = 0.025;
const KH_WAVELENGTH: f64 = 1.0 / 6.0;

fn kelvin_helmholtz_initial(x: &[f64]) -> (f64, [f64; MAX_DIM]) {
    let inner = x[1].abs() < 0.25;
    let rho = if inner { 2.0 } else { 1.0 };
    let u1 = if inner { -0.5 } else { 0.5 };
    let phase = 2.0 * std::f64::consts::PI * (x[0] + 0.5) / KH_WAVELENGTH;
    let u2 = if (x[1] - 0.25).abs() < 0.025 {
        KH_AMPLITUDE * (-phase).sin()
    } else if (x[1] + 0.25).abs() < 0.025 {
        KH_AMPLITUDE * phase.sin()
    } else {
        0.0
    };
    (rho, [u1, u2, 0.0])
}

pub fn kelvin_helmholtz() -> CaseSpec {
    CaseSpec {
        name: "kelvin-helmholtz",
        dim: 2,
        lower: -0.5,
        upper: 0.5,
        eos: Eos::new(1.0, 5.0 / 3.0).expect("valid pressure law"),
        initial: kelvin_helmholtz_initial,
        t_end: 0.4,
        reference_k: 1024,
        kappa: None,
    }
}

fn delta_shock_initial(x: &[f64]) -> (f64, [f64; MAX_DIM]) {
    if x[0] < 0.0 {
        (1.0, [1.5, 0.0, 0.0])
    } else {
        (0.2, [0.0; MAX_DIM])
    }
}

/// Riemann problem with `p(ρ) = κ²ρ^1.4` on the periodic interval `[-1, 1]`.
pub fn delta_shock(kappa: f64) -> Result<CaseSpec> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return invalid(format!("kappa must be positive, got {kappa}"));
    }
    Ok(CaseSpec {
        name: "delta-shock",
        dim: 1,
        lower: -1.0,
        upper: 1.0,
        eos: Eos::new(kappa * kappa, 1.4)?,
        initial: delta_shock_initial,
        t_end: 0.2,
        reference_k: 2048,
        kappa: Some(kappa),
    })
}

/// Relative change of the density in the `width` cells at either end of a
/// 1D run, compared with the projected initial data. Waves of the central
/// Riemann problem arriving there would show up as changes of order one.
pub fn boundary_disturbance(case: &CaseSpec, state: &State, width: usize) -> Result<f64> {
    let mesh = state.mesh();
    if mesh.dim() != 1 {
        return invalid("boundary disturbance is only defined for 1D runs");
    }
    let k = mesh.n_cells();
    let initial = case.initial_state(k)?;
    let w = width.min(k / 2);
    let cells = (0..w).chain(k - w..k);
    Ok(cells
        .map(|c| (state.rho[c] - initial.rho[c]).abs() / initial.rho[c])
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cylindrical_values() {
        let c = cylindrical_explosion();
        assert_eq!(c.density(&[0.1, 0.1]), 2.0);
        assert_eq!(c.density(&[1.0, 1.0]), 1.0);
        assert_eq!(c.velocity(&[0.0, 0.0]), [0.0; 3]);
        let u = c.velocity(&[0.36, 0.48]);
        let r: f64 = 0.6;
        let alpha = 0.4 * (1.0 - (-16.0 * r * r).exp());
        assert!((u[0] + alpha * 0.6).abs() < 1e-14);
        assert!((u[1] + alpha * 0.8).abs() < 1e-14);
        assert_eq!(c.t_end, 0.25);
        assert_eq!(c.reference_k, 2048);
    }

    #[test]
    fn kelvin_helmholtz_values() {
        let c = kelvin_helmholtz();
        assert_eq!(c.density(&[0.0, 0.0]), 2.0);
        assert_eq!(c.velocity(&[0.0, 0.0])[0], -0.5);
        assert_eq!(c.velocity(&[0.1, 0.0])[1], 0.0);
        assert_eq!(c.velocity(&[-0.5, 0.25])[1], 0.0);
        assert_eq!(c.velocity(&[0.0, 0.4]), [0.5, 0.0, 0.0]);
        let u2 = c.velocity(&[-0.5 + 1.0 / 24.0, 0.26])[1];
        assert!((u2 + 0.025).abs() < 1e-15);
        assert_eq!((c.t_end, c.reference_k), (0.4, 1024));
    }

    #[test]
    fn delta_shock_values() {
        let c = delta_shock(1e-2).unwrap();
        assert_eq!(c.density(&[-0.5]), 1.0);
        assert_eq!(c.velocity(&[-0.5])[0], 1.5);
        assert_eq!(c.density(&[0.5]), 0.2);
        assert_eq!(c.velocity(&[0.5])[0], 0.0);
        assert!((c.eos.pressure(1.0) - 1e-4).abs() < 1e-18);
        assert!(delta_shock(0.0).is_err());
        assert!(delta_shock(-1.0).is_err());
    }

    #[test]
    fn projected_data_is_positive() {
        for case in [cylindrical_explosion(), kelvin_helmholtz(), delta_shock(1.0).unwrap()] {
            let s = case.initial_state(16).unwrap();
            assert!(s.rho.min() > 0.0);
        }
        assert!(by_name("sod", None).is_err());
    }
}
