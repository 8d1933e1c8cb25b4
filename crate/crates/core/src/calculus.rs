//! Collocated discrete operators: face averages, the centred gradient and
//! divergence (which are adjoint up to sign), and the upwind mass flux.
//!
//! Per-cell sums are formed axis by axis and the axis partial sums are then
//! added, so in 2D the result is invariant under swapping the two axes.

use crate::error::{invalid, Result};
use crate::field::{CellField, CellVectorField};
use crate::mesh::Face;

/// `(q_K + q_L)/2` across `face`.
pub fn face_average(q: &CellField, face: &Face) -> f64 {
    0.5 * (q[face.left] + q[face.right])
}

/// `(∇_T q)_K = 1/|K| Σ_σ |σ| (q_L - q_K)/2 ν_{σ,K}`
pub fn disc_grad(q: &CellField) -> CellVectorField {
    let mesh = q.mesh().clone();
    let dim = mesh.dim();
    let vol = mesh.cell_volume();
    let mut out = CellVectorField::zeros(mesh.clone());
    for cell in 0..mesh.n_cells() {
        let qk = q[cell];
        for axis in 0..dim {
            let qp = q[mesh.neighbor(cell, axis, 1)];
            let qm = q[mesh.neighbor(cell, axis, -1)];
            let area = mesh.face_area(axis);
            let g = area * 0.5 * (qp - qk) - area * 0.5 * (qm - qk);
            out.cell_mut(cell)[axis] = g / vol;
        }
    }
    out
}

/// `(div_T v)_K = 1/|K| Σ_σ |σ| v̄_σ·ν_{σ,K}`
pub fn disc_div(v: &CellVectorField) -> CellField {
    let mesh = v.mesh().clone();
    let vol = mesh.cell_volume();
    CellField::from_fn(mesh.clone(), |cell| {
        let mut total = 0.0;
        for axis in 0..mesh.dim() {
            let vk = v.get(cell, axis);
            let vp = v.get(mesh.neighbor(cell, axis, 1), axis);
            let vm = v.get(mesh.neighbor(cell, axis, -1), axis);
            let area = mesh.face_area(axis);
            total += area * 0.5 * (vk + vp) - area * 0.5 * (vm + vk);
        }
        total / vol
    })
}

/// The two signed halves of an upwind flux `F_{σ,K} = F⁺ + F⁻`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpwindFlux {
    pub plus: f64,
    pub minus: f64,
}

impl UpwindFlux {
    pub fn total(&self) -> f64 {
        self.plus + self.minus
    }
}

/// `|σ| (q_K v⁺ + q_L v⁻)` with `v⁺ ≥ 0 ≥ v⁻`.
pub fn upwind_mass_flux(q_k: f64, q_l: f64, vplus: f64, vminus: f64, area: f64) -> UpwindFlux {
    debug_assert!(vplus >= 0.0 && vminus <= 0.0, "sign split violated: ({vplus}, {vminus})");
    UpwindFlux {
        plus: area * q_k * vplus,
        minus: area * q_l * vminus,
    }
}

/// Sign-split face velocities, one pair per face seen from the face's left cell.
///
/// From the right cell the roles swap: `v⁺_{σ,L} = -v⁻_{σ,K}` and
/// `v⁻_{σ,L} = -v⁺_{σ,K}`, which makes every upwind flux conservative.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceSplits {
    pub vplus: Vec<f64>,
    pub vminus: Vec<f64>,
}

impl FaceSplits {
    pub fn new(vplus: Vec<f64>, vminus: Vec<f64>) -> Result<Self> {
        if vplus.len() != vminus.len() {
            return invalid("vplus and vminus lengths differ");
        }
        if let Some(i) = vplus.iter().position(|&v| !(v >= 0.0)) {
            return invalid(format!("vplus[{i}] = {} is negative", vplus[i]));
        }
        if let Some(i) = vminus.iter().position(|&v| !(v <= 0.0)) {
            return invalid(format!("vminus[{i}] = {} is positive", vminus[i]));
        }
        Ok(FaceSplits { vplus, vminus })
    }

    pub fn zeros(n_faces: usize) -> Self {
        FaceSplits { vplus: vec![0.0; n_faces], vminus: vec![0.0; n_faces] }
    }

    pub fn len(&self) -> usize {
        self.vplus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vplus.is_empty()
    }

    /// Normal stabilized velocity `v⁺ + v⁻` on each face (left-cell orientation).
    pub fn normal_velocity(&self, face: usize) -> f64 {
        self.vplus[face] + self.vminus[face]
    }
}

/// Positive and negative halves `a± = (a ± |a|)/2`.
pub fn pos(a: f64) -> f64 {
    0.5 * (a + a.abs())
}

pub fn neg(a: f64) -> f64 {
    0.5 * (a - a.abs())
}

/// Per-face upwind fluxes `F_{σ,K}` of `q`, oriented from each face's left cell.
pub fn upwind_face_fluxes(q: &CellField, splits: &FaceSplits) -> Vec<f64> {
    let mesh = q.mesh();
    mesh.faces()
        .map(|f| upwind_mass_flux(q[f.left], q[f.right], splits.vplus[f.index], splits.vminus[f.index], f.area).total())
        .collect()
}

/// Gathers oriented face quantities into `1/|K| Σ_{σ∈E(K)} F_{σ,K}`.
pub fn gather_face_fluxes(mesh: &std::sync::Arc<crate::mesh::StructuredMesh>, fluxes: &[f64]) -> CellField {
    let n = mesh.n_cells();
    let vol = mesh.cell_volume();
    CellField::from_fn(mesh.clone(), |cell| {
        let mut total = 0.0;
        for axis in 0..mesh.dim() {
            let own = fluxes[axis * n + cell];
            let back = fluxes[axis * n + mesh.neighbor(cell, axis, -1)];
            total += own - back;
        }
        total / vol
    })
}

/// `(div_T^up(q, v))_K = 1/|K| Σ_σ F_{σ,K}(q, v)`
pub fn upwind_div(q: &CellField, splits: &FaceSplits) -> CellField {
    let fluxes = upwind_face_fluxes(q, splits);
    gather_face_fluxes(q.mesh(), &fluxes)
}

/// Upwind divergence of a vector quantity `w` (e.g. `ρ u`), componentwise.
pub fn upwind_div_vector(w: &CellVectorField, splits: &FaceSplits) -> CellVectorField {
    let comps: Vec<CellField> = (0..w.dim()).map(|d| upwind_div(&w.component(d), splits)).collect();
    CellVectorField::from_components(&comps).expect("component count matches mesh dimension")
}
