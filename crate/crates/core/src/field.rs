//! Piecewise-constant scalar and vector fields on a [`StructuredMesh`].

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::mesh::StructuredMesh;

#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    mesh: Arc<StructuredMesh>,
    values: Vec<f64>,
}

impl CellField {
    pub fn new(mesh: Arc<StructuredMesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_cells() {
            return invalid(format!(
                "field has {} values for {} cells",
                values.len(),
                mesh.n_cells()
            ));
        }
        Ok(CellField { mesh, values })
    }

    pub fn constant(mesh: Arc<StructuredMesh>, value: f64) -> Self {
        let n = mesh.n_cells();
        CellField { mesh, values: vec![value; n] }
    }

    pub fn from_fn(mesh: Arc<StructuredMesh>, f: impl Fn(usize) -> f64) -> Self {
        let values = (0..mesh.n_cells()).map(f).collect();
        CellField { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<StructuredMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> CellField {
        CellField {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `∫_Ω q dx`, summed sequentially in cell order.
    pub fn integral(&self) -> f64 {
        self.mesh.cell_volume() * self.values.iter().sum::<f64>()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<usize> for CellField {
    type Output = f64;
    fn index(&self, cell: usize) -> &f64 {
        &self.values[cell]
    }
}

/// One `dim`-vector per cell, stored cell-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CellVectorField {
    mesh: Arc<StructuredMesh>,
    values: Vec<f64>,
}

impl CellVectorField {
    pub fn new(mesh: Arc<StructuredMesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_cells() * mesh.dim() {
            return invalid(format!(
                "vector field has {} values, expected {} cells x {} components",
                values.len(),
                mesh.n_cells(),
                mesh.dim()
            ));
        }
        Ok(CellVectorField { mesh, values })
    }

    pub fn zeros(mesh: Arc<StructuredMesh>) -> Self {
        let n = mesh.n_cells() * mesh.dim();
        CellVectorField { mesh, values: vec![0.0; n] }
    }

    pub fn constant(mesh: Arc<StructuredMesh>, value: &[f64]) -> Self {
        let dim = mesh.dim();
        let mut field = Self::zeros(mesh);
        for chunk in field.values.chunks_exact_mut(dim) {
            chunk.copy_from_slice(&value[..dim]);
        }
        field
    }

    pub fn from_components(components: &[CellField]) -> Result<Self> {
        let Some(first) = components.first() else {
            return invalid("no components");
        };
        let mesh = first.mesh().clone();
        let dim = mesh.dim();
        if components.len() != dim {
            return invalid(format!("expected {dim} components, got {}", components.len()));
        }
        let mut field = Self::zeros(mesh);
        for (d, comp) in components.iter().enumerate() {
            for (c, &v) in comp.values().iter().enumerate() {
                field.values[c * dim + d] = v;
            }
        }
        Ok(field)
    }

    pub fn mesh(&self) -> &Arc<StructuredMesh> {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.n_cells()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell(&self, cell: usize) -> &[f64] {
        let d = self.dim();
        &self.values[cell * d..(cell + 1) * d]
    }

    pub fn cell_mut(&mut self, cell: usize) -> &mut [f64] {
        let d = self.dim();
        &mut self.values[cell * d..(cell + 1) * d]
    }

    pub fn get(&self, cell: usize, axis: usize) -> f64 {
        self.values[cell * self.dim() + axis]
    }

    pub fn component(&self, axis: usize) -> CellField {
        let d = self.dim();
        CellField {
            mesh: self.mesh.clone(),
            values: self.values.iter().skip(axis).step_by(d).copied().collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> CellVectorField {
        CellVectorField {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|v| factor * v).collect(),
        }
    }

    /// Per-cell `|v_K|²`.
    pub fn norm_squared(&self) -> CellField {
        CellField {
            mesh: self.mesh.clone(),
            values: self
                .values
                .chunks_exact(self.dim())
                .map(|v| v.iter().map(|x| x * x).sum())
                .collect(),
        }
    }

    /// Per-component `∫_Ω v dx`.
    pub fn integral(&self) -> Vec<f64> {
        (0..self.dim()).map(|d| self.component(d).integral()).collect()
    }
}

/// Per-cell product `q_K v_K`.
pub fn scale_by(q: &CellField, v: &CellVectorField) -> CellVectorField {
    let d = v.dim();
    let values = v
        .values()
        .chunks_exact(d)
        .zip(q.values())
        .flat_map(|(vk, &qk)| vk.iter().map(move |x| qk * x))
        .collect();
    CellVectorField { mesh: v.mesh.clone(), values }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh2() -> Arc<StructuredMesh> {
        Arc::new(StructuredMesh::uniform(2, 2, 0.0, 1.0).unwrap())
    }

    #[test]
    fn value_count_is_checked() {
        assert!(CellField::new(mesh2(), vec![0.0; 3]).is_err());
        assert!(CellField::new(mesh2(), vec![0.0; 4]).is_ok());
        assert!(CellVectorField::new(mesh2(), vec![0.0; 4]).is_err());
        assert!(CellVectorField::new(mesh2(), vec![0.0; 8]).is_ok());
    }

    #[test]
    fn components_round_trip() {
        let a = CellField::from_fn(mesh2(), |c| c as f64);
        let b = CellField::from_fn(mesh2(), |c| -(c as f64));
        let v = CellVectorField::from_components(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(v.cell(2), &[2.0, -2.0]);
        assert_eq!(v.component(0), a);
        assert_eq!(v.component(1), b);
        assert_eq!(v.norm_squared()[3], 18.0);
    }

    #[test]
    fn integral_uses_cell_volume() {
        let q = CellField::constant(mesh2(), 3.0);
        assert!((q.integral() - 3.0).abs() < 1e-15);
        let v = CellVectorField::constant(mesh2(), &[1.0, 2.0]);
        assert_eq!(v.integral(), vec![1.0, 2.0]);
    }
}
