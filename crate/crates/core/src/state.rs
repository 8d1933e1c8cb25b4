use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::field::{scale_by, CellField, CellVectorField};
use crate::mesh::StructuredMesh;

/// Density and velocity at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub rho: CellField,
    pub u: CellVectorField,
    pub time: f64,
}

impl State {
    pub fn new(rho: CellField, u: CellVectorField, time: f64) -> Result<Self> {
        if !Arc::ptr_eq(rho.mesh(), u.mesh()) && rho.mesh() != u.mesh() {
            return invalid("density and velocity live on different meshes");
        }
        let state = State { rho, u, time };
        state.check_positive()?;
        Ok(state)
    }

    pub fn uniform(mesh: Arc<StructuredMesh>, rho: f64, u: &[f64]) -> Result<Self> {
        State::new(CellField::constant(mesh.clone(), rho), CellVectorField::constant(mesh, u), 0.0)
    }

    pub fn mesh(&self) -> &Arc<StructuredMesh> {
        self.rho.mesh()
    }

    pub fn momentum(&self) -> CellVectorField {
        scale_by(&self.rho, &self.u)
    }

    pub fn total_mass(&self) -> f64 {
        self.rho.integral()
    }

    pub fn total_momentum(&self) -> Vec<f64> {
        self.momentum().integral()
    }

    pub fn check_positive(&self) -> Result<()> {
        match self.rho.values().iter().position(|&r| !(r > 0.0)) {
            Some(cell) => Err(Error::NegativeDensity { cell, value: self.rho[cell] }),
            None => Ok(()),
        }
    }
}
