//! Uniform tensor-product cell grids with periodic wrap on every axis.
//!
//! Cells are numbered row-major with axis 0 fastest. Faces are numbered
//! per axis, then per cell: face `axis * n_cells + cell` separates `cell`
//! from its neighbour in the `+axis` direction, so every cell owns exactly
//! `dim` faces and shares `dim` more with its `-axis` neighbours.

use crate::error::{invalid, Result};

pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredMesh {
    dim: usize,
    cells: [usize; MAX_DIM],
    lower: [f64; MAX_DIM],
    upper: [f64; MAX_DIM],
    spacing: [f64; MAX_DIM],
}

/// An interior face `K|L`, with `left = K` and `right = L` the `+axis`
/// neighbour. The unit normal `ν_{σ,K}` is `+e_axis`; `ν_{σ,L} = -e_axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub index: usize,
    pub axis: usize,
    pub left: usize,
    pub right: usize,
    pub area: f64,
}

impl StructuredMesh {
    pub fn new(cells: &[usize], lower: &[f64], upper: &[f64]) -> Result<Self> {
        let dim = cells.len();
        if !(1..=MAX_DIM).contains(&dim) {
            return invalid(format!("mesh dimension must be 1..=3, got {dim}"));
        }
        if lower.len() != dim || upper.len() != dim {
            return invalid("bounds must have one entry per axis");
        }
        let mut mesh = StructuredMesh {
            dim,
            cells: [1; MAX_DIM],
            lower: [0.0; MAX_DIM],
            upper: [1.0; MAX_DIM],
            spacing: [1.0; MAX_DIM],
        };
        for d in 0..dim {
            if cells[d] == 0 {
                return invalid(format!("axis {d} has zero cells"));
            }
            if !(upper[d] > lower[d]) || !lower[d].is_finite() || !upper[d].is_finite() {
                return invalid(format!("axis {d} has empty extent [{}, {}]", lower[d], upper[d]));
            }
            mesh.cells[d] = cells[d];
            mesh.lower[d] = lower[d];
            mesh.upper[d] = upper[d];
            mesh.spacing[d] = (upper[d] - lower[d]) / cells[d] as f64;
        }
        Ok(mesh)
    }

    /// `k` cells along each of `dim` axes on the box `[lower, upper]^dim`.
    pub fn uniform(dim: usize, k: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(&vec![k; dim], &vec![lower; dim], &vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells_per_axis(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower[..self.dim]
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        axis < self.dim
    }

    pub fn n_cells(&self) -> usize {
        self.cells[..self.dim].iter().product()
    }

    pub fn n_faces(&self) -> usize {
        self.dim * self.n_cells()
    }

    /// `|K|`
    pub fn cell_volume(&self) -> f64 {
        self.spacing[..self.dim].iter().product()
    }

    /// `|σ|` for faces normal to `axis`; 1 in one dimension.
    pub fn face_area(&self, axis: usize) -> f64 {
        (0..self.dim)
            .filter(|&d| d != axis)
            .map(|d| self.spacing[d])
            .product()
    }

    pub fn domain_measure(&self) -> f64 {
        (0..self.dim).map(|d| self.upper[d] - self.lower[d]).product()
    }

    /// Largest cell diameter `h_T`.
    pub fn mesh_size(&self) -> f64 {
        self.spacing[..self.dim].iter().map(|h| h * h).sum::<f64>().sqrt()
    }

    fn stride(&self, axis: usize) -> usize {
        self.cells[..axis].iter().product()
    }

    pub fn multi_index(&self, cell: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        let mut rest = cell;
        for d in 0..self.dim {
            idx[d] = rest % self.cells[d];
            rest /= self.cells[d];
        }
        idx
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        let mut cell = 0;
        for d in (0..self.dim).rev() {
            cell = cell * self.cells[d] + idx[d];
        }
        cell
    }

    /// Neighbour of `cell` shifted by `offset` cells along `axis`, wrapping periodically.
    pub fn neighbor(&self, cell: usize, axis: usize, offset: isize) -> usize {
        let n = self.cells[axis] as isize;
        let stride = self.stride(axis);
        let i = ((cell / stride) % self.cells[axis]) as isize;
        let j = (i + offset).rem_euclid(n);
        (cell as isize + (j - i) * stride as isize) as usize
    }

    pub fn cell_center(&self, cell: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(cell);
        let mut x = [0.0; MAX_DIM];
        for d in 0..self.dim {
            x[d] = self.lower[d] + (idx[d] as f64 + 0.5) * self.spacing[d];
        }
        x
    }

    pub fn cell_lower_corner(&self, cell: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(cell);
        let mut x = [0.0; MAX_DIM];
        for d in 0..self.dim {
            x[d] = self.lower[d] + idx[d] as f64 * self.spacing[d];
        }
        x
    }

    pub fn face(&self, index: usize) -> Face {
        let n = self.n_cells();
        let axis = index / n;
        let left = index % n;
        Face {
            index,
            axis,
            left,
            right: self.neighbor(left, axis, 1),
            area: self.face_area(axis),
        }
    }

    pub fn faces(&self) -> impl Iterator<Item = Face> + '_ {
        (0..self.n_faces()).map(move |f| self.face(f))
    }

    /// The `2·dim` faces of `cell` paired with the outward normal sign
    /// (`+1` when `cell` is the face's left cell).
    pub fn cell_faces(&self, cell: usize) -> impl Iterator<Item = (Face, f64)> + '_ {
        let n = self.n_cells();
        (0..self.dim).flat_map(move |axis| {
            let own = self.face(axis * n + cell);
            let back = self.face(axis * n + self.neighbor(cell, axis, -1));
            [(back, -1.0), (own, 1.0)]
        })
    }

    /// Returns the per-axis refinement factor if `fine` is a dyadic
    /// refinement of `self` over the same box.
    pub fn refinement_factors(&self, fine: &StructuredMesh) -> Option<[usize; MAX_DIM]> {
        if fine.dim != self.dim {
            return None;
        }
        let mut factors = [1; MAX_DIM];
        for d in 0..self.dim {
            if !fine.cells[d].is_multiple_of(self.cells[d]) {
                return None;
            }
            let r = fine.cells[d] / self.cells[d];
            if !r.is_power_of_two() {
                return None;
            }
            let tol = 1e-12 * (self.upper[d] - self.lower[d]).abs().max(1.0);
            if (fine.lower[d] - self.lower[d]).abs() > tol || (fine.upper[d] - self.upper[d]).abs() > tol {
                return None;
            }
            factors[d] = r;
        }
        Some(factors)
    }
}
