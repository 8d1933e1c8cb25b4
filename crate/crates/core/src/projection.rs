//! Cell averages of pointwise data.

use std::sync::Arc;

use crate::field::{CellField, CellVectorField};
use crate::mesh::{StructuredMesh, MAX_DIM};

/// Equispaced samples per axis inside each cell.
pub const SAMPLES_PER_AXIS: usize = 4;

fn sample_points(mesh: &StructuredMesh, cell: usize) -> Vec<[f64; MAX_DIM]> {
    let dim = mesh.dim();
    let lo = mesh.cell_lower_corner(cell);
    let h = mesh.spacing();
    let total = SAMPLES_PER_AXIS.pow(dim as u32);
    (0..total)
        .map(|s| {
            let mut x = [0.0; MAX_DIM];
            let mut rest = s;
            for d in 0..dim {
                let j = rest % SAMPLES_PER_AXIS;
                rest /= SAMPLES_PER_AXIS;
                x[d] = lo[d] + (j as f64 + 0.5) * h[d] / SAMPLES_PER_AXIS as f64;
            }
            x
        })
        .collect()
}

// Sorted summation makes the mean independent of the sample order, so data
// that is symmetric under an axis swap projects to exactly symmetric fields.
fn sorted_mean(mut values: Vec<f64>) -> f64 {
    let n = values.len() as f64;
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / n
}

/// Approximates `1/|K| ∫_K f dx` on every cell.
pub fn project_scalar(mesh: &Arc<StructuredMesh>, f: impl Fn(&[f64]) -> f64) -> CellField {
    CellField::from_fn(mesh.clone(), |cell| {
        let dim = mesh.dim();
        sorted_mean(sample_points(mesh, cell).iter().map(|x| f(&x[..dim])).collect())
    })
}

/// Componentwise cell averages of a vector-valued `f` (only the first `dim`
/// components are used).
pub fn project_vector(mesh: &Arc<StructuredMesh>, f: impl Fn(&[f64]) -> [f64; MAX_DIM]) -> CellVectorField {
    let dim = mesh.dim();
    let mut out = CellVectorField::zeros(mesh.clone());
    for cell in 0..mesh.n_cells() {
        let samples: Vec<[f64; MAX_DIM]> = sample_points(mesh, cell).iter().map(|x| f(&x[..dim])).collect();
        for d in 0..dim {
            out.cell_mut(cell)[d] = sorted_mean(samples.iter().map(|s| s[d]).collect());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_projects_exactly() {
        let m = Arc::new(StructuredMesh::uniform(2, 3, -1.0, 1.0).unwrap());
        let q = project_scalar(&m, |_| 3.0);
        assert!(q.values().iter().all(|&v| v == 3.0));
    }

    #[test]
    fn indicator_of_left_half() {
        let m = Arc::new(StructuredMesh::uniform(1, 2, -1.0, 1.0).unwrap());
        let q = project_scalar(&m, |x| if x[0] < 0.0 { 1.0 } else { 0.0 });
        assert_eq!(q.values(), &[1.0, 0.0]);
    }

    #[test]
    fn linear_function_average() {
        let m = Arc::new(StructuredMesh::uniform(1, 1, 0.0, 1.0).unwrap());
        let q = project_scalar(&m, |x| x[0]);
        assert!((q[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn vector_projection_swaps_exactly() {
        let m = Arc::new(StructuredMesh::uniform(2, 6, -1.0, 1.0).unwrap());
        let v = project_vector(&m, |x| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            [x[0] * (-r).exp(), x[1] * (-r).exp(), 0.0]
        });
        for i in 0..6 {
            for j in 0..6 {
                let a = m.linear_index(&[i, j]);
                let b = m.linear_index(&[j, i]);
                assert_eq!(v.get(a, 0), v.get(b, 1));
            }
        }
    }
}
