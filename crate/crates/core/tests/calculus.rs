use std::sync::Arc;

use esfv_core::calculus::{disc_div, disc_grad, face_average, upwind_div, upwind_face_fluxes, upwind_mass_flux, FaceSplits};
use esfv_core::eos::Eos;
use esfv_core::field::{CellField, CellVectorField};
use esfv_core::mesh::StructuredMesh;
use esfv_core::projection::project_scalar;
use proptest::prelude::*;

fn mesh_strategy() -> impl Strategy<Value = Arc<StructuredMesh>> {
    prop_oneof![
        (2usize..12, -2.0f64..0.0, 0.5f64..3.0).prop_map(|(k, lo, len)| {
            Arc::new(StructuredMesh::new(&[k], &[lo], &[lo + len]).unwrap())
        }),
        (2usize..8, 2usize..8, 0.5f64..2.0, 0.5f64..2.0).prop_map(|(kx, ky, lx, ly)| {
            Arc::new(StructuredMesh::new(&[kx, ky], &[0.0, -1.0], &[lx, ly - 1.0]).unwrap())
        }),
        (2usize..4, 2usize..4, 2usize..5).prop_map(|(a, b, c)| {
            Arc::new(StructuredMesh::new(&[a, b, c], &[0.0; 3], &[1.0, 0.7, 1.3]).unwrap())
        }),
    ]
}

fn fields(mesh: Arc<StructuredMesh>) -> impl Strategy<Value = (CellField, CellVectorField)> {
    let n = mesh.n_cells();
    let d = mesh.dim();
    (prop::collection::vec(-5.0f64..5.0, n), prop::collection::vec(-5.0f64..5.0, n * d)).prop_map(move |(q, v)| {
        (CellField::new(mesh.clone(), q).unwrap(), CellVectorField::new(mesh.clone(), v).unwrap())
    })
}

fn splits_for(mesh: &StructuredMesh, raw: &[f64]) -> FaceSplits {
    let n = mesh.n_faces();
    let vplus = (0..n).map(|f| raw[f % raw.len()].max(0.0)).collect();
    let vminus = (0..n).map(|f| raw[(f * 7 + 3) % raw.len()].min(0.0)).collect();
    FaceSplits::new(vplus, vminus).unwrap()
}

proptest! {
    #[test]
    fn grad_div_duality((q, v) in mesh_strategy().prop_flat_map(fields)) {
        let mesh = q.mesh().clone();
        let g = disc_grad(&q);
        let div = disc_div(&v);
        let vol = mesh.cell_volume();
        let mut total = 0.0;
        let mut scale = 0.0;
        for k in 0..mesh.n_cells() {
            for d in 0..mesh.dim() {
                total += vol * g.get(k, d) * v.get(k, d);
                scale += vol * (g.get(k, d) * v.get(k, d)).abs();
            }
            total += vol * q[k] * div[k];
            scale += vol * (q[k] * div[k]).abs();
        }
        prop_assert!(total.abs() <= 1e-13 * scale.max(1e-300), "{total} vs {scale}");
    }

    #[test]
    fn gradient_integrates_to_zero((q, _v) in mesh_strategy().prop_flat_map(fields)) {
        let g = disc_grad(&q);
        let sums = g.integral();
        let scale: f64 = q.values().iter().map(|x| x.abs()).sum::<f64>() * q.mesh().cell_volume() / q.mesh().mesh_size();
        for s in sums {
            prop_assert!(s.abs() <= 1e-13 * scale.max(1.0));
        }
    }

    #[test]
    fn upwind_divergence_is_conservative(
        (q, _v) in mesh_strategy().prop_flat_map(fields),
        raw in prop::collection::vec(-3.0f64..3.0, 1..20),
    ) {
        let splits = splits_for(q.mesh(), &raw);
        let div = upwind_div(&q, &splits);
        let scale: f64 = div.values().iter().map(|x| x.abs()).sum::<f64>() * q.mesh().cell_volume();
        prop_assert!(div.integral().abs() <= 1e-13 * scale.max(1.0));
    }

    #[test]
    fn upwind_divergence_matches_naive_summation(
        (q, _v) in mesh_strategy().prop_flat_map(fields),
        raw in prop::collection::vec(-3.0f64..3.0, 1..20),
    ) {
        let mesh = q.mesh().clone();
        let splits = splits_for(&mesh, &raw);
        let div = upwind_div(&q, &splits);
        // per cell, walk its 2·dim faces and take the donor value by hand
        for k in 0..mesh.n_cells() {
            let mut acc = 0.0;
            for axis in 0..mesh.dim() {
                let area = mesh.face_area(axis);
                let right = mesh.neighbor(k, axis, 1);
                let left = mesh.neighbor(k, axis, -1);
                let own = axis * mesh.n_cells() + k;
                let back = axis * mesh.n_cells() + left;
                acc += area * (q[k] * splits.vplus[own] + q[right] * splits.vminus[own]);
                // seen from k the back face has v⁺ = -v⁻ and v⁻ = -v⁺
                acc += area * (q[k] * -splits.vminus[back] + q[left] * -splits.vplus[back]);
            }
            acc /= mesh.cell_volume();
            prop_assert!((acc - div[k]).abs() <= 1e-12 * (1.0 + acc.abs()));
        }
    }

    #[test]
    fn eos_identity_over_random_states(rho in 1e-3f64..50.0, a in 0.1f64..4.0, gamma in 1.05f64..3.0) {
        let eos = Eos::new(a, gamma).unwrap();
        let lhs = rho * eos.pressure_potential_derivative(rho) - eos.pressure_potential(rho);
        let p = eos.pressure(rho);
        prop_assert!((lhs - p).abs() <= 1e-12 * p);
    }
}

#[test]
fn flux_antisymmetry_is_exact() {
    let mesh = Arc::new(StructuredMesh::uniform(2, 5, 0.0, 1.0).unwrap());
    let q = CellField::from_fn(mesh.clone(), |k| 1.0 + (k as f64 * 0.37).sin());
    let raw: Vec<f64> = (0..17).map(|i| (i as f64 * 1.3).cos()).collect();
    let splits = splits_for(&mesh, &raw);
    let fluxes = upwind_face_fluxes(&q, &splits);
    for face in mesh.faces() {
        let (p, m) = (splits.vplus[face.index], splits.vminus[face.index]);
        let from_left = upwind_mass_flux(q[face.left], q[face.right], p, m, face.area).total();
        let from_right = upwind_mass_flux(q[face.right], q[face.left], -m, -p, face.area).total();
        assert_eq!(from_left, -from_right);
        assert_eq!(fluxes[face.index], from_left);
    }
}

#[test]
fn operator_examples() {
    let mesh = Arc::new(StructuredMesh::uniform(1, 4, 0.0, 1.0).unwrap());
    let q = CellField::new(mesh.clone(), vec![0.0, 1.0, 0.0, -1.0]).unwrap();
    assert!((disc_grad(&q).get(0, 0) - 4.0).abs() < 1e-14);
    let v = CellVectorField::new(mesh.clone(), vec![0.0, 1.0, 0.0, -1.0]).unwrap();
    assert!(disc_div(&v)[1].abs() < 1e-14);

    let two = Arc::new(StructuredMesh::uniform(1, 2, 0.0, 1.0).unwrap());
    let q = CellField::new(two.clone(), vec![0.0, 1.0]).unwrap();
    assert!(disc_grad(&q).values().iter().all(|g| g.abs() < 1e-15));

    let face = mesh.face(0);
    let q = CellField::new(mesh.clone(), vec![-1.0, 3.0, 0.0, 0.0]).unwrap();
    assert_eq!(face_average(&q, &face), 1.0);

    assert_eq!(upwind_mass_flux(2.0, 1.0, 3.0, 0.0, 1.0).total(), 6.0);
    assert_eq!(upwind_mass_flux(2.0, 1.0, 0.0, -3.0, 1.0).total(), -3.0);
    assert_eq!(upwind_mass_flux(2.0, 1.0, 0.0, 0.0, 1.0).total(), 0.0);

    let c = CellVectorField::constant(mesh.clone(), &[2.5]);
    assert!(disc_div(&c).values().iter().all(|d| d.abs() < 1e-14));
    assert!(disc_grad(&CellField::constant(mesh, 7.0)).values().iter().all(|g| *g == 0.0));
}

#[test]
fn eos_examples() {
    let eos = Eos::new(1.0, 1.4).unwrap();
    assert_eq!(eos.pressure(1.0), 1.0);
    assert_eq!(eos.pressure(0.0), 0.0);
    assert!((eos.pressure(2.0) - 2.0f64.powf(1.4)).abs() < 1e-15);
    assert!((eos.pressure_potential(1.0) - 2.5).abs() < 1e-15);
    assert_eq!(eos.pressure_potential(0.0), 0.0);
    assert!((eos.sound_speed(1.0) - 1.4f64.sqrt()).abs() < 1e-15);
    let quad = Eos::new(1.0, 2.0).unwrap();
    assert!((quad.pressure_potential(2.0) - 4.0).abs() < 1e-15);
    assert!((quad.sound_speed(1.0) - 2.0f64.sqrt()).abs() < 1e-15);
    assert!((Eos::new(0.5, 2.0).unwrap().sound_speed(1.0) - 1.0).abs() < 1e-15);
    for gamma in [1.4, 5.0 / 3.0, 2.0] {
        let eos = Eos::new(1.0, gamma).unwrap();
        for z in [0.1, 1.0, 10.0] {
            let r = z * eos.pressure_potential_derivative(z) - eos.pressure_potential(z) - eos.pressure(z);
            assert!(r.abs() <= 1e-12 * eos.pressure(z));
        }
    }
    assert!(Eos::new(0.0, 1.4).is_err());
    assert!(Eos::new(1.0, 1.0).is_err());
}

#[test]
fn projection_examples() {
    let m = Arc::new(StructuredMesh::uniform(2, 3, -1.0, 1.0).unwrap());
    assert!(project_scalar(&m, |_| 3.0).values().iter().all(|&v| v == 3.0));
    let line = Arc::new(StructuredMesh::uniform(1, 2, -1.0, 1.0).unwrap());
    let ind = project_scalar(&line, |x| if x[0] < 0.0 { 1.0 } else { 0.0 });
    assert_eq!(ind.values(), &[1.0, 0.0]);
    let unit = Arc::new(StructuredMesh::uniform(1, 1, 0.0, 1.0).unwrap());
    assert!((project_scalar(&unit, |x| x[0])[0] - 0.5).abs() < 1e-15);
}
