use membrane_core::assembly::Discretization;
use membrane_core::form_finding::{
    discrete_area, form_find, laplace_beltrami_stiffness, FormFindOptions, StopCriterion,
};
use membrane_core::mesh::{generate_cylinder, generate_disk, SurfaceMesh};
use membrane_core::oracles::{catenoid_reference, cotangent_laplacian};
use membrane_core::Error;
use nalgebra::Vector3;
use proptest::prelude::*;

fn golden(key: &str) -> f64 {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/catenoid_area.txt")).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .find_map(|l| l.split_once(" = ").filter(|(k, _)| k.trim() == key))
        .map(|(_, v)| v.trim().parse().unwrap())
        .unwrap_or_else(|| panic!("{key} missing from golden file"))
}

#[test]
fn catenoid_reference_matches_golden() {
    let c = catenoid_reference(0.5, 0.3).unwrap();
    assert!((c.area - golden("area_m2")).abs() <= 1e-14 * c.area);
    assert!((c.a - golden("waist_radius_m")).abs() <= 1e-14);
    assert!(c.residual <= 1e-14);
}

#[test]
fn catenoid_reference_rejects_wide_rings() {
    assert!(matches!(catenoid_reference(0.5, 0.6), Err(Error::IllPosed(_))));
}

#[test]
fn stiffness_equals_cotangent_laplacian_on_linear_meshes() {
    for mesh in [generate_cylinder(0.5, 0.6, 3, 10, 1).unwrap(), generate_disk(1.0, 2, 1).unwrap()] {
        let disc = Discretization::new(mesh.clone(), 1).unwrap();
        let k = laplace_beltrami_stiffness(&disc).to_dense();
        let cot = cotangent_laplacian(&mesh);
        // slots follow node numbering for an all-vertex linear mesh
        for i in 0..mesh.num_nodes() {
            assert_eq!(disc.dofs().slot(i), Some(i));
        }
        assert!((k - cot).amax() <= 1e-12);
    }
}

#[test]
fn coarse_catenoid_area() {
    let exact = catenoid_reference(0.5, 0.3).unwrap();
    let mesh = generate_cylinder(0.5, 0.6, 4, 16, 2).unwrap();
    let options = FormFindOptions {
        movement_tol: Some(1e-8),
        criterion: StopCriterion::Normal,
        ..Default::default()
    };
    let (out, state) = form_find(&mesh, &options).unwrap();
    assert!(state.converged);
    let area = discrete_area(&out).unwrap();
    assert!((area - exact.area).abs() <= 2e-2 * exact.area, "{area}");
    assert!(state.areas.first().unwrap() > state.areas.last().unwrap());
    // waist nodes sit close to the exact neck radius
    let waist = out
        .nodes()
        .iter()
        .filter(|p| (p.z - 0.3).abs() < 1e-9)
        .map(|p| p.xy().norm())
        .fold(f64::INFINITY, f64::min);
    assert!((waist - exact.a).abs() <= 0.03, "{waist}");
}

#[test]
fn exhausted_budget_reports_state() {
    let mesh = generate_cylinder(0.5, 0.6, 2, 8, 1).unwrap();
    let options = FormFindOptions {
        movement_tol: Some(1e-30),
        max_outer: 3,
        ..Default::default()
    };
    match form_find(&mesh, &options) {
        Err(Error::FormFinding { iterations, state, .. }) => {
            assert_eq!(iterations, 3);
            assert_eq!(state.movements.len(), 3);
            assert_eq!(state.areas.len(), 4);
            assert!(!state.converged);
        }
        other => panic!("{other:?}"),
    }
}

fn perturbed(seed: &[f64], order: usize) -> SurfaceMesh {
    let mesh = generate_cylinder(0.5, 0.6, 2, 6, order).unwrap();
    let nodes: Vec<Vector3<f64>> = mesh
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, p)| p + 0.02 * Vector3::new(seed[i % seed.len()], seed[(i + 1) % seed.len()], seed[(i + 2) % seed.len()]))
        .collect();
    mesh.with_nodes(nodes).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn stiffness_symmetric_with_constant_kernel(
        seed in prop::collection::vec(-1.0f64..1.0, 7..13),
        order in 1usize..=2,
        degree in 1usize..=2,
    ) {
        prop_assume!(degree <= order);
        let disc = Discretization::new(perturbed(&seed, order), degree).unwrap();
        let k = laplace_beltrami_stiffness(&disc).to_dense();
        let scale = k.amax();
        prop_assert!((&k - k.transpose()).amax() <= 1e-13 * scale);
        for r in k.row_iter() {
            prop_assert!(r.sum().abs() <= 1e-12 * scale);
        }
    }
}
