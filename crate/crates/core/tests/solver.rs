mod common;

use common::*;
use membrane_core::assembly::{assemble, clamp_boundary, load_conservative, Discretization, ElementContext, Loads};
use membrane_core::config::{Scenario, ScenarioConfig};
use membrane_core::mesh::generate_cylinder;
use membrane_core::oracles::fd_jacobian;
use membrane_core::scenarios::{cylinder_load, solve_on};
use membrane_core::solver::{ConvergenceRate, Solver, SolverConfig};
use membrane_core::Error;
use nalgebra::Vector3;
use rand::seq::SliceRandom;
use rand::Rng;

fn small_cylinder(degree: usize) -> Discretization {
    Discretization::new(generate_cylinder(0.5, 1.0, 2, 6, 2).unwrap(), degree).unwrap()
}

#[test]
fn global_tangent_matches_residual_differences() {
    let m = mooney_rivlin(0.5);
    let mut ctx = ElementContext::new(&m);
    ctx.plane_stress = tight();
    let mut r = rng(31);
    for degree in [1, 2] {
        let disc = small_cylinder(degree);
        let n = disc.num_dofs();
        let u: Vec<f64> = (0..n).map(|_| 0.02 * r.random_range(-1.0..1.0)).collect();
        let free = vec![false; n];
        let nq = disc.quadrature_points() * disc.mesh().num_elements();
        let residual = |x: &[f64]| {
            let mut d = vec![Vector3::zeros(); nq];
            assemble(&disc, &ctx, x, &Loads::default(), &free, &mut d).unwrap().residual
        };
        let mut d = vec![Vector3::zeros(); nq];
        let sys = assemble(&disc, &ctx, &u, &Loads::default(), &free, &mut d).unwrap();
        let k = sys.tangent.to_dense();
        let fd = fd_jacobian(residual, &u, 1e-7);
        let err = rel_diff(fd.iter(), k.iter());
        assert!(err <= 1e-5, "degree {degree}: {err:e}");
        assert!(sys.tangent.asymmetry() <= 1e-10);
    }
}

#[test]
fn translation_leaves_residual_unchanged() {
    let m = mooney_rivlin(0.5);
    let ctx = ElementContext::new(&m);
    let disc = small_cylinder(1);
    let n = disc.num_dofs();
    let mut r = rng(32);
    let u: Vec<f64> = (0..n).map(|_| 0.02 * r.random_range(-1.0..1.0)).collect();
    let shift = Vector3::new(0.3, -1.0, 2.0);
    let moved: Vec<f64> = u.iter().enumerate().map(|(i, v)| v + shift[i % 3]).collect();
    let free = vec![false; n];
    let nq = disc.quadrature_points() * disc.mesh().num_elements();
    let a = assemble(&disc, &ctx, &u, &Loads::default(), &free, &mut vec![Vector3::zeros(); nq]).unwrap();
    let b = assemble(&disc, &ctx, &moved, &Loads::default(), &free, &mut vec![Vector3::zeros(); nq]).unwrap();
    assert!(rel_diff(b.residual.iter(), a.residual.iter()) <= 1e-12);
    assert!((a.energy - b.energy).abs() <= 1e-12 * a.energy);
}

fn cylinder_config() -> ScenarioConfig {
    let mut c = ScenarioConfig::named(Scenario::SolveCylinderLoad).unwrap();
    c.mesh = membrane_core::config::MeshSource::Cylinder {
        radius: 0.5,
        height: 4.0,
        axial: 8,
        circumferential: 8,
        order: 2,
    };
    c
}

#[test]
fn cylinder_load_converges_quadratically() {
    let c = cylinder_config();
    let o = solve_on(&c, Discretization::new(c.mesh.build().unwrap(), 1).unwrap()).unwrap();
    assert!(o.report.converged);
    assert_eq!(o.report.rate, ConvergenceRate::Quadratic, "{}", o.report.to_text());
    assert!(o.normal_norm > 5.0 * o.tangential_norm);
}

#[test]
fn renumbering_permutes_the_solution() {
    let c = cylinder_config();
    let mesh = c.mesh.build().unwrap();
    let mut order: Vec<usize> = (0..mesh.num_nodes()).collect();
    order.shuffle(&mut rng(33));
    let shuffled = mesh.renumbered(&order).unwrap();
    let a = solve_on(&c, Discretization::new(mesh, 1).unwrap()).unwrap();
    let b = solve_on(&c, Discretization::new(shuffled, 1).unwrap()).unwrap();
    let fa = a.disc.nodal_field(&a.u);
    let fb = b.disc.nodal_field(&b.u);
    let scale = fa.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for (new, &old) in order.iter().enumerate() {
        assert!((fb[new] - fa[old]).norm() <= 1e-9 * scale);
    }
    assert!((a.normal_norm - b.normal_norm).abs() <= 1e-10 * a.normal_norm);
}

#[test]
fn load_stepping_reaches_the_same_state() {
    let mut c = cylinder_config();
    c.solver.load_steps = 10;
    let disc = Discretization::new(c.mesh.build().unwrap(), 1).unwrap();
    let a = solve_on(&c, disc.clone()).unwrap();
    c.solver.load_steps = 20;
    let b = solve_on(&c, disc).unwrap();
    assert_eq!(a.report.steps.len(), 10);
    assert!(rel_diff(b.u.iter(), a.u.iter()) <= 1e-7);
}

#[test]
fn nonconvergence_carries_history() {
    let m = mooney_rivlin(0.5);
    let disc = Discretization::new(generate_cylinder(0.5, 4.0, 4, 8, 2).unwrap(), 1).unwrap();
    let mask = clamp_boundary(&disc);
    let loads = Loads {
        dead: Some(load_conservative(&disc, |x| cylinder_load(x.z))),
        pressure: 0.0,
    };
    let config = SolverConfig {
        max_newton: 1,
        ..Default::default()
    };
    let zero = vec![0.0; disc.num_dofs()];
    match Solver::new(&disc, &m, config).unwrap().solve(&loads, &mask, &zero) {
        Err(Error::NonConvergence { iterations, report, .. }) => {
            assert_eq!(iterations, 1);
            assert_eq!(report.steps[0].residuals.len(), 2);
            assert!(report.to_csv().starts_with("step,load_factor,iteration,residual_N"));
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn prescribed_rotation_is_stress_free() {
    // isoparametric quadratic: rigid rotations are in the discrete space
    let m = mooney_rivlin(0.5);
    let disc = Discretization::new(generate_cylinder(0.5, 1.0, 2, 6, 2).unwrap(), 2).unwrap();
    let mut r = rng(34);
    let q = random_rotation(&mut r);
    let mut initial = vec![0.0; disc.num_dofs()];
    let mask = clamp_boundary(&disc);
    for s in 0..disc.dofs().num_slots() {
        let x = disc.mesh().nodes()[disc.dofs().node(s)];
        let v = (q - nalgebra::Matrix3::identity()) * x;
        for a in 0..3 {
            // interior starts off the rigid motion
            let noise = if mask[3 * s + a] { 0.0 } else { 1e-2 * r.random_range(-1.0..1.0) };
            initial[3 * s + a] = v[a] + noise;
        }
    }
    let (u, report) = Solver::new(&disc, &m, SolverConfig::default())
        .unwrap()
        .solve(&Loads::default(), &mask, &initial)
        .unwrap();
    assert!(report.converged);
    for s in 0..disc.dofs().num_slots() {
        let x = disc.mesh().nodes()[disc.dofs().node(s)];
        let v = (q - nalgebra::Matrix3::identity()) * x;
        assert!((Vector3::new(u[3 * s], u[3 * s + 1], u[3 * s + 2]) - v).norm() <= 1e-8);
    }
}
