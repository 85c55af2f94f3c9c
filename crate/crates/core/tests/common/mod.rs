//! Helpers shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use membrane_core::material::{Hooke, Material, MaterialParams, MooneyRivlin};
use membrane_core::mesh::SurfaceMesh;
use membrane_core::oracles::{fd_gradient, fd_jacobian};
use membrane_core::plane_stress::{solve_director, PlaneStressOptions};
use membrane_core::tensor::{flat, flatten, Tensor4};
use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const E: f64 = 10e6;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// `I + 0.3 A` with uniform entries of `A` in [-1, 1], redrawn until
/// `det F > 0.3`.
pub fn random_gradient(rng: &mut StdRng) -> Matrix3<f64> {
    loop {
        let f = Matrix3::identity() + Matrix3::from_fn(|_, _| 0.3 * rng.random_range(-1.0..1.0));
        if f.determinant() > 0.3 {
            return f;
        }
    }
}

pub fn random_rotation(rng: &mut StdRng) -> Matrix3<f64> {
    let axis = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
    Rotation3::new(axis.normalize() * rng.random_range(0.1..3.0)).into_inner()
}

pub fn random_unit(rng: &mut StdRng) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        if v.norm() > 0.2 {
            return v.normalize();
        }
    }
}

pub fn mooney_rivlin(nu: f64) -> MooneyRivlin {
    MooneyRivlin::new(MaterialParams::new(E, nu, 0.01).unwrap())
}

pub fn hooke(nu: f64) -> Hooke {
    Hooke::new(MaterialParams::new(E, nu, 0.01).unwrap()).unwrap()
}

pub fn unflat(x: &[f64]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| x[flat(i, j)])
}

fn flat_vec(m: &Matrix3<f64>) -> Vec<f64> {
    flatten(m).iter().copied().collect()
}

/// Largest entry difference over the largest entry of `b`.
pub fn rel_diff<'a>(a: impl IntoIterator<Item = &'a f64>, b: impl IntoIterator<Item = &'a f64>) -> f64 {
    let (mut num, mut den) = (0.0_f64, 0.0_f64);
    for (x, y) in a.into_iter().zip(b) {
        num = num.max((x - y).abs());
        den = den.max(y.abs());
    }
    num / den.max(f64::MIN_POSITIVE)
}

/// Central differences of the energy.
pub fn fd_stress(m: &dyn Material, f: &Matrix3<f64>) -> Matrix3<f64> {
    let g = fd_gradient(|x| m.energy(&unflat(x)).unwrap(), &flat_vec(f), 1e-6);
    unflat(&g)
}

/// Central differences of the stress.
pub fn fd_tangent(m: &dyn Material, f: &Matrix3<f64>) -> Tensor4 {
    let j = fd_jacobian(|x| flat_vec(&m.stress(&unflat(x)).unwrap()), &flat_vec(f), 1e-6);
    Tensor4::from_fn(|r, c| j[(r, c)])
}

pub fn tight() -> PlaneStressOptions {
    PlaneStressOptions {
        rel_tol: 1e-14,
        max_iters: 60,
        ..Default::default()
    }
}

/// Nested finite differences of the condensed stress map `F_s -> P`, each
/// evaluation solving the director afresh.
pub fn fd_condensed(m: &dyn Material, fs: &Matrix3<f64>, n: &Vector3<f64>) -> Tensor4 {
    let p = |x: &[f64]| {
        let s = solve_director(&unflat(x), n, m, None, &tight()).unwrap();
        flat_vec(&s.stress)
    };
    let j = fd_jacobian(p, &flat_vec(fs), 1e-6);
    Tensor4::from_fn(|r, c| j[(r, c)])
}

/// Surface deformation `I + 0.2 A T` with tangent projector `T`, the form
/// `I + Grad_Gamma u` takes for the normal `n`.
pub fn random_surface_gradient(rng: &mut StdRng, n: &Vector3<f64>) -> Matrix3<f64> {
    let t = Matrix3::identity() - n * n.transpose();
    Matrix3::identity() + Matrix3::from_fn(|_, _| 0.2 * rng.random_range(-1.0..1.0)) * t
}

/// Two triangles on the unit square in the z = 0 plane.
pub fn flat_pair() -> SurfaceMesh {
    let nodes = vec![
        Vector3::new(0.0, 0.0, 0.0),
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::new(1.0, 1.0, 0.0),
        Vector3::new(0.0, 1.0, 0.0),
    ];
    SurfaceMesh::new(nodes, vec![0, 1, 2, 0, 2, 3], 1).unwrap()
}
