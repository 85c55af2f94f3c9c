mod common;

use common::*;
use membrane_core::material::Material;
use membrane_core::tensor::major_asymmetry;
use nalgebra::Matrix3;
use proptest::prelude::*;

fn models() -> Vec<Box<dyn Material>> {
    vec![Box::new(mooney_rivlin(0.3)), Box::new(mooney_rivlin(0.5)), Box::new(hooke(0.3))]
}

#[test]
fn stress_matches_energy_differences() {
    let mut r = rng(1);
    for m in models() {
        for _ in 0..100 {
            let f = random_gradient(&mut r);
            let p = m.stress(&f).unwrap();
            let err = rel_diff(fd_stress(m.as_ref(), &f).iter(), p.iter());
            assert!(err <= 1e-6, "{}: {err:e} at {f}", m.name());
        }
    }
}

#[test]
fn tangent_matches_stress_differences() {
    let mut r = rng(2);
    for m in models() {
        for _ in 0..100 {
            let f = random_gradient(&mut r);
            let l = m.tangent(&f).unwrap();
            let err = rel_diff(fd_tangent(m.as_ref(), &f).iter(), l.iter());
            assert!(err <= 1e-5, "{}: {err:e}", m.name());
        }
    }
}

#[test]
fn tangents_have_major_symmetry() {
    let mut r = rng(3);
    for m in models() {
        for _ in 0..50 {
            let l = m.tangent(&random_gradient(&mut r)).unwrap();
            assert!(major_asymmetry(&l) <= 1e-12, "{}", m.name());
        }
    }
}

#[test]
fn mooney_rivlin_is_objective() {
    let m = mooney_rivlin(0.45);
    let mut r = rng(4);
    for _ in 0..50 {
        let f = random_gradient(&mut r);
        let q = random_rotation(&mut r);
        let (psi, psi_q) = (m.energy(&f).unwrap(), m.energy(&(q * f)).unwrap());
        assert!((psi - psi_q).abs() <= 1e-12 * psi.abs());
        let p = m.stress(&f).unwrap();
        let err = rel_diff((q * p).iter(), m.stress(&(q * f)).unwrap().iter());
        assert!(err <= 1e-12, "{err:e}");
    }
}

#[test]
fn stress_and_tangent_agree_with_separate_calls() {
    let m = mooney_rivlin(0.3);
    let f = random_gradient(&mut rng(5));
    let (p, l) = m.stress_and_tangent(&f).unwrap();
    assert_eq!(p, m.stress(&f).unwrap());
    assert_eq!(l, m.tangent(&f).unwrap());
}

proptest! {
    #[test]
    fn mooney_rivlin_energy_bounded_below(
        entries in proptest::array::uniform9(-0.4f64..0.4),
        nu in 0.0f64..=0.5,
    ) {
        let f = Matrix3::identity() + Matrix3::from_row_slice(&entries);
        prop_assume!(f.determinant() > 0.05);
        let m = mooney_rivlin(nu);
        let rest = m.energy(&Matrix3::identity()).unwrap();
        prop_assert!(m.energy(&f).unwrap() >= rest * (1.0 - 1e-12));
    }

    #[test]
    fn hooke_energy_is_half_stress_work(entries in proptest::array::uniform9(-0.1f64..0.1)) {
        let h = hooke(0.3);
        let f = Matrix3::identity() + Matrix3::from_row_slice(&entries);
        let g = f - Matrix3::identity();
        let psi = h.energy(&f).unwrap();
        let work = 0.5 * h.stress(&f).unwrap().component_mul(&g).sum();
        prop_assert!((psi - work).abs() <= 1e-9 * psi.abs().max(1.0));
    }
}
