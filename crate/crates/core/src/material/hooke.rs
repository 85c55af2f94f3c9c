//! Linear isotropic elasticity written on the deformation gradient,
//! `P = L_Hooke : (F - I)`.

use nalgebra::Matrix3;

use super::{Material, MaterialParams};
use crate::error::Result;
use crate::tensor::{flat, Tensor4};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hooke {
    params: MaterialParams,
    lambda: f64,
    mu: f64,
}

impl Hooke {
    /// Fails with [`crate::Error::SingularLame`] for `nu = 0.5`.
    pub fn new(params: MaterialParams) -> Result<Self> {
        Ok(Self {
            params,
            lambda: params.lame_lambda()?,
            mu: params.shear_modulus(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

pub fn hooke_stress(f: &Matrix3<f64>, params: &MaterialParams) -> Result<Matrix3<f64>> {
    Hooke::new(*params)?.stress(f)
}

pub fn hooke_tangent(params: &MaterialParams) -> Result<Tensor4> {
    let h = Hooke::new(*params)?;
    Ok(isotropic(h.lambda, h.mu))
}

fn isotropic(lambda: f64, mu: f64) -> Tensor4 {
    let delta = |p: usize, q: usize| if p == q { 1.0 } else { 0.0 };
    let mut l = Tensor4::zeros();
    for i in 0..3 {
        for k in 0..3 {
            for m in 0..3 {
                for n in 0..3 {
                    l[(flat(i, k), flat(m, n))] = lambda * delta(i, k) * delta(m, n)
                        + mu * (delta(i, m) * delta(k, n) + delta(i, n) * delta(k, m));
                }
            }
        }
    }
    l
}

impl Material for Hooke {
    fn name(&self) -> &str {
        "hooke"
    }

    fn params(&self) -> &MaterialParams {
        &self.params
    }

    fn energy(&self, f: &Matrix3<f64>) -> Result<f64> {
        let eps = (f - Matrix3::identity()).symmetric_part();
        Ok(self.mu * eps.norm_squared() + 0.5 * self.lambda * eps.trace().powi(2))
    }

    fn stress(&self, f: &Matrix3<f64>) -> Result<Matrix3<f64>> {
        let eps = (f - Matrix3::identity()).symmetric_part();
        Ok(self.lambda * eps.trace() * Matrix3::identity() + 2.0 * self.mu * eps)
    }

    fn tangent(&self, _f: &Matrix3<f64>) -> Result<Tensor4> {
        Ok(isotropic(self.lambda, self.mu))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn incompressible_is_rejected() {
        let p = MaterialParams::new(1e6, 0.5, 0.01).unwrap();
        assert!(matches!(Hooke::new(p), Err(Error::SingularLame)));
    }

    #[test]
    fn uniaxial_strain_stress() {
        let p = MaterialParams::new(1e6, 0.25, 0.01).unwrap();
        let h = Hooke::new(p).unwrap();
        let mut f = Matrix3::identity();
        f[(0, 0)] += 1e-3;
        let s = h.stress(&f).unwrap();
        assert!((s[(0, 0)] - (h.lambda() + 2.0 * h.mu()) * 1e-3).abs() < 1e-9);
        assert!((s[(1, 1)] - h.lambda() * 1e-3).abs() < 1e-9);
        assert_eq!(s[(0, 1)], 0.0);
    }

    #[test]
    fn tangent_is_constant_and_symmetric() {
        let p = MaterialParams::new(1e6, 0.3, 0.01).unwrap();
        let l = hooke_tangent(&p).unwrap();
        assert_eq!(l, l.transpose());
        let h = Hooke::new(p).unwrap();
        assert_eq!(h.tangent(&Matrix3::identity()).unwrap(), h.tangent(&(2.0 * Matrix3::identity())).unwrap());
    }
}
