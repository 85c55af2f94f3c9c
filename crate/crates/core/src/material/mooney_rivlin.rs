//! Compressible isotropic Mooney-Rivlin model
//!
//! `Psi = mu1/2 J^(-2/3) I1 + mu2/2 J^(-4/3) I2 + K/2 (J - 1)^2`
//!
//! with `I1`, `I2` the invariants of `B = F F^T`. The constant offset
//! `3/2 (mu1 + mu2)` at `F = I` is kept; only energy differences matter.

use nalgebra::Matrix3;

use super::{Material, MaterialParams};
use crate::error::{Error, Result};
use crate::tensor::{flat, Tensor4};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MooneyRivlin {
    params: MaterialParams,
}

impl MooneyRivlin {
    pub fn new(params: MaterialParams) -> Self {
        Self { params }
    }
}

/// Kinematic quantities shared by the energy, stress and tangent.
struct Kinematics {
    f: Matrix3<f64>,
    j: f64,
    /// `F^-T`
    h: Matrix3<f64>,
    b: Matrix3<f64>,
    c: Matrix3<f64>,
    i1: f64,
    i2: f64,
    /// `J^(-2/3)`
    a: f64,
    /// `J^(-4/3)`
    bb: f64,
}

impl Kinematics {
    fn new(f: &Matrix3<f64>) -> Result<Self> {
        let j = f.determinant();
        if !(j > 0.0) {
            return Err(Error::InvertedElement { det: j });
        }
        let h = f
            .try_inverse()
            .ok_or(Error::InvertedElement { det: j })?
            .transpose();
        let b = f * f.transpose();
        let c = f.transpose() * f;
        let i1 = b.trace();
        let i2 = 0.5 * (i1 * i1 - (b * b).trace());
        let a = j.powf(-2.0 / 3.0);
        Ok(Self {
            f: *f,
            j,
            h,
            b,
            c,
            i1,
            i2,
            a,
            bb: a * a,
        })
    }

    /// `dI2/dF / 2 = I1 F - B F`
    fn g(&self) -> Matrix3<f64> {
        self.i1 * self.f - self.b * self.f
    }
}

pub fn mooney_rivlin_psi(f: &Matrix3<f64>, params: &MaterialParams) -> Result<f64> {
    let k = Kinematics::new(f)?;
    let (mu1, mu2, bulk) = (params.mu1(), params.mu2(), params.bulk_modulus());
    Ok(0.5 * mu1 * k.a * k.i1 + 0.5 * mu2 * k.bb * k.i2 + 0.5 * bulk * (k.j - 1.0).powi(2))
}

pub fn mooney_rivlin_stress(f: &Matrix3<f64>, params: &MaterialParams) -> Result<Matrix3<f64>> {
    let k = Kinematics::new(f)?;
    Ok(stress_from(&k, params))
}

pub fn mooney_rivlin_tangent(f: &Matrix3<f64>, params: &MaterialParams) -> Result<Tensor4> {
    let k = Kinematics::new(f)?;
    Ok(tangent_from(&k, params))
}

fn stress_from(k: &Kinematics, params: &MaterialParams) -> Matrix3<f64> {
    let (mu1, mu2, bulk) = (params.mu1(), params.mu2(), params.bulk_modulus());
    mu1 * k.a * (k.f - k.i1 / 3.0 * k.h)
        + mu2 * k.bb * (k.g() - 2.0 / 3.0 * k.i2 * k.h)
        + bulk * (k.j - 1.0) * k.j * k.h
}

fn tangent_from(k: &Kinematics, params: &MaterialParams) -> Tensor4 {
    let (mu1, mu2, bulk) = (params.mu1(), params.mu2(), params.bulk_modulus());
    let (f, h, b, c, g) = (&k.f, &k.h, &k.b, &k.c, k.g());
    let (a, bb, i1, i2, j) = (k.a, k.bb, k.i1, k.i2, k.j);
    let delta = |p: usize, q: usize| if p == q { 1.0 } else { 0.0 };
    let mut l = Tensor4::zeros();
    for i in 0..3 {
        for kk in 0..3 {
            for m in 0..3 {
                for n in 0..3 {
                    let dd = delta(i, m) * delta(kk, n);
                    let hh = h[(m, n)] * h[(i, kk)];
                    let hx = h[(i, n)] * h[(m, kk)];
                    let iso1 = a * dd - 2.0 / 3.0 * a * f[(i, kk)] * h[(m, n)]
                        - 1.0 / 3.0
                            * (-2.0 / 3.0 * a * i1 * hh + 2.0 * a * f[(m, n)] * h[(i, kk)]
                                - a * i1 * hx);
                    let dg = 2.0 * f[(m, n)] * f[(i, kk)] + i1 * dd
                        - (delta(i, m) * c[(n, kk)] + f[(i, n)] * f[(m, kk)] + b[(i, m)] * delta(kk, n));
                    let iso2 = bb * dg - 4.0 / 3.0 * bb * h[(m, n)] * g[(i, kk)]
                        - 2.0 / 3.0
                            * (-4.0 / 3.0 * bb * i2 * hh + 2.0 * bb * g[(m, n)] * h[(i, kk)]
                                - bb * i2 * hx);
                    let vol = (2.0 * j - 1.0) * j * hh - (j * j - j) * hx;
                    l[(flat(i, kk), flat(m, n))] = mu1 * iso1 + mu2 * iso2 + bulk * vol;
                }
            }
        }
    }
    l
}

impl Material for MooneyRivlin {
    fn name(&self) -> &str {
        "mooney-rivlin"
    }

    fn params(&self) -> &MaterialParams {
        &self.params
    }

    fn energy(&self, f: &Matrix3<f64>) -> Result<f64> {
        mooney_rivlin_psi(f, &self.params)
    }

    fn stress(&self, f: &Matrix3<f64>) -> Result<Matrix3<f64>> {
        mooney_rivlin_stress(f, &self.params)
    }

    fn tangent(&self, f: &Matrix3<f64>) -> Result<Tensor4> {
        mooney_rivlin_tangent(f, &self.params)
    }

    fn stress_and_tangent(&self, f: &Matrix3<f64>) -> Result<(Matrix3<f64>, Tensor4)> {
        let k = Kinematics::new(f)?;
        Ok((stress_from(&k, &self.params), tangent_from(&k, &self.params)))
    }
}
