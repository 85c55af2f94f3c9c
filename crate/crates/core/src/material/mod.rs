//! Three-dimensional hyperelastic material models.
//!
//! Every model provides the strain energy density `Psi(F)`, the first
//! Piola-Kirchhoff stress `P = dPsi/dF` and the tangent `L = dP/dF`
//! (see [`crate::tensor`] for the storage of `L`).

mod hooke;
mod mooney_rivlin;

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::tensor::Tensor4;

pub use hooke::{hooke_stress, hooke_tangent, Hooke};
pub use mooney_rivlin::{mooney_rivlin_psi, mooney_rivlin_stress, mooney_rivlin_tangent, MooneyRivlin};

/// Elastic constants and membrane thickness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Young's modulus (Pa).
    pub youngs_modulus: f64,
    /// Poisson's ratio.
    pub poisson_ratio: f64,
    /// Membrane thickness (m).
    pub thickness: f64,
}

impl MaterialParams {
    pub fn new(youngs_modulus: f64, poisson_ratio: f64, thickness: f64) -> Result<Self> {
        if !(youngs_modulus > 0.0) {
            return Err(Error::Parameter(format!("E must be positive, got {youngs_modulus}")));
        }
        if !(0.0..=0.5).contains(&poisson_ratio) {
            return Err(Error::Parameter(format!("nu must lie in [0, 0.5], got {poisson_ratio}")));
        }
        if !(thickness > 0.0) {
            return Err(Error::Parameter(format!("thickness must be positive, got {thickness}")));
        }
        Ok(Self {
            youngs_modulus,
            poisson_ratio,
            thickness,
        })
    }

    /// `K = E nu / (1 - nu^2)`, the volumetric modulus of the Mooney-Rivlin energy.
    pub fn bulk_modulus(&self) -> f64 {
        let (e, nu) = (self.youngs_modulus, self.poisson_ratio);
        e * nu / (1.0 - nu * nu)
    }

    /// `mu = E / (2 (1 + nu))`
    pub fn shear_modulus(&self) -> f64 {
        self.youngs_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }

    /// `mu1 = mu2 = mu / 2`
    pub fn mu1(&self) -> f64 {
        0.5 * self.shear_modulus()
    }

    pub fn mu2(&self) -> f64 {
        0.5 * self.shear_modulus()
    }

    /// First Lame parameter; undefined at `nu = 0.5`.
    pub fn lame_lambda(&self) -> Result<f64> {
        let (e, nu) = (self.youngs_modulus, self.poisson_ratio);
        if nu >= 0.5 {
            return Err(Error::SingularLame);
        }
        Ok(e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)))
    }
}

/// A hyperelastic model usable by the plane-stress and assembly layers.
pub trait Material: Send + Sync + std::fmt::Debug {
    fn name(&self) -> &str;

    fn params(&self) -> &MaterialParams;

    fn energy(&self, f: &Matrix3<f64>) -> Result<f64>;

    fn stress(&self, f: &Matrix3<f64>) -> Result<Matrix3<f64>>;

    fn tangent(&self, f: &Matrix3<f64>) -> Result<Tensor4>;

    fn stress_and_tangent(&self, f: &Matrix3<f64>) -> Result<(Matrix3<f64>, Tensor4)> {
        Ok((self.stress(f)?, self.tangent(f)?))
    }
}

/// Material selected by name, as read from configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    MooneyRivlin,
    Hooke,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mooney-rivlin" | "mooney_rivlin" | "mooneyrivlin" => Ok(Self::MooneyRivlin),
            "hooke" | "linear" => Ok(Self::Hooke),
            other => Err(Error::Config(format!("unknown material model '{other}'"))),
        }
    }
}

pub fn build_material(kind: ModelKind, params: MaterialParams) -> Result<Box<dyn Material>> {
    Ok(match kind {
        ModelKind::MooneyRivlin => Box::new(MooneyRivlin::new(params)),
        ModelKind::Hooke => Box::new(Hooke::new(params)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elastic_constants() {
        let p = MaterialParams::new(10e6, 0.5, 0.01).unwrap();
        assert_eq!(p.bulk_modulus(), 10e6 * 0.5 / (1.0 - 0.25));
        assert_eq!(p.shear_modulus(), 10e6 / 3.0);
        assert_eq!(p.mu1(), p.shear_modulus() / 2.0);
        assert!(matches!(p.lame_lambda(), Err(Error::SingularLame)));
    }

    #[test]
    fn invalid_params() {
        assert!(MaterialParams::new(0.0, 0.3, 1.0).is_err());
        assert!(MaterialParams::new(1.0, 0.6, 1.0).is_err());
        assert!(MaterialParams::new(1.0, -0.1, 1.0).is_err());
        assert!(MaterialParams::new(1.0, 0.3, 0.0).is_err());
    }

    #[test]
    fn model_names() {
        assert_eq!("Mooney-Rivlin".parse::<ModelKind>().unwrap(), ModelKind::MooneyRivlin);
        assert_eq!("hooke".parse::<ModelKind>().unwrap(), ModelKind::Hooke);
        assert!("neo".parse::<ModelKind>().is_err());
    }
}
