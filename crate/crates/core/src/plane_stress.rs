//! Implicit plane stress at a quadrature point.
//!
//! Given the surface deformation gradient `F_s` and the reference normal `N`,
//! the director `d` is found by Newton iteration so that the full gradient
//! `F = F_s + d (x) N` carries no traction across the normal, `P(F) N = 0`.
//! The consistent tangent of the map `F_s -> P` is the Schur complement
//!
//! `L_s = L - L_dN L_NN^-1 L_Nd`,  with `L_NN = [I (x) N] : L . N`.

use nalgebra::{Matrix3, SMatrix, Vector3};

use crate::error::{Error, Result};
use crate::material::Material;
use crate::tensor::{flat, Tensor4};

const POLISH: f64 = 1e-6;

/// The 9x3 embedding `v -> flatten(v (x) N)`.
type Embedding = SMatrix<f64, 9, 3>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneStressOptions {
    /// Tolerance on `|P N|` relative to Young's modulus.
    pub rel_tol: f64,
    pub max_iters: usize,
    /// Step halvings allowed when a trial director inverts `F`.
    pub max_halvings: usize,
}

impl Default for PlaneStressOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            max_iters: 30,
            max_halvings: 10,
        }
    }
}

/// Converged plane-stress state at one quadrature point.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneStressState {
    pub director: Vector3<f64>,
    /// Full deformation gradient `F_s + d (x) N`.
    pub deformation: Matrix3<f64>,
    /// Condensed stress `P(F)`.
    pub stress: Matrix3<f64>,
    /// Condensed tangent `dP/dF_s`.
    pub tangent: Tensor4,
    /// Newton updates performed.
    pub iterations: usize,
    /// `|P N|` before each update and at convergence.
    pub residual_history: Vec<f64>,
}

fn embedding(normal: &Vector3<f64>) -> Embedding {
    let mut e = Embedding::zeros();
    for m in 0..3 {
        for n in 0..3 {
            e[(flat(m, n), m)] = normal[n];
        }
    }
    e
}

/// `L_NN = [I (x) N] : L . N`
pub fn normal_normal_block(l: &Tensor4, normal: &Vector3<f64>) -> Matrix3<f64> {
    let e = embedding(normal);
    e.transpose() * l * e
}

/// Static condensation of the director from a full tangent.
pub fn condense(l: &Tensor4, normal: &Vector3<f64>) -> Result<Tensor4> {
    let e = embedding(normal);
    let l_dn = l * e;
    let l_nd = e.transpose() * l;
    let lu = (e.transpose() * l_dn).lu();
    let x = lu.solve(&l_nd).ok_or(Error::CondensationSingular)?;
    Ok(l - l_dn * x)
}

/// Consistent tangent of a converged state, recomputed from the material.
pub fn condensed_tangent(
    state: &PlaneStressState,
    normal: &Vector3<f64>,
    material: &dyn Material,
) -> Result<Tensor4> {
    condense(&material.tangent(&state.deformation)?, normal)
}

/// Director mapping `N` to the deformed unit normal divided by the area
/// stretch: exact for rigid motions and for isochoric incompressible
/// stretches, and `0` at `F_s = I`. `None` when the tangent plane collapses.
pub fn director_guess(surface_gradient: &Matrix3<f64>, normal: &Vector3<f64>) -> Option<Vector3<f64>> {
    let t1 = normal.cross(&Vector3::x()).try_normalize(1e-3).unwrap_or_else(|| normal.cross(&Vector3::y()).normalize());
    let t2 = normal.cross(&t1);
    // cof(F_s) N = F_s t1 x F_s t2 for the positively oriented pair
    let c = (surface_gradient * t1).cross(&(surface_gradient * t2));
    let j2 = c.norm_squared();
    (j2 > 0.0).then(|| c / j2 - surface_gradient * normal)
}

/// Solves `P(F_s + d (x) N) N = 0` for the director `d`.
///
/// Without a usable warm start (none, or one that inverts `F`) the
/// iteration begins at [`director_guess`].
pub fn solve_director(
    surface_gradient: &Matrix3<f64>,
    normal: &Vector3<f64>,
    material: &dyn Material,
    warm_start: Option<Vector3<f64>>,
    options: &PlaneStressOptions,
) -> Result<PlaneStressState> {
    let tol = options.rel_tol * material.params().youngs_modulus;
    let full = |d: &Vector3<f64>| surface_gradient + d * normal.transpose();
    let mut director = match warm_start {
        Some(d) if full(&d).determinant() > 0.0 => d,
        _ => director_guess(surface_gradient, normal)
            .ok_or(Error::InvertedElement { det: 0.0 })?,
    };
    let det0 = full(&director).determinant();
    if !(det0 > 0.0) {
        return Err(Error::InvertedElement { det: det0 });
    }
    let mut history = Vec::new();
    let mut polished = false;
    for iteration in 0..=options.max_iters {
        let f = full(&director);
        let (p, l) = material.stress_and_tangent(&f)?;
        let residual = p * normal;
        history.push(residual.norm());
        // once within tolerance take one more (quadratically convergent)
        // step, so warm-started directors do not leave tolerance-sized noise
        // in the global residual
        let r = residual.norm();
        if r <= POLISH * tol || (r <= tol && (polished || iteration == options.max_iters)) {
            return Ok(PlaneStressState {
                director,
                deformation: f,
                stress: p,
                tangent: condense(&l, normal)?,
                iterations: iteration,
                residual_history: history,
            });
        }
        if iteration == options.max_iters {
            break;
        }
        polished = r <= tol;
        let l_nn = normal_normal_block(&l, normal);
        let step = l_nn.lu().solve(&(-residual)).ok_or(Error::CondensationSingular)?;
        let mut scale = 1.0;
        let mut halvings = 0;
        loop {
            let det = full(&(director + scale * step)).determinant();
            if det > 0.0 {
                break;
            }
            halvings += 1;
            if halvings > options.max_halvings {
                return Err(Error::InvertedElement { det });
            }
            scale *= 0.5;
        }
        director += scale * step;
    }
    Err(Error::LocalDivergence { history })
}
