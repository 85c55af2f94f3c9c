//! Discrete tangential calculus on the reference surface.
//!
//! At each quadrature point the extended Jacobian has rows `dX/dxi`,
//! `dX/deta` and the discrete unit normal. Applying its inverse to
//! `(dphi/dxi, dphi/deta, 0)` yields the physical surface gradient of a
//! shape function, which is tangential by construction.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{ReferenceElement, SurfaceMesh};

/// Geometric data at one quadrature point of one element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementFrame {
    /// Unit normal from the cross product of the two tangent vectors.
    pub normal: Vector3<f64>,
    /// `I - N (x) N`.
    pub projector: Matrix3<f64>,
    /// Inverse of the extended Jacobian at zeta = 0.
    pub jacobian_inverse: Matrix3<f64>,
    /// Surface gradients of the displacement shape functions.
    pub gradients: Vec<Vector3<f64>>,
    /// Displacement shape function values.
    pub values: Vec<f64>,
    /// Reference position of the quadrature point.
    pub position: Vector3<f64>,
    /// Quadrature weight times surface Jacobian.
    pub weight: f64,
}

/// Frames at every quadrature point of element `element`.
///
/// `displacement` selects the shape functions whose gradients are
/// evaluated; its degree may not exceed the geometry order.
pub fn element_frames(
    mesh: &SurfaceMesh,
    element: usize,
    displacement: &ReferenceElement,
) -> Result<Vec<ElementFrame>> {
    let geometry = ReferenceElement::new(mesh.geometry_order())?;
    check_degrees(&geometry, displacement)?;
    frames_with(mesh, element, &geometry, displacement)
}

fn check_degrees(geometry: &ReferenceElement, displacement: &ReferenceElement) -> Result<()> {
    if displacement.degree() > geometry.degree() {
        return Err(Error::Parameter(format!(
            "displacement degree {} exceeds geometry order {}",
            displacement.degree(),
            geometry.degree()
        )));
    }
    Ok(())
}

fn frames_with(
    mesh: &SurfaceMesh,
    element: usize,
    geometry: &ReferenceElement,
    displacement: &ReferenceElement,
) -> Result<Vec<ElementFrame>> {
    let conn = mesh.element(element);
    let nodes = mesh.nodes();
    let rule = geometry.quadrature();
    let nd = displacement.num_nodes();
    let degenerate = |reason: String| Error::Geometry { element, reason };

    let mut frames = Vec::with_capacity(rule.len());
    for (q, (pt, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
        let gv = geometry.values(pt[0], pt[1]);
        let gg = geometry.gradients(pt[0], pt[1]);
        let mut position = Vector3::zeros();
        let mut a1 = Vector3::zeros();
        let mut a2 = Vector3::zeros();
        for (i, &node) in conn.iter().enumerate() {
            let x = nodes[node];
            position += gv[i] * x;
            a1 += gg[i][0] * x;
            a2 += gg[i][1] * x;
        }
        let cross = a1.cross(&a2);
        let jac = cross.norm();
        if !(jac > 0.0) || !jac.is_finite() {
            return Err(degenerate(format!("zero area at quadrature point {q}")));
        }
        let normal = cross / jac;
        let j = Matrix3::from_rows(&[a1.transpose(), a2.transpose(), normal.transpose()]);
        let jacobian_inverse = j
            .try_inverse()
            .ok_or_else(|| degenerate(format!("singular Jacobian at quadrature point {q}")))?;
        let dv = displacement.values(pt[0], pt[1]);
        let dg = displacement.gradients(pt[0], pt[1]);
        let gradients = (0..nd)
            .map(|i| jacobian_inverse * Vector3::new(dg[i][0], dg[i][1], 0.0))
            .collect();
        frames.push(ElementFrame {
            normal,
            projector: Matrix3::identity() - normal * normal.transpose(),
            jacobian_inverse,
            gradients,
            values: dv[..nd].to_vec(),
            position,
            weight: w * jac,
        });
    }
    Ok(frames)
}

/// `Grad_Gamma u = sum_j u_j (x) grad phi_j`, i.e. the transpose of
/// `grad_Gamma (x) u`. Right-multiplication by the normal gives zero.
pub fn surface_gradient(frame: &ElementFrame, nodal: &[Vector3<f64>]) -> Matrix3<f64> {
    debug_assert_eq!(nodal.len(), frame.gradients.len());
    nodal
        .iter()
        .zip(&frame.gradients)
        .fold(Matrix3::zeros(), |acc, (u, g)| acc + u * g.transpose())
}

/// Frames for every element of a mesh, computed once and reused.
#[derive(Debug, Clone)]
pub struct FrameCache {
    frames: Vec<Vec<ElementFrame>>,
}

impl FrameCache {
    pub fn new(mesh: &SurfaceMesh, displacement: &ReferenceElement) -> Result<Self> {
        let geometry = ReferenceElement::new(mesh.geometry_order())?;
        check_degrees(&geometry, displacement)?;
        let frames = (0..mesh.num_elements())
            .into_par_iter()
            .map(|e| frames_with(mesh, e, &geometry, displacement))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { frames })
    }

    pub fn element(&self, e: usize) -> &[ElementFrame] {
        &self.frames[e]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[ElementFrame]> + '_ {
        self.frames.iter().map(Vec::as_slice)
    }

    pub fn num_elements(&self) -> usize {
        self.frames.len()
    }

    /// Sum of all area weights.
    pub fn area(&self) -> f64 {
        self.frames.iter().flatten().map(|f| f.weight).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;

    fn unit_triangle(q: &Matrix3<f64>) -> SurfaceMesh {
        let nodes = [Vector3::zeros(), Vector3::x(), Vector3::y()]
            .iter()
            .map(|p| q * p)
            .collect();
        SurfaceMesh::new(nodes, vec![0, 1, 2], 1).unwrap()
    }

    #[test]
    fn flat_unit_triangle() {
        let m = unit_triangle(&Matrix3::identity());
        let frames = element_frames(&m, 0, &ReferenceElement::linear()).unwrap();
        let area: f64 = frames.iter().map(|f| f.weight).sum();
        assert!((area - 0.5).abs() < 1e-15);
        let expected = [
            Vector3::new(-1.0, -1.0, 0.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
        ];
        for f in &frames {
            assert!((f.normal - Vector3::z()).norm() < 1e-15);
            for (g, e) in f.gradients.iter().zip(&expected) {
                assert!((g - e).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn rotated_triangle_frames_rotate() {
        let q = *Rotation3::from_euler_angles(0.3, -1.1, 2.0).matrix();
        let frames = element_frames(&unit_triangle(&q), 0, &ReferenceElement::linear()).unwrap();
        let flat = element_frames(&unit_triangle(&Matrix3::identity()), 0, &ReferenceElement::linear()).unwrap();
        for (f, g) in frames.iter().zip(&flat) {
            assert!((f.weight - g.weight).abs() < 1e-15);
            for (a, b) in f.gradients.iter().zip(&g.gradients) {
                assert!((a - q * b).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn projector_and_tangential_gradients() {
        let m = crate::mesh::generate_spheroid(1.0, 0.5, 1, 2).unwrap();
        for re in [ReferenceElement::linear(), ReferenceElement::quadratic()] {
            let cache = FrameCache::new(&m, &re).unwrap();
            for f in cache.iter().flatten() {
                assert!((f.normal.norm() - 1.0).abs() < 1e-14);
                let t = f.projector;
                assert!((t * t - t).norm() < 1e-12);
                assert!((t - t.transpose()).norm() < 1e-15);
                assert!(f.weight > 0.0);
                for g in &f.gradients {
                    assert!(f.normal.dot(g).abs() < 1e-12 * g.norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn linear_field_is_exact_on_flat_element() {
        let m = SurfaceMesh::new(
            vec![Vector3::new(0.1, 0.2, 0.0), Vector3::new(1.3, -0.1, 0.0), Vector3::new(0.4, 0.9, 0.0)],
            vec![0, 1, 2],
            1,
        )
        .unwrap();
        let a = Matrix3::new(1.0, 2.0, -0.5, 0.3, -0.7, 0.2, 4.0, 0.1, 1.1);
        let u: Vec<_> = m.nodes().iter().map(|x| a * x).collect();
        for f in element_frames(&m, 0, &ReferenceElement::linear()).unwrap() {
            let grad = surface_gradient(&f, &u);
            assert!((grad - a * f.projector).norm() < 1e-14);
            assert!((grad * f.normal).norm() < 1e-14);
        }
        let constant = vec![Vector3::new(3.0, -1.0, 2.0); 3];
        for f in element_frames(&m, 0, &ReferenceElement::linear()).unwrap() {
            assert!(surface_gradient(&f, &constant).norm() < 1e-14);
        }
    }

    #[test]
    fn degenerate_element_is_named() {
        let m = SurfaceMesh::new(
            vec![Vector3::zeros(), Vector3::x(), Vector3::x() * 2.0],
            vec![0, 1, 2],
            1,
        )
        .unwrap();
        match element_frames(&m, 0, &ReferenceElement::linear()) {
            Err(Error::Geometry { element, .. }) => assert_eq!(element, 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn quadratic_displacement_needs_quadratic_geometry() {
        let m = unit_triangle(&Matrix3::identity());
        assert!(element_frames(&m, 0, &ReferenceElement::quadratic()).is_err());
    }
}
