//! Reference triangle, Lagrange shape functions and quadrature.
//!
//! The reference triangle has vertices `(0,0)`, `(1,0)`, `(0,1)`. Quadratic
//! elements number their six nodes vertices first, then the edge midpoints
//! with edge `k` opposite vertex `k`:
//!
//! ```text
//!   2
//!   | \
//!   4   3        3 = mid(1,2), 4 = mid(2,0), 5 = mid(0,1)
//!   |     \
//!   0---5---1
//! ```

use crate::error::{Error, Result};

/// Local vertex pairs of the three edges; edge `k` is opposite vertex `k`.
pub const EDGE_VERTICES: [[usize; 2]; 3] = [[1, 2], [2, 0], [0, 1]];

/// A quadrature rule on the reference triangle. Weights sum to 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Three interior points, exact for quadratics.
    pub fn degree2() -> Self {
        let a = 1.0 / 6.0;
        let b = 2.0 / 3.0;
        Self {
            points: vec![[a, a], [b, a], [a, b]],
            weights: vec![1.0 / 6.0; 3],
        }
    }

    /// Seven-point rule exact for quintics.
    pub fn degree5() -> Self {
        let s15 = 15.0_f64.sqrt();
        let a1 = (6.0 - s15) / 21.0;
        let a2 = (6.0 + s15) / 21.0;
        let w1 = (155.0 - s15) / 2400.0;
        let w2 = (155.0 + s15) / 2400.0;
        let t = 1.0 / 3.0;
        Self {
            points: vec![
                [t, t],
                [a1, a1],
                [1.0 - 2.0 * a1, a1],
                [a1, 1.0 - 2.0 * a1],
                [a2, a2],
                [1.0 - 2.0 * a2, a2],
                [a2, 1.0 - 2.0 * a2],
            ],
            weights: vec![9.0 / 80.0, w1, w1, w1, w2, w2, w2],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Lagrange triangle of degree 1 or 2 together with the quadrature rule used
/// when it serves as the geometry element.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceElement {
    degree: usize,
    quadrature: QuadratureRule,
}

impl ReferenceElement {
    pub fn new(degree: usize) -> Result<Self> {
        let quadrature = match degree {
            1 => QuadratureRule::degree2(),
            2 => QuadratureRule::degree5(),
            d => {
                return Err(Error::Parameter(format!(
                    "element degree must be 1 or 2, got {d}"
                )))
            }
        };
        Ok(Self { degree, quadrature })
    }

    pub fn linear() -> Self {
        Self::new(1).expect("degree 1")
    }

    pub fn quadratic() -> Self {
        Self::new(2).expect("degree 2")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_nodes(&self) -> usize {
        if self.degree == 1 {
            3
        } else {
            6
        }
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quadrature
    }

    /// Reference coordinates of the element nodes.
    pub fn nodes(&self) -> Vec<[f64; 2]> {
        let mut nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        if self.degree == 2 {
            nodes.extend([[0.5, 0.5], [0.0, 0.5], [0.5, 0.0]]);
        }
        nodes
    }

    /// Shape function values at `(xi, eta)`; only the first `num_nodes()`
    /// entries are meaningful.
    pub fn values(&self, xi: f64, eta: f64) -> [f64; 6] {
        let l = [1.0 - xi - eta, xi, eta];
        if self.degree == 1 {
            return [l[0], l[1], l[2], 0.0, 0.0, 0.0];
        }
        [
            l[0] * (2.0 * l[0] - 1.0),
            l[1] * (2.0 * l[1] - 1.0),
            l[2] * (2.0 * l[2] - 1.0),
            4.0 * l[1] * l[2],
            4.0 * l[2] * l[0],
            4.0 * l[0] * l[1],
        ]
    }

    /// Derivatives `[d/dxi, d/deta]` of each shape function at `(xi, eta)`.
    pub fn gradients(&self, xi: f64, eta: f64) -> [[f64; 2]; 6] {
        // dL/dxi and dL/deta of the barycentrics
        const DL: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        if self.degree == 1 {
            return [DL[0], DL[1], DL[2], [0.0; 2], [0.0; 2], [0.0; 2]];
        }
        let l = [1.0 - xi - eta, xi, eta];
        let mut g = [[0.0; 2]; 6];
        for v in 0..3 {
            for d in 0..2 {
                g[v][d] = (4.0 * l[v] - 1.0) * DL[v][d];
            }
        }
        for (k, [a, b]) in EDGE_VERTICES.iter().copied().enumerate() {
            for d in 0..2 {
                g[3 + k][d] = 4.0 * (DL[a][d] * l[b] + l[a] * DL[b][d]);
            }
        }
        g
    }
}
