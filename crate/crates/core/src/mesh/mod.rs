//! Triangulated surface meshes with linear or quadratic geometry.

mod generate;
pub mod io;
mod reference;

use std::collections::HashMap;

use nalgebra::Vector3;

use crate::error::{Error, Result};

pub use generate::{elevate_to_quadratic, generate_cylinder, generate_disk, generate_spheroid};
pub use reference::{QuadratureRule, ReferenceElement, EDGE_VERTICES};

/// An immutable triangulated surface.
///
/// Quadratic elements store their three vertices first and then the three
/// edge midside nodes, edge `k` opposite vertex `k` (see [`EDGE_VERTICES`]).
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    nodes: Vec<Vector3<f64>>,
    connectivity: Vec<usize>,
    geometry_order: usize,
    boundary: Vec<bool>,
}

impl SurfaceMesh {
    /// Builds a mesh from node positions and flat element connectivity
    /// (3 or 6 indices per element depending on `geometry_order`).
    pub fn new(
        nodes: Vec<Vector3<f64>>,
        connectivity: Vec<usize>,
        geometry_order: usize,
    ) -> Result<Self> {
        let stride = match geometry_order {
            1 => 3,
            2 => 6,
            o => {
                return Err(Error::Parameter(format!(
                    "geometry order must be 1 or 2, got {o}"
                )))
            }
        };
        if !connectivity.len().is_multiple_of(stride) {
            return Err(Error::Parameter(format!(
                "connectivity length {} is not a multiple of {stride}",
                connectivity.len()
            )));
        }
        if let Some(&bad) = connectivity.iter().find(|&&i| i >= nodes.len()) {
            return Err(Error::Parameter(format!(
                "node index {bad} out of range ({} nodes)",
                nodes.len()
            )));
        }
        let mut mesh = Self {
            nodes,
            connectivity,
            geometry_order,
            boundary: Vec::new(),
        };
        mesh.boundary = mesh.detect_boundary();
        Ok(mesh)
    }

    pub fn nodes(&self) -> &[Vector3<f64>] {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn geometry_order(&self) -> usize {
        self.geometry_order
    }

    pub fn nodes_per_element(&self) -> usize {
        if self.geometry_order == 1 {
            3
        } else {
            6
        }
    }

    pub fn num_elements(&self) -> usize {
        self.connectivity.len() / self.nodes_per_element()
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let s = self.nodes_per_element();
        &self.connectivity[e * s..(e + 1) * s]
    }

    pub fn elements(&self) -> impl ExactSizeIterator<Item = &[usize]> + '_ {
        self.connectivity.chunks_exact(self.nodes_per_element())
    }

    pub fn connectivity(&self) -> &[usize] {
        &self.connectivity
    }

    /// Per-node flag: node lies on an edge used by exactly one element.
    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.boundary[node]
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary.iter().any(|&b| b)
    }

    /// Nodes referenced as element vertices (the degrees of freedom of a
    /// linear field on this mesh).
    pub fn vertex_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.nodes.len()];
        for el in self.elements() {
            for &v in &el[..3] {
                flags[v] = true;
            }
        }
        flags
    }

    /// Returns a copy with node positions replaced; connectivity unchanged.
    pub fn with_nodes(&self, nodes: Vec<Vector3<f64>>) -> Result<Self> {
        if nodes.len() != self.nodes.len() {
            return Err(Error::Parameter(format!(
                "expected {} node positions, got {}",
                self.nodes.len(),
                nodes.len()
            )));
        }
        Ok(Self {
            nodes,
            connectivity: self.connectivity.clone(),
            geometry_order: self.geometry_order,
            boundary: self.boundary.clone(),
        })
    }

    /// Renumbers nodes: new node `i` is old node `order[i]`.
    pub fn renumbered(&self, order: &[usize]) -> Result<Self> {
        let n = self.nodes.len();
        let mut inverse = vec![usize::MAX; n];
        if order.len() != n {
            return Err(Error::Parameter("renumbering must be a permutation".into()));
        }
        for (new, &old) in order.iter().enumerate() {
            if old >= n || inverse[old] != usize::MAX {
                return Err(Error::Parameter("renumbering must be a permutation".into()));
            }
            inverse[old] = new;
        }
        let nodes = order.iter().map(|&o| self.nodes[o]).collect();
        let connectivity = self.connectivity.iter().map(|&o| inverse[o]).collect();
        Self::new(nodes, connectivity, self.geometry_order)
    }

    /// Axis-aligned bounding box diagonal length.
    pub fn bounding_diagonal(&self) -> f64 {
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for p in &self.nodes {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (hi - lo).norm()
    }

    /// Vertex-pair edges with the number of elements using each.
    pub fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut counts = HashMap::new();
        for el in self.elements() {
            for [a, b] in EDGE_VERTICES {
                let (u, v) = (el[a], el[b]);
                *counts.entry((u.min(v), u.max(v))).or_insert(0) += 1;
            }
        }
        counts
    }

    fn detect_boundary(&self) -> Vec<bool> {
        let counts = self.edge_counts();
        let mut flags = vec![false; self.nodes.len()];
        for el in self.elements() {
            for (k, [a, b]) in EDGE_VERTICES.into_iter().enumerate() {
                let (u, v) = (el[a], el[b]);
                if counts[&(u.min(v), u.max(v))] == 1 {
                    flags[u] = true;
                    flags[v] = true;
                    if self.geometry_order == 2 {
                        flags[el[3 + k]] = true;
                    }
                }
            }
        }
        flags
    }
}
