//! Meshes of analytic surfaces.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::Vector3;

use super::{SurfaceMesh, EDGE_VERTICES};
use crate::error::{Error, Result};

/// Open cylinder of the given radius around the z-axis, spanning
/// `0 <= z <= height`, with outward normals. Both end rings are boundary.
pub fn generate_cylinder(
    radius: f64,
    height: f64,
    axial_divisions: usize,
    circumferential_divisions: usize,
    geometry_order: usize,
) -> Result<SurfaceMesh> {
    if !(radius > 0.0 && height > 0.0) {
        return Err(Error::Parameter(format!(
            "cylinder needs positive radius and height, got {radius} and {height}"
        )));
    }
    if axial_divisions < 2 || circumferential_divisions < 3 {
        return Err(Error::Parameter(format!(
            "cylinder needs at least 2 axial and 3 circumferential divisions, got {axial_divisions} and {circumferential_divisions}"
        )));
    }
    check_order(geometry_order)?;
    let (n, m) = (axial_divisions, circumferential_divisions);
    let id = |i: usize, j: usize| i * m + (j % m);
    let mut nodes = Vec::with_capacity((n + 1) * m);
    for i in 0..=n {
        let z = height * i as f64 / n as f64;
        for j in 0..m {
            let t = 2.0 * PI * j as f64 / m as f64;
            nodes.push(Vector3::new(radius * t.cos(), radius * t.sin(), z));
        }
    }
    let mut tris = Vec::with_capacity(6 * n * m);
    for i in 0..n {
        for j in 0..m {
            let (a, b, c, d) = (id(i, j), id(i, j + 1), id(i + 1, j + 1), id(i + 1, j));
            tris.extend([a, b, c, a, c, d]);
        }
    }
    let project = |p: Vector3<f64>| {
        let r = (p.x * p.x + p.y * p.y).sqrt();
        Vector3::new(p.x * radius / r, p.y * radius / r, p.z)
    };
    build(nodes, tris, geometry_order, project)
}

/// Closed oblate spheroid `(x^2 + y^2)/r_max^2 + z^2/r_min^2 = 1` from a
/// recursively subdivided octahedron. Every node lies on the exact surface.
pub fn generate_spheroid(
    r_max: f64,
    r_min: f64,
    refinement: usize,
    geometry_order: usize,
) -> Result<SurfaceMesh> {
    if !(r_min > 0.0 && r_max >= r_min) {
        return Err(Error::Parameter(format!(
            "spheroid needs r_max >= r_min > 0, got {r_max} and {r_min}"
        )));
    }
    check_order(geometry_order)?;
    let mut nodes = vec![
        Vector3::x(),
        Vector3::y(),
        -Vector3::x(),
        -Vector3::y(),
        Vector3::z(),
        -Vector3::z(),
    ];
    let mut tris = vec![
        0, 1, 4, 1, 2, 4, 2, 3, 4, 3, 0, 4, //
        1, 0, 5, 2, 1, 5, 3, 2, 5, 0, 3, 5,
    ];
    let to_sphere = |p: Vector3<f64>| p.normalize();
    for _ in 0..refinement {
        (nodes, tris) = subdivide(&nodes, &tris, to_sphere);
    }
    let mesh = build(nodes, tris, geometry_order, to_sphere)?;
    let scaled = mesh
        .nodes()
        .iter()
        .map(|p| Vector3::new(r_max * p.x, r_max * p.y, r_min * p.z))
        .collect();
    mesh.with_nodes(scaled)
}

/// Flat disk of the given radius in the plane z = 0 (normal +z), obtained by
/// subdividing a hexagon and stretching it radially onto the circle.
pub fn generate_disk(radius: f64, refinement: usize, geometry_order: usize) -> Result<SurfaceMesh> {
    if !(radius > 0.0) {
        return Err(Error::Parameter(format!("disk radius must be positive, got {radius}")));
    }
    check_order(geometry_order)?;
    let mut nodes = vec![Vector3::zeros()];
    for k in 0..6 {
        let t = PI / 3.0 * k as f64;
        nodes.push(Vector3::new(t.cos(), t.sin(), 0.0));
    }
    let mut tris = Vec::new();
    for k in 0..6 {
        tris.extend([0, 1 + k, 1 + (k + 1) % 6]);
    }
    for _ in 0..refinement {
        (nodes, tris) = subdivide(&nodes, &tris, |p| p);
    }
    let mesh = build(nodes, tris, geometry_order, |p| p)?;
    let stretched = mesh
        .nodes()
        .iter()
        .map(|p| {
            let r = p.norm();
            if r == 0.0 {
                return *p;
            }
            // distance from the centre to the hexagon boundary along p
            let t = p.y.atan2(p.x).rem_euclid(PI / 3.0) - PI / 6.0;
            let rho = (PI / 6.0).cos() / t.cos();
            p * (radius / rho)
        })
        .collect();
    mesh.with_nodes(stretched)
}

/// Adds midside nodes to a linear mesh, placing each at `project(midpoint)`.
pub fn elevate_to_quadratic(
    mesh: &SurfaceMesh,
    project: impl Fn(Vector3<f64>) -> Vector3<f64>,
) -> Result<SurfaceMesh> {
    if mesh.geometry_order() != 1 {
        return Err(Error::Parameter("mesh is already quadratic".into()));
    }
    let mut nodes = mesh.nodes().to_vec();
    let mut midside: HashMap<(usize, usize), usize> = HashMap::new();
    let mut connectivity = Vec::with_capacity(2 * mesh.connectivity().len());
    for el in mesh.elements() {
        connectivity.extend_from_slice(el);
        for [a, b] in EDGE_VERTICES {
            let (u, v) = (el[a].min(el[b]), el[a].max(el[b]));
            let idx = *midside.entry((u, v)).or_insert_with(|| {
                nodes.push(project(0.5 * (mesh.nodes()[u] + mesh.nodes()[v])));
                nodes.len() - 1
            });
            connectivity.push(idx);
        }
    }
    SurfaceMesh::new(nodes, connectivity, 2)
}

fn check_order(order: usize) -> Result<()> {
    if order == 1 || order == 2 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("geometry order must be 1 or 2, got {order}")))
    }
}

fn build(
    nodes: Vec<Vector3<f64>>,
    tris: Vec<usize>,
    order: usize,
    project: impl Fn(Vector3<f64>) -> Vector3<f64>,
) -> Result<SurfaceMesh> {
    let linear = SurfaceMesh::new(nodes, tris, 1)?;
    if order == 1 {
        Ok(linear)
    } else {
        elevate_to_quadratic(&linear, project)
    }
}

/// One level of 1-to-4 midpoint subdivision.
fn subdivide(
    nodes: &[Vector3<f64>],
    tris: &[usize],
    project: impl Fn(Vector3<f64>) -> Vector3<f64>,
) -> (Vec<Vector3<f64>>, Vec<usize>) {
    let mut nodes = nodes.to_vec();
    let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, nodes: &mut Vec<Vector3<f64>>| {
        *mids.entry((a.min(b), a.max(b))).or_insert_with(|| {
            nodes.push(project(0.5 * (nodes[a] + nodes[b])));
            nodes.len() - 1
        })
    };
    let mut out = Vec::with_capacity(4 * tris.len());
    for t in tris.chunks_exact(3) {
        let (a, b, c) = (t[0], t[1], t[2]);
        let ab = mid(a, b, &mut nodes);
        let bc = mid(b, c, &mut nodes);
        let ca = mid(c, a, &mut nodes);
        out.extend([a, ab, ca, ab, b, bc, ca, bc, c, ab, bc, ca]);
    }
    (nodes, out)
}
