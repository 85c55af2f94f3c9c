//! OFF mesh files and VTK legacy output.
//!
//! Quadratic meshes are written as OFF with a `# geometry_order 2` comment
//! directly after the `OFF` keyword and six indices per face, in the node
//! order documented on [`SurfaceMesh`].

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::Vector3;

use super::SurfaceMesh;
use crate::error::{Error, Result};

const ORDER_TAG: &str = "# geometry_order";

pub fn read_off(path: impl AsRef<Path>) -> Result<SurfaceMesh> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_off(&text, path)
}

pub fn write_off(mesh: &SurfaceMesh, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_off(mesh))?;
    Ok(())
}

pub fn format_off(mesh: &SurfaceMesh) -> String {
    let mut s = String::from("OFF\n");
    if mesh.geometry_order() == 2 {
        let _ = writeln!(s, "{ORDER_TAG} 2");
    }
    let _ = writeln!(s, "{} {} 0", mesh.num_nodes(), mesh.num_elements());
    for p in mesh.nodes() {
        // Display for f64 is the shortest round-trip representation
        let _ = writeln!(s, "{} {} {}", p.x, p.y, p.z);
    }
    for el in mesh.elements() {
        let _ = write!(s, "{}", el.len());
        for i in el {
            let _ = write!(s, " {i}");
        }
        s.push('\n');
    }
    s
}

/// Parses OFF text; `path` is only used for error messages.
pub fn parse_off(text: &str, path: &Path) -> Result<SurfaceMesh> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let order = std::cell::Cell::new(1usize);
    let mut lines = text.lines().enumerate().filter_map(|(i, raw)| {
        let no = i + 1;
        let trimmed = raw.trim();
        if let Some(rest) = trimmed.strip_prefix(ORDER_TAG) {
            return Some((no, trimmed, Some(rest.trim())));
        }
        let content = trimmed.split('#').next().unwrap_or("").trim();
        (!content.is_empty()).then_some((no, content, None))
    });

    let mut next = |what: &str| -> Result<(usize, &str)> {
        loop {
            match lines.next() {
                Some((no, _, Some(tag))) => {
                    order.set(tag
                        .parse()
                        .map_err(|_| err(no, format!("bad geometry order tag '{tag}'")))?);
                }
                Some((no, content, None)) => return Ok((no, content)),
                None => return Err(err(0, format!("unexpected end of file, expected {what}"))),
            }
        }
    };

    let (no, header) = next("OFF header")?;
    let counts_inline = match header.strip_prefix("OFF") {
        Some(rest) => rest.trim().to_string(),
        None => return Err(err(no, format!("expected 'OFF', found '{header}'"))),
    };
    let (no, counts) = if counts_inline.is_empty() {
        next("counts line")?
    } else {
        (no, counts_inline.as_str())
    };
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| err(no, format!("bad count '{t}'"))))
        .collect::<Result<_>>()?;
    if counts.len() < 2 {
        return Err(err(no, "expected vertex and face counts".into()));
    }
    let (nv, nf) = (counts[0], counts[1]);

    let mut nodes = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (no, line) = next("vertex")?;
        let xyz: Vec<f64> = line
            .split_whitespace()
            .take(3)
            .map(|t| t.parse().map_err(|_| err(no, format!("bad coordinate '{t}'"))))
            .collect::<Result<_>>()?;
        if xyz.len() != 3 {
            return Err(err(no, "vertex needs three coordinates".into()));
        }
        nodes.push(Vector3::new(xyz[0], xyz[1], xyz[2]));
    }

    let mut connectivity = Vec::new();
    let mut face_order = None;
    for _ in 0..nf {
        let (no, line) = next("face")?;
        let mut tokens = line.split_whitespace();
        let k: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err(no, "bad face vertex count".into()))?;
        let this_order = match (k, order.get()) {
            (3, 1) => 1,
            (6, 2) => 2,
            _ => {
                return Err(Error::UnsupportedElement {
                    path: path.to_path_buf(),
                    line: no,
                    vertices: k,
                })
            }
        };
        if face_order.is_some_and(|o| o != this_order) {
            return Err(err(no, "mixed element orders".into()));
        }
        face_order = Some(this_order);
        for _ in 0..k {
            let i: usize = tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err(no, "bad face index".into()))?;
            if i >= nv {
                return Err(err(no, format!("face index {i} out of range")));
            }
            connectivity.push(i);
        }
    }
    SurfaceMesh::new(nodes, connectivity, face_order.unwrap_or(order.get()))
}

/// A named per-node field for VTK output.
#[derive(Debug, Clone, Copy)]
pub enum NodalField<'a> {
    Vector(&'a str, &'a [Vector3<f64>]),
    Scalar(&'a str, &'a [f64]),
}

/// Writes the mesh and nodal fields as a legacy ASCII unstructured grid.
pub fn write_vtk(mesh: &SurfaceMesh, fields: &[NodalField<'_>], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_vtk(mesh, fields)?)?;
    Ok(())
}

pub fn format_vtk(mesh: &SurfaceMesh, fields: &[NodalField<'_>]) -> Result<String> {
    let n = mesh.num_nodes();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\nmembrane surface\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {n} double");
    for p in mesh.nodes() {
        let _ = writeln!(s, "{} {} {}", p.x, p.y, p.z);
    }
    let npe = mesh.nodes_per_element();
    let ne = mesh.num_elements();
    let _ = writeln!(s, "CELLS {ne} {}", ne * (npe + 1));
    for el in mesh.elements() {
        // VTK_QUADRATIC_TRIANGLE lists midsides as (0,1), (1,2), (2,0)
        let ordered: Vec<usize> = if npe == 3 {
            el.to_vec()
        } else {
            vec![el[0], el[1], el[2], el[5], el[3], el[4]]
        };
        let _ = write!(s, "{npe}");
        for i in ordered {
            let _ = write!(s, " {i}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    let cell_type = if npe == 3 { 5 } else { 22 };
    for _ in 0..ne {
        let _ = writeln!(s, "{cell_type}");
    }
    if !fields.is_empty() {
        let _ = writeln!(s, "POINT_DATA {n}");
    }
    for field in fields {
        match *field {
            NodalField::Vector(name, values) => {
                check_len(name, values.len(), n)?;
                let _ = writeln!(s, "VECTORS {name} double");
                for v in values {
                    let _ = writeln!(s, "{} {} {}", v.x, v.y, v.z);
                }
            }
            NodalField::Scalar(name, values) => {
                check_len(name, values.len(), n)?;
                let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
                for v in values {
                    let _ = writeln!(s, "{v}");
                }
            }
        }
    }
    Ok(s)
}

fn check_len(name: &str, got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "field '{name}' has {got} values for {expected} nodes"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_cylinder;

    #[test]
    fn single_face() {
        let text = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
        let m = parse_off(text, Path::new("t.off")).unwrap();
        assert_eq!(m.num_elements(), 1);
        assert_eq!(m.boundary_flags().iter().filter(|&&b| b).count(), 3);
    }

    #[test]
    fn round_trip_is_bit_exact() {
        for order in [1, 2] {
            let m = generate_cylinder(0.5, 0.6, 3, 7, order).unwrap();
            let back = parse_off(&format_off(&m), Path::new("x.off")).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn quad_face_is_unsupported() {
        let text = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        match parse_off(text, Path::new("q.off")) {
            Err(Error::UnsupportedElement { line, vertices, .. }) => {
                assert_eq!((line, vertices), (7, 4));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_reports_line() {
        let text = "OFF\n3 1 0\n0 0 0\n1 zero 0\n0 1 0\n3 0 1 2\n";
        match parse_off(text, Path::new("bad.off")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_file() {
        let text = "OFF\n3 1 0\n0 0 0\n";
        assert!(matches!(parse_off(text, Path::new("t.off")), Err(Error::Parse { .. })));
    }

    #[test]
    fn vtk_rejects_wrong_field_length() {
        let m = generate_cylinder(0.5, 0.6, 2, 4, 1).unwrap();
        let short = vec![Vector3::zeros(); 3];
        assert!(format_vtk(&m, &[NodalField::Vector("u", &short)]).is_err());
    }
}
