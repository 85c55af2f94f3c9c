//! Minimal surfaces by fixed-point Laplace-Beltrami iteration.
//!
//! Each step finds the harmonic map of the current surface with the
//! boundary held fixed and moves the surface onto it. The solve is posed for
//! the displacement `u = x - X`: since the identity has `grad_Gamma X = T`,
//! the step reads `int grad u : grad v = -int div_Gamma v` with `u = 0` on
//! the boundary. Geometry nodes without a displacement DOF (midsides under
//! linear displacements) move with the average of their edge vertices.

use nalgebra::Vector3;

use crate::assembly::{Discretization, DofMap};
use crate::calculus::FrameCache;
use crate::error::{Error, Result};
use crate::linear::{SparseMatrix, SymmetricSolver};
use crate::mesh::{ReferenceElement, SurfaceMesh};

/// History of a form-finding run.
#[derive(Debug, Clone, PartialEq)]
pub struct FormFindState {
    pub mesh: SurfaceMesh,
    pub iterations: usize,
    /// Area before the first step and after each step.
    pub areas: Vec<f64>,
    /// Largest nodal movement of each step.
    pub movements: Vec<f64>,
    /// Largest movement along the node normals of each step.
    pub normal_movements: Vec<f64>,
    pub converged: bool,
    /// Set when the smallest element quality collapsed.
    pub pinching: bool,
}

impl FormFindState {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,area_m2,max_movement_m,max_normal_movement_m\n");
        for (i, a) in self.areas.iter().enumerate() {
            let (m, n) = if i == 0 { (0.0, 0.0) } else { (self.movements[i - 1], self.normal_movements[i - 1]) };
            s.push_str(&format!("{i},{a:.15e},{m:.6e},{n:.6e}\n"));
        }
        s
    }
}

/// Which part of the nodal movement is tested against the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopCriterion {
    /// Full movement vector.
    #[default]
    Total,
    /// Component along the node normal. Area is stationary under tangential
    /// sliding, which the iteration removes only slowly, so this stops once
    /// the shape has settled.
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormFindOptions {
    /// Absolute movement tolerance; `None` means `1e-10` times the bounding
    /// box diagonal of the initial mesh.
    pub movement_tol: Option<f64>,
    pub criterion: StopCriterion,
    pub max_outer: usize,
    /// 1 for linear displacements, 2 for isoparametric quadratics.
    pub displacement_degree: usize,
}

impl Default for FormFindOptions {
    fn default() -> Self {
        Self {
            movement_tol: None,
            criterion: StopCriterion::Total,
            max_outer: 500,
            displacement_degree: 1,
        }
    }
}

/// Sum of the area weights over all elements.
pub fn discrete_area(mesh: &SurfaceMesh) -> Result<f64> {
    Ok(FrameCache::new(mesh, &ReferenceElement::linear())?.area())
}

/// Scalar stiffness `int grad phi_i . grad phi_j` over the slots of `disc`.
pub fn laplace_beltrami_stiffness(disc: &Discretization) -> SparseMatrix {
    let ne = disc.mesh().num_elements();
    let pattern = SparseMatrix::from_elements(
        disc.dofs().num_slots(),
        (0..ne).map(|e| disc.element_slots(e)),
        1,
    );
    scalar_stiffness(pattern, disc.frames(), |e| disc.element_slots(e))
}

fn scalar_stiffness<'a>(
    mut k: SparseMatrix,
    frames: &FrameCache,
    slots_of: impl Fn(usize) -> &'a [usize],
) -> SparseMatrix {
    for e in 0..frames.num_elements() {
        let slots = slots_of(e);
        let nd = slots.len();
        let mut local = vec![0.0; nd * nd];
        for f in frames.element(e) {
            for i in 0..nd {
                for j in 0..nd {
                    local[i * nd + j] += f.weight * f.gradients[i].dot(&f.gradients[j]);
                }
            }
        }
        for i in 0..nd {
            for j in 0..nd {
                k.add_block(slots[i], slots[j], &[local[i * nd + j]]);
            }
        }
    }
    k
}

/// `-int div_Gamma (phi_i e_a)`, one right-hand side per component `a`.
fn divergence_load<'a>(ns: usize, frames: &FrameCache, slots_of: impl Fn(usize) -> &'a [usize]) -> [Vec<f64>; 3] {
    let mut out = [vec![0.0; ns], vec![0.0; ns], vec![0.0; ns]];
    for e in 0..frames.num_elements() {
        for f in frames.element(e) {
            for (i, &s) in slots_of(e).iter().enumerate() {
                for (a, rhs) in out.iter_mut().enumerate() {
                    rhs[s] -= f.weight * f.gradients[i][a];
                }
            }
        }
    }
    out
}

/// Topology-dependent data shared by all steps on one connectivity.
struct Stepper {
    reference: ReferenceElement,
    dofs: DofMap,
    element_slots: Vec<usize>,
    fixed: Vec<bool>,
    pattern: SparseMatrix,
    linear: SymmetricSolver,
}

impl Stepper {
    fn new(mesh: &SurfaceMesh, degree: usize) -> Result<Self> {
        if !mesh.has_boundary() {
            return Err(Error::IllPosed(
                "closed surface: form finding needs a fixed boundary".into(),
            ));
        }
        let reference = ReferenceElement::new(degree)?;
        let nd = reference.num_nodes();
        let dofs = DofMap::new(mesh, nd);
        let element_slots: Vec<usize> = mesh
            .elements()
            .flat_map(|el| el[..nd].iter().map(|&n| dofs.slot(n).expect("slot")).collect::<Vec<_>>())
            .collect();
        let pattern = SparseMatrix::from_elements(dofs.num_slots(), element_slots.chunks(nd), 1);
        let fixed = (0..dofs.num_slots()).map(|s| mesh.is_boundary(dofs.node(s))).collect();
        Ok(Self {
            reference,
            dofs,
            element_slots,
            fixed,
            pattern,
            linear: SymmetricSolver::new(),
        })
    }

    /// Returns the moved mesh, the largest total and normal movements and
    /// the area of `mesh`.
    fn step(&mut self, mesh: &SurfaceMesh) -> Result<(SurfaceMesh, [f64; 2], f64)> {
        let frames = FrameCache::new(mesh, &self.reference)?;
        let nd = self.reference.num_nodes();
        let slots_of = |e: usize| &self.element_slots[nd * e..nd * (e + 1)];
        let mut k = scalar_stiffness(self.pattern.clone(), &frames, slots_of);
        k.eliminate(&self.fixed);
        let mut rhs = divergence_load(self.dofs.num_slots(), &frames, slots_of);
        for r in rhs.iter_mut() {
            r.iter_mut().zip(&self.fixed).filter(|(_, &f)| f).for_each(|(v, _)| *v = 0.0);
        }
        let sol = self.linear.solve_many(&k, &rhs).map_err(|e| match e {
            Error::Singular { dof } => Error::DegenerateMesh { dof },
            other => other,
        })?;
        let u: Vec<Vector3<f64>> = (0..self.dofs.num_slots())
            .map(|s| Vector3::new(sol[0][s], sol[1][s], sol[2][s]))
            .collect();
        let field = self.dofs.nodal_field(mesh, &u);
        let normals = node_normals(mesh);
        let mut movement = [0.0_f64; 2];
        let nodes: Vec<Vector3<f64>> = mesh
            .nodes()
            .iter()
            .zip(&field)
            .enumerate()
            .map(|(n, (x, d))| {
                if mesh.is_boundary(n) {
                    *x
                } else {
                    movement[0] = movement[0].max(d.norm());
                    movement[1] = movement[1].max(d.dot(&normals[n]).abs());
                    x + d
                }
            })
            .collect();
        Ok((mesh.with_nodes(nodes)?, movement, frames.area()))
    }
}

/// One fixed-point step. Returns the moved mesh and the largest nodal
/// movement. Boundary nodes are copied unchanged.
pub fn laplace_beltrami_step(mesh: &SurfaceMesh, displacement_degree: usize) -> Result<(SurfaceMesh, f64)> {
    let (next, [movement, _], _) = Stepper::new(mesh, displacement_degree)?.step(mesh)?;
    Ok((next, movement))
}

/// Area-weighted unit normals of the vertex triangles around each node.
pub fn node_normals(mesh: &SurfaceMesh) -> Vec<Vector3<f64>> {
    let mut out = vec![Vector3::zeros(); mesh.num_nodes()];
    for el in mesh.elements() {
        let [a, b, c] = [el[0], el[1], el[2]].map(|i| mesh.nodes()[i]);
        let n = (b - a).cross(&(c - a));
        for &i in el {
            out[i] += n;
        }
    }
    out.iter_mut().for_each(|n| *n = n.try_normalize(0.0).unwrap_or_else(Vector3::zeros));
    out
}

/// Smallest shape quality `4 sqrt(3) A / sum l^2` over the vertex triangles
/// (1 for equilateral).
pub fn min_element_quality(mesh: &SurfaceMesh) -> f64 {
    mesh.elements()
        .map(|el| {
            let [a, b, c] = [el[0], el[1], el[2]].map(|i| mesh.nodes()[i]);
            let area = 0.5 * (b - a).cross(&(c - a)).norm();
            let l2 = (b - a).norm_squared() + (c - b).norm_squared() + (a - c).norm_squared();
            4.0 * 3f64.sqrt() * area / l2
        })
        .fold(f64::INFINITY, f64::min)
}

/// Iterates [`laplace_beltrami_step`] until the largest nodal movement
/// (total or normal, see [`StopCriterion`]) is below tolerance. `observer`
/// sees every iterate (iteration, mesh).
pub fn form_find_with(
    mesh: &SurfaceMesh,
    options: &FormFindOptions,
    mut observer: impl FnMut(usize, &SurfaceMesh) -> Result<()>,
) -> Result<(SurfaceMesh, FormFindState)> {
    if options.max_outer == 0 {
        return Err(Error::Parameter("max_outer must be at least 1".into()));
    }
    let tol = options
        .movement_tol
        .unwrap_or(1e-10 * mesh.bounding_diagonal());
    let q0 = min_element_quality(mesh);
    let mut stepper = Stepper::new(mesh, options.displacement_degree)?;
    let mut state = FormFindState {
        mesh: mesh.clone(),
        iterations: 0,
        areas: Vec::new(),
        movements: Vec::new(),
        normal_movements: Vec::new(),
        converged: false,
        pinching: false,
    };
    observer(0, mesh)?;
    while state.iterations < options.max_outer {
        let (next, [movement, normal], area) = stepper.step(&state.mesh)?;
        state.iterations += 1;
        state.movements.push(movement);
        state.normal_movements.push(normal);
        state.areas.push(area);
        state.pinching = min_element_quality(&next) < 1e-3 * q0;
        state.mesh = next;
        observer(state.iterations, &state.mesh)?;
        let measured = match options.criterion {
            StopCriterion::Total => movement,
            StopCriterion::Normal => normal,
        };
        if measured <= tol {
            state.converged = true;
            break;
        }
        if state.pinching {
            break;
        }
    }
    state.areas.push(discrete_area(&state.mesh)?);
    if state.converged {
        return Ok((state.mesh.clone(), state));
    }
    Err(Error::FormFinding {
        iterations: state.iterations,
        movement: state.movements.last().copied().unwrap_or(f64::NAN),
        pinching: state.pinching,
        state: Box::new(state),
    })
}

pub fn form_find(mesh: &SurfaceMesh, options: &FormFindOptions) -> Result<(SurfaceMesh, FormFindState)> {
    form_find_with(mesh, options, |_, _| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_cylinder, generate_disk, generate_spheroid};

    #[test]
    fn unit_triangle_area() {
        let nodes = vec![Vector3::zeros(), Vector3::x(), Vector3::y()];
        let mesh = SurfaceMesh::new(nodes, vec![0, 1, 2], 1).unwrap();
        assert!((discrete_area(&mesh).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn flat_disk_is_fixed_point() {
        for order in [1, 2] {
            let mesh = generate_disk(1.0, 2, order).unwrap();
            let (_, movement) = laplace_beltrami_step(&mesh, order).unwrap();
            assert!(movement <= 1e-12, "order {order}: {movement}");
        }
    }

    #[test]
    fn closed_surface_is_ill_posed() {
        let mesh = generate_spheroid(1.0, 0.5, 1, 1).unwrap();
        assert!(matches!(laplace_beltrami_step(&mesh, 1), Err(Error::IllPosed(_))));
    }

    #[test]
    fn one_step_reduces_cylinder_area() {
        let mesh = generate_cylinder(0.5, 0.6, 4, 16, 2).unwrap();
        let before = discrete_area(&mesh).unwrap();
        let (next, _) = laplace_beltrami_step(&mesh, 1).unwrap();
        assert!(discrete_area(&next).unwrap() < before);
        for n in 0..mesh.num_nodes() {
            if mesh.is_boundary(n) {
                assert_eq!(mesh.nodes()[n], next.nodes()[n]);
            }
        }
    }
}
