//! Element and global assembly of internal forces, tangent stiffness and
//! external loads.
//!
//! Displacements live on "slots": the mesh nodes that carry displacement
//! degrees of freedom. For linear displacements on quadratic geometry only
//! the vertex nodes are slots; otherwise every node is. Each slot has three
//! Cartesian DOFs, `3 * slot + component`.

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;

use crate::calculus::{surface_gradient, ElementFrame, FrameCache};
use crate::error::{Error, Result};
use crate::linear::SparseMatrix;
use crate::material::Material;
use crate::mesh::{ReferenceElement, SurfaceMesh, EDGE_VERTICES};
use crate::plane_stress::{solve_director, PlaneStressOptions, PlaneStressState};

const CHUNK: usize = 2048;

/// Node <-> slot numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    slot_of_node: Vec<Option<usize>>,
    node_of_slot: Vec<usize>,
}

impl DofMap {
    /// Slots are the first `per_element` nodes of every element.
    pub fn new(mesh: &SurfaceMesh, per_element: usize) -> Self {
        let mut slot_of_node = vec![None; mesh.num_nodes()];
        let mut node_of_slot = Vec::new();
        for el in mesh.elements() {
            for &n in &el[..per_element] {
                if slot_of_node[n].is_none() {
                    slot_of_node[n] = Some(node_of_slot.len());
                    node_of_slot.push(n);
                }
            }
        }
        // keep slots in node order so renumbering the mesh renumbers the DOFs
        let mut order: Vec<usize> = node_of_slot.clone();
        order.sort_unstable();
        for (s, &n) in order.iter().enumerate() {
            slot_of_node[n] = Some(s);
        }
        Self {
            slot_of_node,
            node_of_slot: order,
        }
    }

    pub fn num_slots(&self) -> usize {
        self.node_of_slot.len()
    }

    pub fn num_dofs(&self) -> usize {
        3 * self.num_slots()
    }

    pub fn slot(&self, node: usize) -> Option<usize> {
        self.slot_of_node[node]
    }

    pub fn node(&self, slot: usize) -> usize {
        self.node_of_slot[slot]
    }

    /// Interpolates per-slot vectors to every mesh node. Geometry nodes that
    /// carry no slot (midsides under linear displacements) take the average
    /// of their edge vertices.
    pub fn nodal_field(&self, mesh: &SurfaceMesh, slots: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
        let mut out = vec![Vector3::zeros(); mesh.num_nodes()];
        for (s, v) in slots.iter().enumerate() {
            out[self.node(s)] = *v;
        }
        if mesh.geometry_order() == 2 && self.node_of_slot.len() < mesh.num_nodes() {
            for el in mesh.elements() {
                for (k, [a, b]) in EDGE_VERTICES.iter().enumerate() {
                    out[el[3 + k]] = 0.5 * (out[el[*a]] + out[el[*b]]);
                }
            }
        }
        out
    }

    /// Transpose of [`DofMap::nodal_field`]: lumps per-node forces onto the
    /// slots, splitting a slotless midside's force between its edge vertices.
    pub fn gather(&self, mesh: &SurfaceMesh, nodal: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
        let mut out: Vec<Vector3<f64>> = self.node_of_slot.iter().map(|&n| nodal[n]).collect();
        if mesh.geometry_order() == 2 && self.node_of_slot.len() < mesh.num_nodes() {
            let mut done = vec![false; mesh.num_nodes()];
            for el in mesh.elements() {
                for (k, [a, b]) in EDGE_VERTICES.iter().enumerate() {
                    let m = el[3 + k];
                    if self.slot(m).is_some() || std::mem::replace(&mut done[m], true) {
                        continue;
                    }
                    for v in [el[*a], el[*b]] {
                        out[self.slot(v).expect("vertex slot")] += 0.5 * nodal[m];
                    }
                }
            }
        }
        out
    }
}

/// A mesh together with its displacement space and cached frames.
#[derive(Debug, Clone)]
pub struct Discretization {
    mesh: SurfaceMesh,
    reference: ReferenceElement,
    frames: FrameCache,
    dofs: DofMap,
    pattern: SparseMatrix,
    element_slots: Vec<usize>,
}

impl Discretization {
    /// `displacement_degree` may be 1, or 2 on quadratic geometry.
    pub fn new(mesh: SurfaceMesh, displacement_degree: usize) -> Result<Self> {
        let reference = ReferenceElement::new(displacement_degree)?;
        let frames = FrameCache::new(&mesh, &reference)?;
        let nd = reference.num_nodes();
        let dofs = DofMap::new(&mesh, nd);
        let element_slots: Vec<usize> = mesh
            .elements()
            .flat_map(|el| el[..nd].iter().map(|&n| dofs.slot(n).expect("slot")).collect::<Vec<_>>())
            .collect();
        let pattern =
            SparseMatrix::from_elements(dofs.num_slots(), element_slots.chunks(nd), 3);
        Ok(Self {
            mesh,
            reference,
            frames,
            dofs,
            pattern,
            element_slots,
        })
    }

    pub fn mesh(&self) -> &SurfaceMesh {
        &self.mesh
    }

    pub fn reference(&self) -> &ReferenceElement {
        &self.reference
    }

    pub fn frames(&self) -> &FrameCache {
        &self.frames
    }

    pub fn dofs(&self) -> &DofMap {
        &self.dofs
    }

    pub fn num_dofs(&self) -> usize {
        self.dofs.num_dofs()
    }

    pub fn nodes_per_element(&self) -> usize {
        self.reference.num_nodes()
    }

    pub fn quadrature_points(&self) -> usize {
        self.frames.element(0).len()
    }

    /// Slots of element `e`, in shape-function order.
    pub fn element_slots(&self, e: usize) -> &[usize] {
        let nd = self.nodes_per_element();
        &self.element_slots[nd * e..nd * (e + 1)]
    }

    /// Zeroed matrix with the global sparsity pattern.
    pub fn empty_matrix(&self) -> SparseMatrix {
        self.pattern.clone()
    }

    /// Per-slot vectors from a flat DOF vector.
    pub fn slot_vectors(&self, u: &[f64]) -> Vec<Vector3<f64>> {
        u.chunks_exact(3).map(|c| Vector3::new(c[0], c[1], c[2])).collect()
    }

    /// Interpolates a flat DOF vector to every mesh node, see
    /// [`DofMap::nodal_field`].
    pub fn nodal_field(&self, u: &[f64]) -> Vec<Vector3<f64>> {
        self.dofs.nodal_field(&self.mesh, &self.slot_vectors(u))
    }

    /// Reference positions of the slots as a flat vector.
    pub fn slot_positions(&self) -> Vec<f64> {
        (0..self.dofs.num_slots())
            .flat_map(|s| {
                let x = self.mesh.nodes()[self.dofs.node(s)];
                [x.x, x.y, x.z]
            })
            .collect()
    }

    fn element_displacements(&self, e: usize, u: &[f64]) -> Vec<Vector3<f64>> {
        self.element_slots(e)
            .iter()
            .map(|&s| Vector3::new(u[3 * s], u[3 * s + 1], u[3 * s + 2]))
            .collect()
    }
}

/// Material and kinematic options shared by all quadrature points.
#[derive(Debug, Clone, Copy)]
pub struct ElementContext<'a> {
    pub material: &'a dyn Material,
    pub thickness: f64,
    pub plane_stress: PlaneStressOptions,
}

impl<'a> ElementContext<'a> {
    pub fn new(material: &'a dyn Material) -> Self {
        Self {
            material,
            thickness: material.params().thickness,
            plane_stress: PlaneStressOptions::default(),
        }
    }
}

/// Element force, stiffness and energy. The stiffness is row-major with
/// index `(3 j + a, 3 k + b)` for shape functions `j, k` and components `a, b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementResult {
    pub force: Vec<f64>,
    pub stiffness: Vec<f64>,
    pub energy: f64,
    /// `p cof(F) N phi_j` integrated, per unit pressure.
    pub pressure_force: Vec<f64>,
    pub max_local_iterations: usize,
}

/// Surface deformation gradient `I + Grad_Gamma u` at a quadrature point.
pub fn surface_deformation(frame: &ElementFrame, nodal_u: &[Vector3<f64>]) -> Matrix3<f64> {
    Matrix3::identity() + surface_gradient(frame, nodal_u)
}

/// Converged plane-stress states at every quadrature point of an element,
/// updating the warm-start directors in place.
pub fn element_states(
    frames: &[ElementFrame],
    nodal_u: &[Vector3<f64>],
    ctx: &ElementContext<'_>,
    directors: &mut [Vector3<f64>],
) -> Result<Vec<PlaneStressState>> {
    frames
        .iter()
        .zip(directors.iter_mut())
        .enumerate()
        .map(|(q, (frame, d))| {
            let fs = surface_deformation(frame, nodal_u);
            let state = solve_director(&fs, &frame.normal, ctx.material, Some(*d), &ctx.plane_stress)
                .map_err(|e| e.at_point(0, q))?;
            *d = state.director;
            Ok(state)
        })
        .collect()
}

/// Internal force and consistent stiffness of one element.
pub fn element_internal(
    frames: &[ElementFrame],
    nodal_u: &[Vector3<f64>],
    ctx: &ElementContext<'_>,
    directors: &mut [Vector3<f64>],
) -> Result<ElementResult> {
    let states = element_states(frames, nodal_u, ctx, directors)?;
    let nd = nodal_u.len();
    let n = 3 * nd;
    let t = ctx.thickness;
    let mut force = vec![0.0; n];
    let mut stiffness = vec![0.0; n * n];
    let mut pressure_force = vec![0.0; n];
    let mut energy = 0.0;
    let mut max_local_iterations = 0;
    for (frame, state) in frames.iter().zip(&states) {
        let tw = t * frame.weight;
        energy += tw * ctx.material.energy(&state.deformation)?;
        max_local_iterations = max_local_iterations.max(state.iterations);
        let f = &state.deformation;
        let cof_n = f.determinant() * f.try_inverse().ok_or(Error::InvertedElement { det: 0.0 })?.transpose() * frame.normal;
        for j in 0..nd {
            let g = frame.gradients[j];
            let pg = state.stress * g;
            for a in 0..3 {
                force[3 * j + a] += tw * pg[a];
                pressure_force[3 * j + a] += frame.weight * frame.values[j] * cof_n[a];
            }
        }
        // L : (e_b (x) grad phi_k), one 9-vector per (k, b)
        let l = &state.tangent;
        let mut lg = vec![[0.0; 9]; n];
        for k in 0..nd {
            let g = frame.gradients[k];
            for b in 0..3 {
                let col = &mut lg[3 * k + b];
                for (r, c) in col.iter_mut().enumerate() {
                    *c = l[(r, 3 * b)] * g[0] + l[(r, 3 * b + 1)] * g[1] + l[(r, 3 * b + 2)] * g[2];
                }
            }
        }
        for j in 0..nd {
            let g = frame.gradients[j];
            for a in 0..3 {
                let row = &mut stiffness[(3 * j + a) * n..(3 * j + a + 1) * n];
                for (c, col) in row.iter_mut().zip(&lg) {
                    *c += tw * (g[0] * col[3 * a] + g[1] * col[3 * a + 1] + g[2] * col[3 * a + 2]);
                }
            }
        }
    }
    Ok(ElementResult {
        force,
        stiffness,
        energy,
        pressure_force,
        max_local_iterations,
    })
}

/// Dead normal load `int g(X) N phi_j` over the reference surface.
pub fn load_conservative(disc: &Discretization, g: impl Fn(&Vector3<f64>) -> f64 + Sync) -> Vec<f64> {
    let mut out = vec![0.0; disc.num_dofs()];
    for e in 0..disc.mesh.num_elements() {
        let slots = disc.element_slots(e);
        for frame in disc.frames.element(e) {
            let w = g(&frame.position) * frame.weight;
            for (j, &s) in slots.iter().enumerate() {
                for a in 0..3 {
                    out[3 * s + a] += w * frame.values[j] * frame.normal[a];
                }
            }
        }
    }
    out
}

/// Follower pressure `int p cof(F) N phi_j` at the displacement `u`.
pub fn load_pressure(
    disc: &Discretization,
    ctx: &ElementContext<'_>,
    u: &[f64],
    directors: &mut [Vector3<f64>],
    pressure: f64,
) -> Result<Vec<f64>> {
    let nq = disc.quadrature_points();
    let mut out = vec![0.0; disc.num_dofs()];
    for e in 0..disc.mesh.num_elements() {
        let nodal = disc.element_displacements(e, u);
        let states = element_states(disc.frames.element(e), &nodal, ctx, &mut directors[e * nq..(e + 1) * nq])
            .map_err(|err| retag(err, e))?;
        for (frame, state) in disc.frames.element(e).iter().zip(&states) {
            let f = state.deformation;
            let cof = f.determinant() * f.try_inverse().ok_or(Error::InvertedElement { det: 0.0 })?.transpose();
            let v = pressure * frame.weight * (cof * frame.normal);
            for (j, &s) in disc.element_slots(e).iter().enumerate() {
                for a in 0..3 {
                    out[3 * s + a] += frame.values[j] * v[a];
                }
            }
        }
    }
    Ok(out)
}

fn retag(err: Error, element: usize) -> Error {
    match err {
        Error::AtPoint { point, source, .. } => Error::AtPoint {
            element,
            point,
            source,
        },
        other => other.at_point(element, 0),
    }
}

/// External loading applied during assembly.
#[derive(Debug, Clone, Default)]
pub struct Loads {
    /// Displacement-independent nodal forces.
    pub dead: Option<Vec<f64>>,
    /// Follower pressure magnitude.
    pub pressure: f64,
}

/// Assembled residual and tangent.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    /// Internal minus external forces; zero on constrained DOFs.
    pub residual: Vec<f64>,
    /// Tangent of the internal forces with symmetric Dirichlet elimination.
    pub tangent: SparseMatrix,
    pub dirichlet_mask: Vec<bool>,
    /// Stored strain energy.
    pub energy: f64,
    /// External forces (dead plus pressure), unconstrained.
    pub external: Vec<f64>,
    pub max_local_iterations: usize,
}

/// Assembles the global system at the displacement `u`. `directors` holds
/// one warm-start director per (element, quadrature point) and is updated.
pub fn assemble(
    disc: &Discretization,
    ctx: &ElementContext<'_>,
    u: &[f64],
    loads: &Loads,
    dirichlet: &[bool],
    directors: &mut [Vector3<f64>],
) -> Result<GlobalSystem> {
    let ndof = disc.num_dofs();
    let nq = disc.quadrature_points();
    let ne = disc.mesh.num_elements();
    if u.len() != ndof || dirichlet.len() != ndof || directors.len() != ne * nq {
        return Err(Error::Parameter("assembly input length mismatch".into()));
    }
    let mut tangent = disc.empty_matrix();
    let mut internal = vec![0.0; ndof];
    let mut external = loads.dead.clone().unwrap_or_else(|| vec![0.0; ndof]);
    let mut energy = 0.0;
    let mut max_local_iterations = 0;
    let nd = disc.nodes_per_element();
    let mut block = vec![0.0; 9];

    for (c, dir_chunk) in directors.chunks_mut(CHUNK * nq).enumerate() {
        let first = c * CHUNK;
        let results: Vec<ElementResult> = dir_chunk
            .par_chunks_mut(nq)
            .enumerate()
            .map(|(i, d)| {
                let e = first + i;
                let nodal = disc.element_displacements(e, u);
                element_internal(disc.frames.element(e), &nodal, ctx, d).map_err(|err| retag(err, e))
            })
            .collect::<Result<_>>()?;
        for (i, r) in results.iter().enumerate() {
            let slots = disc.element_slots(first + i);
            energy += r.energy;
            max_local_iterations = max_local_iterations.max(r.max_local_iterations);
            for (j, &sj) in slots.iter().enumerate() {
                for a in 0..3 {
                    internal[3 * sj + a] += r.force[3 * j + a];
                    external[3 * sj + a] += loads.pressure * r.pressure_force[3 * j + a];
                }
                for (k, &sk) in slots.iter().enumerate() {
                    for a in 0..3 {
                        for b in 0..3 {
                            block[3 * a + b] = r.stiffness[(3 * j + a) * 3 * nd + 3 * k + b];
                        }
                    }
                    tangent.add_block(sj, sk, &block);
                }
            }
        }
    }
    tangent.eliminate(dirichlet);
    let residual = internal
        .iter()
        .zip(&external)
        .zip(dirichlet)
        .map(|((i, x), &fixed)| if fixed { 0.0 } else { i - x })
        .collect();
    Ok(GlobalSystem {
        residual,
        tangent,
        dirichlet_mask: dirichlet.to_vec(),
        energy,
        external,
        max_local_iterations,
    })
}

/// Plane-stress diagnostics at every quadrature point: `|P N|` and
/// `|n . P|` with `n` the current unit normal `F^-T N / |F^-T N|`.
pub fn plane_stress_residuals(
    disc: &Discretization,
    ctx: &ElementContext<'_>,
    u: &[f64],
    directors: &mut [Vector3<f64>],
) -> Result<Vec<(f64, f64)>> {
    let nq = disc.quadrature_points();
    let mut out = Vec::with_capacity(directors.len());
    for e in 0..disc.mesh.num_elements() {
        let nodal = disc.element_displacements(e, u);
        let frames = disc.frames.element(e);
        let states = element_states(frames, &nodal, ctx, &mut directors[e * nq..(e + 1) * nq])
            .map_err(|err| retag(err, e))?;
        for (frame, s) in frames.iter().zip(&states) {
            let fit = s.deformation.try_inverse().ok_or(Error::InvertedElement { det: 0.0 })?.transpose();
            let n = (fit * frame.normal).normalize();
            out.push(((s.stress * frame.normal).norm(), (s.stress.transpose() * n).norm()));
        }
    }
    Ok(out)
}

/// `L2` norms of the normal and tangential parts of the displacement over the
/// reference surface.
pub fn displacement_norms(disc: &Discretization, u: &[f64]) -> (f64, f64) {
    let mut normal = 0.0;
    let mut tangential = 0.0;
    for e in 0..disc.mesh.num_elements() {
        let nodal = disc.element_displacements(e, u);
        for frame in disc.frames.element(e) {
            let uh: Vector3<f64> = nodal.iter().zip(&frame.values).map(|(v, &p)| p * v).sum();
            let un = uh.dot(&frame.normal);
            normal += frame.weight * un * un;
            tangential += frame.weight * (frame.projector * uh).norm_squared();
        }
    }
    (normal.sqrt(), tangential.sqrt())
}

/// Mask constraining all three DOFs of every slot on a boundary node.
pub fn clamp_boundary(disc: &Discretization) -> Vec<bool> {
    let mut mask = vec![false; disc.num_dofs()];
    for s in 0..disc.dofs.num_slots() {
        if disc.mesh.is_boundary(disc.dofs.node(s)) {
            mask[3 * s..3 * s + 3].iter_mut().for_each(|m| *m = true);
        }
    }
    mask
}

/// Removes the rigid-body modes of a closed surface symmetric about the
/// coordinate planes: `x, y` fixed at both poles (extreme `z`), and `y, z`
/// fixed at the slot nearest `(max x, 0, 0)`.
pub fn symmetry_constraints(disc: &Discretization) -> Result<Vec<bool>> {
    let ns = disc.dofs.num_slots();
    if ns == 0 {
        return Err(Error::Parameter("mesh has no degrees of freedom".into()));
    }
    let pos = |s: usize| disc.mesh.nodes()[disc.dofs.node(s)];
    let by = |key: &dyn Fn(&Vector3<f64>) -> f64| {
        (0..ns)
            .max_by(|&a, &b| key(&pos(a)).total_cmp(&key(&pos(b))))
            .expect("nonempty")
    };
    let top = by(&|x| x.z);
    let bottom = by(&|x| -x.z);
    let side = by(&|x| x.x - x.y.abs() - x.z.abs());
    let mut mask = vec![false; disc.num_dofs()];
    for (s, comps) in [(top, [0, 1]), (bottom, [0, 1]), (side, [1, 2])] {
        for c in comps {
            mask[3 * s + c] = true;
        }
    }
    Ok(mask)
}
