//! Sparse symmetric matrices and their direct factorization.
//!
//! Matrices store the full (both triangles) pattern in compressed rows.
//! Factorization is a supernodal LDL^T with a fill-reducing ordering; the
//! symbolic analysis is cached and reused while the pattern is unchanged.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::ldlt::factor::{LdltError, LdltRegularization};
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, SymbolicCholesky, SymbolicCholeskyRaw, SymmetricOrdering,
};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, MatMut, Par, Side};

use crate::error::{Error, Result};

/// Square sparse matrix in compressed-row form with a block pattern: node
/// `a` couples to node `b` through a dense `block x block` submatrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    block: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    /// Sorted neighbour lists per node (including the node itself).
    neighbours: Vec<Vec<usize>>,
}

impl SparseMatrix {
    /// Pattern from node adjacency; `adjacency[a]` need not be sorted and
    /// may omit `a` itself.
    pub fn from_adjacency(adjacency: &[Vec<usize>], block: usize) -> Self {
        let neighbours: Vec<Vec<usize>> = adjacency
            .iter()
            .enumerate()
            .map(|(a, adj)| {
                let mut v = adj.clone();
                v.push(a);
                v.sort_unstable();
                v.dedup();
                v
            })
            .collect();
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        for nb in &neighbours {
            for _ in 0..block {
                for &b in nb {
                    col_idx.extend((0..block).map(|d| block * b + d));
                }
                row_ptr.push(col_idx.len());
            }
        }
        let nnz = col_idx.len();
        Self {
            block,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
            neighbours,
        }
    }

    /// Pattern of an element mesh: nodes sharing an element are coupled.
    pub fn from_elements<'a>(
        num_nodes: usize,
        elements: impl IntoIterator<Item = &'a [usize]>,
        block: usize,
    ) -> Self {
        let mut adjacency = vec![Vec::new(); num_nodes];
        for el in elements {
            for &a in el {
                adjacency[a].extend_from_slice(el);
            }
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
            adj.dedup();
        }
        Self::from_adjacency(&adjacency, block)
    }

    pub fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn block_size(&self) -> usize {
        self.block
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    fn position(&self, row: usize, col: usize) -> Option<usize> {
        let (s, e) = (self.row_ptr[row], self.row_ptr[row + 1]);
        self.col_idx[s..e].binary_search(&col).ok().map(|k| s + k)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.position(row, col).map_or(0.0, |k| self.values[k])
    }

    /// Adds a dense `block x block` submatrix (row-major) coupling nodes `a`
    /// and `b`. Panics if the pair is outside the pattern.
    pub fn add_block(&mut self, a: usize, b: usize, values: &[f64]) {
        let bs = self.block;
        let k = self.neighbours[a]
            .binary_search(&b)
            .unwrap_or_else(|_| panic!("nodes {a} and {b} are not coupled"));
        for c in 0..bs {
            let start = self.row_ptr[bs * a + c] + bs * k;
            for d in 0..bs {
                self.values[start + d] += values[c * bs + d];
            }
        }
    }

    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (s, e) = (self.row_ptr[row], self.row_ptr[row + 1]);
        self.col_idx[s..e]
            .iter()
            .copied()
            .zip(self.values[s..e].iter().copied())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    /// Largest `|A_ij - A_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for r in 0..self.dim() {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst / scale
    }

    /// Symmetric elimination of constrained rows/columns: they are zeroed
    /// and the diagonal set to one.
    pub fn eliminate(&mut self, constrained: &[bool]) {
        for r in 0..self.dim() {
            let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
            for k in s..e {
                let c = self.col_idx[k];
                if constrained[r] || constrained[c] {
                    self.values[k] = if r == c { 1.0 } else { 0.0 };
                }
            }
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for r in 0..n {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    fn as_faer(&self) -> SparseColMatRef<'_, usize, f64> {
        // symmetric: the row-compressed pattern read as columns is A^T = A
        let n = self.dim();
        let symbolic = SymbolicSparseColMatRef::new_checked(n, n, &self.row_ptr, None, &self.col_idx);
        SparseColMatRef::new(symbolic, &self.values)
    }
}

/// Direct solver for symmetric (possibly indefinite) systems.
#[derive(Default)]
pub struct SymmetricSolver {
    symbolic: Option<(Vec<usize>, SymbolicCholesky<usize>)>,
}

impl std::fmt::Debug for SymmetricSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymmetricSolver")
            .field("analysed", &self.symbolic.is_some())
            .finish()
    }
}

impl SymmetricSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Solves `A X = B` for the columns of `rhs` (each of length `dim`).
    pub fn solve_many(&mut self, a: &SparseMatrix, rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let n = a.dim();
        if rhs.iter().any(|b| b.len() != n) {
            return Err(Error::LinearSolver("right-hand side length mismatch".into()));
        }
        let mat = a.as_faer();
        let reuse = matches!(&self.symbolic, Some((ptr, s)) if *ptr == a.row_ptr && s.nrows() == n);
        if !reuse {
            let symbolic = factorize_symbolic_cholesky(
                mat.symbolic(),
                Side::Lower,
                SymmetricOrdering::Amd,
                CholeskySymbolicParams::default(),
            )
            .map_err(|e| Error::LinearSolver(format!("symbolic analysis failed: {e:?}")))?;
            self.symbolic = Some((a.row_ptr.clone(), symbolic));
        }
        let symbolic = &self.symbolic.as_ref().expect("analysed").1;
        let par = Par::rayon(0);
        let k = rhs.len().max(1);
        let mut mem = MemBuffer::new(
            symbolic
                .factorize_numeric_ldlt_scratch::<f64>(par, Default::default())
                .or(symbolic.solve_in_place_scratch::<f64>(k, par)),
        );
        let mut l_values = vec![0.0; symbolic.len_val()];
        let ldlt = symbolic
            .factorize_numeric_ldlt(
                &mut l_values,
                mat,
                Side::Lower,
                LdltRegularization::default(),
                par,
                MemStack::new(&mut mem),
                Default::default(),
            )
            .map_err(|LdltError::ZeroPivot { index }| {
                // the simplicial path reports one-based pivots
                let index = match symbolic.raw() {
                    SymbolicCholeskyRaw::Simplicial(_) => index.saturating_sub(1),
                    SymbolicCholeskyRaw::Supernodal(_) => index,
                };
                let dof = symbolic
                    .perm()
                    .map_or(index, |p| p.arrays().0[index]);
                Error::Singular { dof }
            })?;

        let mut out = Vec::with_capacity(rhs.len());
        for b in rhs {
            let mut x = b.clone();
            ldlt.solve_in_place_with_conj(
                Conj::No,
                MatMut::from_column_major_slice_mut(&mut x, n, 1),
                par,
                MemStack::new(&mut mem),
            );
            // one step of iterative refinement
            let ax = a.mul_vec(&x);
            let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            ldlt.solve_in_place_with_conj(
                Conj::No,
                MatMut::from_column_major_slice_mut(&mut r, n, 1),
                par,
                MemStack::new(&mut mem),
            );
            x.iter_mut().zip(&r).for_each(|(xi, ri)| *xi += ri);
            if let Some(dof) = x.iter().position(|v| !v.is_finite()) {
                return Err(Error::Singular { dof });
            }
            let ax = a.mul_vec(&x);
            let res: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| (bi - ai).abs()).collect();
            let bnorm = norm(b);
            if bnorm > 0.0 && norm(&res) > 1e-6 * bnorm {
                let worst = (0..n).max_by(|&i, &j| res[i].total_cmp(&res[j])).unwrap_or(0);
                return Err(Error::Singular { dof: worst });
            }
            out.push(x);
        }
        Ok(out)
    }

    pub fn solve(&mut self, a: &SparseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.solve_many(a, &[rhs.to_vec()])?.remove(0))
    }
}

/// One-shot solve of a symmetric sparse system.
pub fn linear_solve(a: &SparseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    SymmetricSolver::new().solve(a, rhs)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
