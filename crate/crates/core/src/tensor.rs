//! Fourth-order tensors stored as 9x9 matrices.
//!
//! A second-order tensor `A` is flattened row-major, `A_ij -> a[3 i + j]`,
//! so `L_iKmN = dP_iK / dF_mN` is the matrix entry `(3 i + K, 3 m + N)` and
//! major symmetry is ordinary matrix symmetry.

use nalgebra::{Matrix3, SMatrix, SVector};

pub type Tensor4 = SMatrix<f64, 9, 9>;
pub type Vector9 = SVector<f64, 9>;

#[inline]
pub fn flat(i: usize, j: usize) -> usize {
    3 * i + j
}

pub fn flatten(a: &Matrix3<f64>) -> Vector9 {
    Vector9::from_fn(|r, _| a[(r / 3, r % 3)])
}

pub fn unflatten(v: &Vector9) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| v[flat(i, j)])
}

/// `L : A`
pub fn contract(l: &Tensor4, a: &Matrix3<f64>) -> Matrix3<f64> {
    unflatten(&(l * flatten(a)))
}

/// Largest entry of `L - L^T` relative to the largest entry of `L`.
pub fn major_asymmetry(l: &Tensor4) -> f64 {
    let scale = l.amax();
    if scale == 0.0 {
        return 0.0;
    }
    (l - l.transpose()).amax() / scale
}
