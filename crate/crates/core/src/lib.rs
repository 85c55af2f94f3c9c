//! Finite element analysis of hyperelastic membrane shells posed directly on
//! triangulated surfaces, plus minimal-surface form finding.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assembly;
pub mod calculus;
pub mod config;
pub mod error;
pub mod form_finding;
pub mod linear;
pub mod material;
pub mod mesh;
pub mod oracles;
pub mod plane_stress;
pub mod scenarios;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
