//! Numerical verification and stress-testing of weighted Hardy,
//! Hardy–Sobolev and Caffarelli–Kohn–Nirenberg inequalities associated with
//! Grushin-type operators `G_μ = Δ_x + |x|^{2μ} Δ_y`.
//!
//! The crate provides:
//! - the ambient geometry (gauge, anisotropic dilations, Grushin gradient
//!   and a finite-difference Grushin laplacian) in [`geometry`];
//! - admissibility predicates, dimensional balance, exponent formulas and
//!   explicit constants in [`params`];
//! - two independent quadrature routes plus a seeded Monte-Carlo oracle for
//!   weighted bi-radial integrands in [`quadrature`];
//! - the trial-function families (cutoffs, log profiles, near-extremal
//!   Hardy powers, dilation/translation transforms) in [`fields`];
//! - inequality evaluation, necessity experiments (dilation scaling,
//!   translation growth, log-family growth), sharp-constant search and
//!   pointwise lemma probes in [`engine`].

pub mod engine;
pub mod error;
pub mod fields;
mod fit;
pub mod geometry;
pub mod params;
pub mod quadrature;

pub use error::{Error, Result};
pub use geometry::{GrushinSpace, Point};
