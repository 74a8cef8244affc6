//! Stabilizing cone-preserving solutions of the nonsymmetric algebraic Riccati equation
//!
//! ```text
//! X B X + D X + X A + C = 0
//! ```
//!
//! For a proper cone `K` and `L = [[A, B], [C, D]]` cross-positive on `K × K`, `L` is
//! stable exactly when the equation has a solution `X ⪰_K 0` with `A + B X` and
//! `D + X B` stable and cross-positive. [`riccati::solve`] computes that solution by a
//! monotone fixed-point iteration and returns a [`riccati::Certificate`] covering both
//! directions of the equivalence.
//!
//! Modules:
//! - [`cones`]: orthant and simplicial cones, duals, orders, cross-positivity.
//! - [`spectral`]: eigenvalues, matrix exponential, stability equivalences, witnesses.
//! - [`sylvester`]: `D X + X A + C = 0` (Schur, Kronecker and quadrature).
//! - [`monotone`]: monotone bounded sequence certificates.
//! - [`riccati`]: the solver and the verification of its certificates.
//! - [`instances`]: seeded instance generation and the scalar oracle.

pub mod cones;
pub mod error;
pub mod instances;
pub mod linalg;
pub mod monotone;
pub mod riccati;
pub mod spectral;
pub mod sylvester;

pub use cones::{ConeOrder, ConeSpec, ProductCone, Relation};
pub use error::{Error, Result};
pub use riccati::{solve, BlockSystem, Certificate, SolveError, SolveOptions};
