//! Cayley-Klein Riccati (CKR) planar systems arising from quantum
//! Hamilton-Jacobi equations, together with the Lie-Hamilton structures they
//! carry.
//!
//! The crate covers three model families: a particle of constant mass in a
//! one-dimensional potential, a particle with position-dependent effective
//! mass (von Roos ordering), and the non-Hermitian Swanson model with
//! generalized ladder operators. Each is reduced to a coefficient triple
//! `(a1(x), a2(x), a3(x))` driving the planar system
//!
//! ```text
//! p1' = a2 p1 + 2 a3 p1 p2
//! p2' = a1 + a2 p2 + a3 (p2^2 - p1^2)
//! ```
//!
//! On top of the flow itself, the crate implements and numerically verifies
//! the sl(2,R) vector-field realization, its symplectic and Poisson
//! structures, Lie symmetry operators of the autonomized field, and conserved
//! Lie integrals with their consistency constraints.
//!
//! Module map:
//! - [`expr`]: closed-form expressions in one variable with exact derivatives
//! - [`grid`]: uniform sample grids
//! - [`ode`]: RK4/RK45 integration, linear systems, cumulative quadrature
//! - [`model`]: coefficient builders for the three cases
//! - [`geometry`]: sl(2,R) fields, symplectic form, Poisson brackets
//! - [`symmetry`]: Lie symmetry coefficients and commutator residuals
//! - [`conserved`]: Lie integrals, conservation drift, constraint solvers
//! - [`oracle`]: Schrodinger-side reference and Riccati/linear cross-checks
//! - [`cli`]: configuration loading and the `ckr-lie` command set

pub mod cli;
pub mod conserved;
pub mod expr;
pub mod geometry;
pub mod grid;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod symmetry;
#[doc(hidden)]
pub mod testutil;

pub use expr::Expr;
pub use grid::Grid;
