//! Hele-Shaw-Cahn-Hilliard flow with a logarithmic (Flory-Huggins) free
//! energy and concentration-dependent viscosity, on a rectangle with
//! homogeneous Neumann / impermeability boundary conditions.
//!
//! The crate is layered bottom-up:
//!
//! - [`grid`] and [`spectral`]: cell-centered fields and the cosine-spectral
//!   operators (the Neumann Laplacian, its inverse on mean-zero data, gradient,
//!   divergence, curl and the norms used throughout).
//! - [`potential`]: the logarithmic potential, its convex/concave
//!   decomposition, the regularized family and the minimizers `±β`.
//! - [`elliptic`]: preconditioned CG for `-div(K∇u) = f` and damped Newton for
//!   `-Δu + F'(u) = f`.
//! - [`darcy`]: pressure and velocity from `ν(φ)u + ∇p = μ∇φ`, plus the
//!   Korteweg and vorticity identities.
//! - [`stepper`]: the convex-splitting time integrator, initial-data
//!   preparation and scenario generators.
//! - [`diagnostics`]: energies, balances, higher-order energy, dependence and
//!   decay experiments, and Gronwall-type bound evaluators.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod darcy;
pub mod diagnostics;
pub mod elliptic;
mod error;
pub mod grid;
pub mod potential;
pub mod spectral;
pub mod stepper;

pub use error::{Error, Result};
pub use grid::{Field, Grid};
pub use spectral::Spectral;
