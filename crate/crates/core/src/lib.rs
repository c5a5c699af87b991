//! Generalized Bregman divergences.
//!
//! The crate is organised bottom-up:
//!
//! - [`potentials`]: Euler–Legendre potentials on `R^n`, their gradients,
//!   Hessians and Fenchel conjugates.
//! - [`bregman`]: the divergence `D_Phi`, left and right projections onto
//!   convex sets and the Pythagorean checks.
//! - [`spectral`]: Hermitian matrices, spectral potentials and the matrix
//!   divergence families.
//! - [`embeddings`]: divergences pulled back through nonlinear embeddings
//!   (power maps, Orlicz maps, spin factors).
//! - [`geometry`]: the metric and dual connections induced by a divergence.

pub mod bregman;
pub mod config;
pub mod embeddings;
pub mod error;
pub mod extended;
pub mod geometry;
pub mod numeric;
pub mod potentials;
pub mod sampling;
pub mod spectral;
pub mod verify;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use extended::ExtendedReal;
pub use potentials::{Family, NormKind, Potential, PotentialSpec};
