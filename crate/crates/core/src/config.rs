//! Numeric defaults shared by every solver and check.
//!
//! All tolerances, iteration caps and finite-difference steps live here so
//! that the CLI can print and override them in one place.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// KKT residual accepted by the projection solvers.
    pub kkt: f64,
    /// Maximum constraint violation of a projection result.
    pub constraint_violation: f64,
    /// Iteration cap of the projection solvers.
    pub max_iterations: usize,
    /// Tolerance of the one-dimensional conjugate maximization.
    pub conjugate: f64,
    /// Tolerance of monotone root finding (inverse gradients, Orlicz inverse).
    pub root: f64,
    /// Adaptive quadrature tolerance.
    pub quadrature: f64,
    /// Relative finite-difference step for geometry derivatives.
    pub fd_step: f64,
    /// Boundary-slope threshold of the Legendre check.
    pub boundary_slope: f64,
    /// Round-trip tolerance of the Legendre check.
    pub legendre_round_trip: f64,
    /// Eigenvalue threshold separating positivity classes.
    pub spectral: f64,
    /// Maximum Hermitian asymmetry accepted at matrix construction.
    pub hermitian: f64,
    /// Rank threshold of affine constraint matrices.
    pub rank: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        kkt: 1e-9,
        constraint_violation: 1e-8,
        max_iterations: 500,
        conjugate: 1e-10,
        root: 1e-12,
        quadrature: 1e-10,
        fd_step: 1e-4,
        boundary_slope: -1e6,
        legendre_round_trip: 1e-8,
        spectral: 1e-12,
        hermitian: 1e-12,
        rank: 1e-10,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::DEFAULT
    }
}

/// Approach schedule of the boundary-slope test: t = 1e-2, 1e-3, ..., 1e-8.
pub const BOUNDARY_SCHEDULE: [f64; 7] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];
