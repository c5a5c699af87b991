//! Bregman divergences on `R^n` and projections onto convex sets.
//!
//! `D(x, y) = Phi(x) - Phi(y) - <x - y, grad Phi(y)>`.
//!
//! The left projection of `y` onto `C` minimizes `D(., y)` over `C`, the
//! right projection minimizes `D(y, .)`. A set written in the
//! [`Frame::Dual`] frame constrains `eta = grad Phi(x)`; since
//! `D_Phi(y, x) = D_{Phi*}(grad Phi(x), grad Phi(y))`, a right projection
//! onto such a set is a left projection of the conjugate, and vice versa.

mod constraint;
mod solver;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{check_dim, Error, Result};
use crate::extended::ExtendedReal;
use crate::numeric::dot;
use crate::potentials::{grad_conjugate, grad_potential, Conjugate, Potential, PotentialSpec};

pub use constraint::{ConstraintKind, ConstraintSet, Frame, Halfspace};
use solver::Objective;
pub use solver::{Side, TraceEntry};

/// `D_Phi(x, y)`; `+inf` when `y` is not interior or `x` is off the domain.
pub fn bregman_div(spec: &PotentialSpec, x: &[f64], y: &[f64]) -> Result<ExtendedReal> {
    check_dim(spec.dim(), x.len())?;
    check_dim(spec.dim(), y.len())?;
    Ok(spec.divergence(x, y))
}

/// Residual of the three-point identity
/// `D(x, z) = D(x, y) + D(y, z) + <x - y, grad Phi(y) - grad Phi(z)>`.
pub fn three_point_residual(spec: &PotentialSpec, x: &[f64], y: &[f64], z: &[f64]) -> Result<f64> {
    let dxz = bregman_div(spec, x, z)?.raw();
    let dxy = bregman_div(spec, x, y)?.raw();
    let dyz = bregman_div(spec, y, z)?.raw();
    let gz = grad_potential(spec, z)?;
    let gy = grad_potential(spec, y)?;
    let cross: f64 = x.iter().zip(y).zip(gz.iter().zip(&gy)).map(|((a, b), (c, d))| (a - b) * (d - c)).sum();
    Ok((dxz - dxy - dyz - cross).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub point: Vec<f64>,
    /// Divergence between the projection and the projected point, in the
    /// order given by `side`.
    pub value: f64,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub side: Side,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEntry>>,
}

#[derive(Debug, Clone, Default)]
pub struct ProjectionOptions {
    pub tolerances: Tolerances,
    /// Starting point of the solver (in the frame of the constraint set);
    /// defaults to the projected point itself.
    pub initial: Option<Vec<f64>>,
    pub trace: bool,
}

pub fn left_project(spec: &PotentialSpec, c: &ConstraintSet, y: &[f64]) -> Result<ProjectionResult> {
    project(spec, c, y, Side::Left, &ProjectionOptions::default())
}

pub fn right_project(spec: &PotentialSpec, c: &ConstraintSet, y: &[f64]) -> Result<ProjectionResult> {
    project(spec, c, y, Side::Right, &ProjectionOptions::default())
}

/// Left or right projection of `y` onto `c` under `D_Phi`.
pub fn project(
    spec: &PotentialSpec,
    c: &ConstraintSet,
    y: &[f64],
    side: Side,
    opts: &ProjectionOptions,
) -> Result<ProjectionResult> {
    check_dim(spec.dim(), y.len())?;
    check_dim(spec.dim(), c.dim())?;
    if !spec.in_interior(y) {
        return Err(Error::domain("projected point must lie in the interior of the domain"));
    }
    match c.frame() {
        Frame::Primal => {
            let sol = run(spec, c, y, side, opts)?;
            finish(spec, y, side, sol.0, sol.1, sol.2, sol.3)
        }
        Frame::Dual => {
            let conj = Conjugate(spec);
            let eta = grad_potential(spec, y)?;
            let flipped = match side {
                Side::Left => Side::Right,
                Side::Right => Side::Left,
            };
            let (point, iterations, residual, trace) = run(&conj, c, &eta, flipped, opts)?;
            let x = grad_conjugate(spec, &point)?;
            finish(spec, y, side, x, iterations, residual, trace)
        }
    }
}

type RunOutput = (Vec<f64>, usize, f64, Option<Vec<TraceEntry>>);

fn run<P: Potential + ?Sized>(
    pot: &P,
    c: &ConstraintSet,
    anchor: &[f64],
    side: Side,
    opts: &ProjectionOptions,
) -> Result<RunOutput> {
    let tol = &opts.tolerances;
    let poly = c.polyhedron();
    // a point already in the set is its own projection
    if poly.eq.nrows() == 0 && poly.violation(anchor) <= 0.0 && opts.initial.is_none() {
        return Ok((anchor.to_vec(), 0, 0.0, opts.trace.then(Vec::new)));
    }
    let probe = constraint::feasibility_probe(&poly, anchor, pot.interior_box(), tol.constraint_violation * 1e-2)?;
    let x0 = match &opts.initial {
        Some(x0) => {
            check_dim(anchor.len(), x0.len())?;
            x0.clone()
        }
        // barrier-like potentials stall when started far outside the
        // inequalities, so start from the probe point instead
        None if poly.ineq.nrows() > 0 && pot.in_interior(&probe) => probe.clone(),
        None => anchor.to_vec(),
    };
    let obj = Objective::new(pot, anchor, side)?;
    let sol = match solver::solve(&obj, &poly, &x0, tol.kkt, tol.max_iterations, opts.trace) {
        // the right objective is not convex in x; retry with a method that
        // descends on the objective itself
        Err(Error::Convergence { .. }) => {
            let start = deep_feasible_point(pot, &poly, anchor, tol).unwrap_or(probe);
            solver::solve_projected_newton(&obj, &poly, &start, tol.kkt, tol.max_iterations, opts.trace)?
        }
        other => other?,
    };
    let violation = poly.violation(&sol.x);
    if violation > tol.constraint_violation {
        return Err(Error::Convergence { iterations: sol.iterations, residual: violation, best: sol.x });
    }
    Ok((sol.x, sol.iterations, sol.residual, opts.trace.then_some(sol.trace)))
}

/// A point of `C` kept away from the boundary of the domain, found by
/// running the feasibility probe on successively less shrunken boxes.
fn deep_feasible_point<P: Potential + ?Sized>(
    pot: &P,
    poly: &constraint::Polyhedron,
    anchor: &[f64],
    tol: &Tolerances,
) -> Option<Vec<f64>> {
    let (lo, hi) = pot.interior_box()?;
    let width = if lo.is_finite() && hi.is_finite() {
        hi - lo
    } else {
        1.0 + anchor.iter().map(|v| v.abs()).sum::<f64>() / anchor.len() as f64
    };
    for k in [0.25, 0.1, 0.03, 1e-2, 1e-3, 1e-4] {
        let l = if lo.is_finite() { lo + k * width } else { lo };
        let h = if hi.is_finite() { hi - k * width } else { hi };
        if l >= h {
            continue;
        }
        if let Ok(x) = constraint::feasibility_probe(poly, anchor, Some((l, h)), tol.constraint_violation * 1e-2) {
            if pot.in_interior(&x) {
                return Some(x);
            }
        }
    }
    None
}

fn finish(
    spec: &PotentialSpec,
    y: &[f64],
    side: Side,
    point: Vec<f64>,
    iterations: usize,
    kkt_residual: f64,
    trace: Option<Vec<TraceEntry>>,
) -> Result<ProjectionResult> {
    let value = match side {
        Side::Left => spec.divergence(&point, y),
        Side::Right => spec.divergence(y, &point),
    }
    .raw();
    Ok(ProjectionResult { point, value, iterations, kkt_residual, side, trace })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PythagorasReport {
    /// Left: `D(x, P) + D(P, y)`; right: `D(y, P) + D(P, x)`.
    pub lhs: f64,
    /// Left: `D(x, y)`; right: `D(y, x)`.
    pub rhs: f64,
    /// `rhs - lhs`: nonnegative for convex sets, zero for affine ones.
    pub slack: f64,
    pub projection: Vec<f64>,
    pub side: Side,
    /// Whether the set is affine in the coordinates where the projection is
    /// a convex problem, so that equality is expected.
    pub equality_expected: bool,
}

/// Compares both sides of the Pythagorean inequality for the projection of
/// `y` onto `c` and a point `x` of `c`.
pub fn pythagoras_check(
    spec: &PotentialSpec,
    c: &ConstraintSet,
    x: &[f64],
    y: &[f64],
    side: Side,
) -> Result<PythagorasReport> {
    pythagoras_check_with(spec, c, x, y, side, &ProjectionOptions::default())
}

pub fn pythagoras_check_with(
    spec: &PotentialSpec,
    c: &ConstraintSet,
    x: &[f64],
    y: &[f64],
    side: Side,
    opts: &ProjectionOptions,
) -> Result<PythagorasReport> {
    check_dim(spec.dim(), x.len())?;
    let in_frame = match c.frame() {
        Frame::Primal => x.to_vec(),
        Frame::Dual => grad_potential(spec, x)?,
    };
    if !c.contains(&in_frame, opts.tolerances.constraint_violation)? {
        return Err(Error::domain("comparison point must lie in the constraint set"));
    }
    let p = project(spec, c, y, side, opts)?.point;
    let d = |a: &[f64], b: &[f64]| spec.divergence(a, b).raw();
    let (lhs, rhs) = match side {
        Side::Left => (d(x, &p) + d(&p, y), d(x, y)),
        Side::Right => (d(y, &p) + d(&p, x), d(y, x)),
    };
    let natural = matches!((side, c.frame()), (Side::Left, Frame::Primal) | (Side::Right, Frame::Dual));
    Ok(PythagorasReport {
        lhs,
        rhs,
        slack: rhs - lhs,
        projection: p,
        side,
        equality_expected: natural && c.is_affine(),
    })
}

/// Directional derivative of `D(., y)` at `p` toward `x`, i.e.
/// `<x - p, grad Phi(p) - grad Phi(y)>`; nonnegative for every `x` in `C`
/// exactly when `p` is the left projection.
pub fn variational_gap(spec: &PotentialSpec, p: &[f64], y: &[f64], x: &[f64]) -> Result<f64> {
    let gp = DVector::from_vec(grad_potential(spec, p)?);
    let gy = DVector::from_vec(grad_potential(spec, y)?);
    let diff: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - b).collect();
    Ok(dot(&diff, (gp - gy).as_slice()))
}
