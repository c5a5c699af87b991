//! Numerical evidence for the Euler–Legendre property.
//!
//! Two checks are combined. The gradient must be inverted by the conjugate
//! gradient on sampled interior points (and vice versa), and the one-sided
//! derivative of the potential along a segment leaving a boundary point of
//! the domain must diverge to `-inf`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{grad_conjugate, grad_potential, Potential, PotentialSpec};
use crate::config::{Tolerances, BOUNDARY_SCHEDULE};
use crate::error::{Error, Result};
use crate::numeric::max_abs_diff;
use crate::sampling;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendreReport {
    pub family: String,
    pub dim: usize,
    pub samples: usize,
    /// `max |grad Phi*(grad Phi(x)) - x|` over sampled interior points.
    pub round_trip_residual: f64,
    /// `max |grad Phi(grad Phi*(y)) - y|` over sampled conjugate-interior points.
    pub inverse_round_trip_residual: f64,
    /// Whether the domain has a boundary at all.
    pub boundary_tested: bool,
    pub lower_boundary_probes: usize,
    pub upper_boundary_probes: usize,
    pub boundary_failures: usize,
    /// Least negative slope observed at the closest approach; absent when the
    /// domain has no boundary.
    pub worst_final_slope: Option<f64>,
    /// Smallest observed midpoint gap `(Phi(x) + Phi(y))/2 - Phi((x + y)/2)`.
    pub min_midpoint_gap: f64,
    pub passed: bool,
}

/// Whether the slopes recorded at `BOUNDARY_SCHEDULE` distances diverge to
/// `-inf`.
///
/// The sequence must decrease strictly, and either reach `threshold` or keep
/// losing at least half as much per decade at the end as at the start. The
/// second clause covers logarithmic blow-up, which is far too slow to reach
/// a large threshold at representable distances, while still rejecting
/// slopes that converge to a finite limit (their per-decade losses shrink
/// geometrically).
pub fn boundary_slopes_diverge(slopes: &[f64], threshold: f64) -> bool {
    if slopes.len() < 3 || slopes.iter().any(|s| s.is_nan()) {
        return false;
    }
    if !slopes.windows(2).all(|w| w[1] < w[0]) {
        return false;
    }
    let n = slopes.len();
    if slopes[n - 1] <= threshold {
        return true;
    }
    let first = slopes[0] - slopes[1];
    let last = slopes[n - 2] - slopes[n - 1];
    last >= 0.5 * first
}

/// Sample-based Euler–Legendre check with default tolerances.
pub fn check_euler_legendre(spec: &PotentialSpec, n_samples: usize, seed: u64) -> Result<LegendreReport> {
    check_euler_legendre_with(spec, n_samples, seed, &Tolerances::default())
}

pub fn check_euler_legendre_with(
    spec: &PotentialSpec,
    n_samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<LegendreReport> {
    if n_samples == 0 {
        return Err(Error::param("n_samples must be at least 1"));
    }
    let mut rng = sampling::rng(seed);
    let n = spec.dim();

    let mut round_trip: f64 = 0.0;
    let mut inverse_round_trip: f64 = 0.0;
    let mut min_gap = f64::INFINITY;
    for _ in 0..n_samples {
        let x = sampling::interior_point(spec, &mut rng);
        let back = grad_conjugate(spec, &grad_potential(spec, &x)?)?;
        round_trip = round_trip.max(max_abs_diff(&back, &x));

        let y = sampling::conjugate_interior_point(spec, &mut rng);
        let fwd = grad_potential(spec, &grad_conjugate(spec, &y)?)?;
        inverse_round_trip = inverse_round_trip.max(max_abs_diff(&fwd, &y));

        let z = sampling::interior_point(spec, &mut rng);
        let mid: Vec<f64> = x.iter().zip(&z).map(|(a, b)| 0.5 * (a + b)).collect();
        let gap = 0.5 * (spec.value(&x).raw() + spec.value(&z).raw()) - spec.value(&mid).raw();
        min_gap = min_gap.min(gap);
    }

    let (lo, hi) = spec.interior_box().unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let boundary_tested = lo.is_finite() || hi.is_finite();
    let mut lower = 0;
    let mut upper = 0;
    let mut failures = 0;
    let mut worst = f64::NEG_INFINITY;
    if boundary_tested {
        for s in 0..n_samples {
            let x = sampling::interior_point(spec, &mut rng);
            let use_upper = if lo.is_finite() && hi.is_finite() { s % 2 == 1 } else { !lo.is_finite() };
            let edge = if use_upper { hi } else { lo };
            let mut b = x.clone();
            let first = rng.random_range(0..n);
            b[first] = edge;
            for (k, bk) in b.iter_mut().enumerate() {
                if k != first && rng.random_bool(0.3) {
                    *bk = edge;
                }
            }
            if use_upper {
                upper += 1;
            } else {
                lower += 1;
            }
            let dir: Vec<f64> = x.iter().zip(&b).map(|(a, c)| a - c).collect();
            let len = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
            let slopes: Vec<f64> = BOUNDARY_SCHEDULE
                .iter()
                .map(|&t| {
                    let p: Vec<f64> = b.iter().zip(&dir).map(|(c, d)| c + t * d).collect();
                    match spec.gradient(&p) {
                        Ok(g) => g.iter().zip(&dir).map(|(gi, d)| gi * d).sum::<f64>() / len,
                        Err(_) => f64::NAN,
                    }
                })
                .collect();
            worst = worst.max(*slopes.last().expect("nonempty schedule"));
            if !boundary_slopes_diverge(&slopes, tol.boundary_slope) {
                failures += 1;
            }
        }
    }

    let passed = round_trip <= tol.legendre_round_trip
        && inverse_round_trip <= tol.legendre_round_trip
        && min_gap > 0.0
        && failures == 0;
    Ok(LegendreReport {
        family: spec.family().name().to_string(),
        dim: n,
        samples: n_samples,
        round_trip_residual: round_trip,
        inverse_round_trip_residual: inverse_round_trip,
        boundary_tested,
        lower_boundary_probes: lower,
        upper_boundary_probes: upper,
        boundary_failures: failures,
        worst_final_slope: boundary_tested.then_some(worst),
        min_midpoint_gap: min_gap,
        passed,
    })
}
