//! Small numerical kernels: safeguarded root finding, adaptive Simpson
//! quadrature, monotone cubic interpolation and finite differences.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Solves `g(t) = target` for a strictly increasing `g` on the open interval
/// `(lo, hi)` (either end may be infinite).
///
/// `g` returns the value and derivative. Newton steps are taken when they
/// stay inside the current bracket and bisection otherwise.
pub fn solve_increasing<G>(g: G, lo: f64, hi: f64, target: f64, tol: f64) -> Result<f64>
where
    G: Fn(f64) -> (f64, f64),
{
    let start = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (false, false) => 0.0,
    };
    let (g0, _) = g(start);
    if g0 == target {
        return Ok(start);
    }

    // Bracket [a, b] with g(a) < target < g(b).
    let (mut a, mut b);
    if g0 < target {
        a = start;
        let mut t = start;
        let mut step = 1.0;
        let mut found = false;
        for _ in 0..2200 {
            t = if hi.is_finite() { t + 0.5 * (hi - t) } else { t + step };
            step *= 2.0;
            if !(t < hi) || !t.is_finite() {
                break;
            }
            let (gt, _) = g(t);
            if gt >= target {
                found = true;
                break;
            }
            a = t;
        }
        if !found {
            return Err(Error::Numeric(format!("target {target} lies above the range of the function")));
        }
        b = t;
    } else {
        b = start;
        let mut t = start;
        let mut step = 1.0;
        let mut found = false;
        for _ in 0..2200 {
            t = if lo.is_finite() { t - 0.5 * (t - lo) } else { t - step };
            step *= 2.0;
            if !(t > lo) || !t.is_finite() {
                break;
            }
            let (gt, _) = g(t);
            if gt <= target {
                found = true;
                break;
            }
            b = t;
        }
        if !found {
            return Err(Error::Numeric(format!("target {target} lies below the range of the function")));
        }
        a = t;
    }

    let mut t = 0.5 * (a + b);
    for _ in 0..400 {
        let (gt, dg) = g(t);
        let r = gt - target;
        if r == 0.0 {
            return Ok(t);
        }
        if r < 0.0 {
            a = t;
        } else {
            b = t;
        }
        let newton = t - r / dg;
        let next = if dg > 0.0 && newton.is_finite() && newton > a && newton < b { newton } else { 0.5 * (a + b) };
        let delta = (next - t).abs();
        t = next;
        if delta <= tol * (1.0 + t.abs()) || (b - a) <= tol * (1.0 + t.abs()) {
            // one more Newton polish keeps the result at full precision
            let (gt, dg) = g(t);
            let polished = t - (gt - target) / dg;
            if dg > 0.0 && polished.is_finite() && polished >= a && polished <= b {
                return Ok(polished);
            }
            return Ok(t);
        }
    }
    Ok(t)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch–Carlson
/// derivatives with the Fritsch–Butland weighted harmonic mean).
///
/// Beyond the last knot the interpolant continues linearly with the last
/// secant slope.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = knots.len();
        if n < 2 || values.len() != n {
            return Err(Error::Validation("interpolation table needs at least two (t, value) pairs".into()));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Validation("table abscissae must be strictly increasing".into()));
        }
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (values[i + 1] - values[i]) / h[i]).collect();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes[0] = delta[0];
            slopes[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                let (d0, d1) = (delta[i - 1], delta[i]);
                if d0 * d1 <= 0.0 {
                    slopes[i] = 0.0;
                } else {
                    let (h0, h1) = (h[i - 1], h[i]);
                    let w1 = 2.0 * h1 + h0;
                    let w2 = h1 + 2.0 * h0;
                    slopes[i] = (w1 + w2) / (w1 / d0 + w2 / d1);
                }
            }
            slopes[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            slopes[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(MonotoneCubic { knots, values, slopes })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn segment(&self, t: f64) -> usize {
        match self.knots.partition_point(|&k| k <= t) {
            0 => 0,
            i => (i - 1).min(self.knots.len() - 2),
        }
    }

    fn tail_slope(&self) -> f64 {
        let n = self.knots.len();
        (self.values[n - 1] - self.values[n - 2]) / (self.knots[n - 1] - self.knots[n - 2])
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if t > self.knots[n - 1] {
            return self.values[n - 1] + self.tail_slope() * (t - self.knots[n - 1]);
        }
        let i = self.segment(t);
        let h = self.knots[i + 1] - self.knots[i];
        let s = (t - self.knots[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.values[i] + h10 * h * self.slopes[i] + h01 * self.values[i + 1] + h11 * h * self.slopes[i + 1]
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let n = self.knots.len();
        if t > self.knots[n - 1] {
            return self.tail_slope();
        }
        let i = self.segment(t);
        let h = self.knots[i + 1] - self.knots[i];
        let s = (t - self.knots[i]) / h;
        let s2 = s * s;
        let d00 = 6.0 * s2 - 6.0 * s;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = -6.0 * s2 + 6.0 * s;
        let d11 = 3.0 * s2 - 2.0 * s;
        (d00 * self.values[i] + d01 * self.values[i + 1]) / h + d10 * self.slopes[i] + d11 * self.slopes[i + 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

/// Central-difference Jacobian of a vector field.
pub fn fd_jacobian<F>(f: F, x: &[f64], step: f64) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> DVector<f64>,
{
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for k in 0..n {
        let h = step * (1.0 + x[k].abs());
        xp[k] = x[k] + h;
        let fp = f(&xp);
        xp[k] = x[k] - h;
        let fm = f(&xp);
        xp[k] = x[k];
        let col = (fp - fm) / (2.0 * h);
        jac.set_column(k, &col);
    }
    jac
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}
