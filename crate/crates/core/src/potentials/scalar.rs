//! One-dimensional convex functions whose coordinate sums make up the
//! separable potential families, and the guarded Newton conjugate.

use crate::error::Result;
use crate::numeric::solve_increasing;

/// Common interface of a closed convex function of one real variable that is
/// smooth and strictly convex on an open interval.
pub(crate) trait ConvexScalar {
    /// Value, `+inf` outside the effective domain.
    fn value(&self, t: f64) -> f64;
    fn d1(&self, t: f64) -> f64;
    fn d2(&self, t: f64) -> f64;
    /// Interior of the effective domain as an open interval.
    fn interior(&self) -> (f64, f64);
    /// Open interval of values taken by the derivative on the interior.
    fn slope_range(&self) -> (f64, f64);
    /// `lim t s - f(t)` as `t` tends to the upper (or lower) end of the
    /// interior, with `s` the matching end of `slope_range`.
    fn edge_limit(&self, upper: bool) -> f64;

    fn in_interior(&self, t: f64) -> bool {
        let (lo, hi) = self.interior();
        t > lo && t < hi
    }
}

/// Guarded Newton maximization of `t s - f(t)`.
///
/// Stationarity `f'(t) = s` is solved by a bracketed Newton iteration on the
/// interior. Outside the slope range the supremum is either the edge limit
/// or `+inf`.
pub(crate) fn conjugate_by_newton<F: ConvexScalar + ?Sized>(f: &F, s: f64, tol: f64) -> f64 {
    let (slo, shi) = f.slope_range();
    if s > slo && s < shi {
        let (lo, hi) = f.interior();
        match solve_increasing(|t| (f.d1(t), f.d2(t)), lo, hi, s, tol) {
            Ok(t) => t * s - f.value(t),
            Err(_) => f64::INFINITY,
        }
    } else if s == shi {
        f.edge_limit(true)
    } else if s == slo {
        f.edge_limit(false)
    } else {
        f64::INFINITY
    }
}

/// Argmax of `t s - f(t)`, i.e. the inverse of `f'`, by the same root finder.
pub(crate) fn inverse_slope_by_newton<F: ConvexScalar + ?Sized>(f: &F, s: f64, tol: f64) -> Result<f64> {
    let (lo, hi) = f.interior();
    solve_increasing(|t| (f.d1(t), f.d2(t)), lo, hi, s, tol)
}

/// The convex conjugate of a [`ConvexScalar`], evaluated numerically.
///
/// Used to apply the conjugation twice for biconjugation checks.
pub(crate) struct NumericConjugate<'a, F: ?Sized> {
    pub inner: &'a F,
    pub tol: f64,
}

impl<F: ConvexScalar + ?Sized> ConvexScalar for NumericConjugate<'_, F> {
    fn value(&self, s: f64) -> f64 {
        conjugate_by_newton(self.inner, s, self.tol)
    }
    fn d1(&self, s: f64) -> f64 {
        inverse_slope_by_newton(self.inner, s, self.tol * 1e-2).unwrap_or(f64::NAN)
    }
    fn d2(&self, s: f64) -> f64 {
        1.0 / self.inner.d2(self.d1(s))
    }
    fn interior(&self) -> (f64, f64) {
        self.inner.slope_range()
    }
    fn slope_range(&self) -> (f64, f64) {
        self.inner.interior()
    }
    fn edge_limit(&self, upper: bool) -> f64 {
        // f** = f at the ends of the domain (f is closed)
        let (lo, hi) = self.inner.interior();
        let end = if upper { hi } else { lo };
        if end.is_finite() {
            self.inner.value(end)
        } else {
            f64::INFINITY
        }
    }
}

/// Separable potential families `Phi(x) = sum_i f(x_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarFamily {
    /// `t log t - t` on `[0, inf)`.
    NegEntropy,
    /// `-log t` on `(0, inf)`.
    Burg,
    /// `t log t + (1 - t) log(1 - t)` on `[0, 1]`.
    FermiDirac,
    /// `gamma |t|^(1/gamma)` on the real line, `gamma` in `(0, 1)`.
    GammaNorm { gamma: f64 },
    /// `(t^alpha - 1)/(alpha - 1)` on `[0, inf)` for `alpha` in `(0, 1)`,
    /// its negative on `(0, inf)` for `alpha < 0`.
    AlphaPower { alpha: f64 },
    /// `exp(t)` on the real line.
    ExpSum,
}

impl ScalarFamily {
    fn alpha_coef(alpha: f64) -> f64 {
        if alpha < 0.0 {
            1.0 / (1.0 - alpha)
        } else {
            1.0 / (alpha - 1.0)
        }
    }

    pub(crate) fn in_domain(&self, t: f64) -> bool {
        match *self {
            ScalarFamily::NegEntropy => t >= 0.0,
            ScalarFamily::Burg => t > 0.0,
            ScalarFamily::FermiDirac => (0.0..=1.0).contains(&t),
            ScalarFamily::GammaNorm { .. } | ScalarFamily::ExpSum => t.is_finite(),
            ScalarFamily::AlphaPower { alpha } => {
                if alpha < 0.0 {
                    t > 0.0
                } else {
                    t >= 0.0
                }
            }
        }
    }

    pub(crate) fn d3(&self, t: f64) -> f64 {
        match *self {
            ScalarFamily::NegEntropy => -1.0 / (t * t),
            ScalarFamily::Burg => -2.0 / (t * t * t),
            ScalarFamily::FermiDirac => -1.0 / (t * t) + 1.0 / ((1.0 - t) * (1.0 - t)),
            ScalarFamily::GammaNorm { gamma } => {
                let p = 1.0 / gamma;
                (p - 1.0) * (p - 2.0) * t.signum() * t.abs().powf(p - 3.0)
            }
            ScalarFamily::AlphaPower { alpha } => {
                let c = Self::alpha_coef(alpha);
                c * alpha * (alpha - 1.0) * (alpha - 2.0) * t.powf(alpha - 3.0)
            }
            ScalarFamily::ExpSum => t.exp(),
        }
    }

    /// Fenchel conjugate `f*(s)`: closed form for the entropy, Burg, power
    /// norm and exponential families; guarded Newton for the rest.
    pub(crate) fn conjugate(&self, s: f64, tol: f64) -> f64 {
        match *self {
            ScalarFamily::NegEntropy => s.exp(),
            ScalarFamily::Burg => {
                if s < 0.0 {
                    -1.0 - (-s).ln()
                } else {
                    f64::INFINITY
                }
            }
            ScalarFamily::GammaNorm { gamma } => (1.0 - gamma) * s.abs().powf(1.0 / (1.0 - gamma)),
            ScalarFamily::ExpSum => {
                if s > 0.0 {
                    s * s.ln() - s
                } else if s == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            ScalarFamily::FermiDirac | ScalarFamily::AlphaPower { .. } => conjugate_by_newton(self, s, tol),
        }
    }

    /// `(f')^{-1}(s)` in closed form; `NaN` outside the slope range.
    pub(crate) fn inverse_slope(&self, s: f64) -> f64 {
        let (slo, shi) = self.slope_range();
        if !(s > slo && s < shi) {
            return f64::NAN;
        }
        match *self {
            ScalarFamily::NegEntropy => s.exp(),
            ScalarFamily::Burg => -1.0 / s,
            ScalarFamily::FermiDirac => {
                if s >= 0.0 {
                    1.0 / (1.0 + (-s).exp())
                } else {
                    let e = s.exp();
                    e / (1.0 + e)
                }
            }
            ScalarFamily::GammaNorm { gamma } => {
                let p = 1.0 / gamma;
                s.signum() * s.abs().powf(1.0 / (p - 1.0))
            }
            ScalarFamily::AlphaPower { alpha } => {
                let c = Self::alpha_coef(alpha);
                (s / (c * alpha)).powf(1.0 / (alpha - 1.0))
            }
            ScalarFamily::ExpSum => s.ln(),
        }
    }

    /// `f(x) - f(y) - (x - y) f'(y)` written to avoid cancellation when
    /// `x` is close to `y`. Requires `y` interior; `+inf` when `x` is off
    /// the domain.
    pub(crate) fn divergence(&self, x: f64, y: f64) -> f64 {
        if !self.in_domain(x) {
            return f64::INFINITY;
        }
        match *self {
            ScalarFamily::NegEntropy => y * xlogx_residual((x - y) / y),
            ScalarFamily::Burg => {
                let r = (x - y) / y;
                r - r.ln_1p()
            }
            ScalarFamily::FermiDirac => {
                y * xlogx_residual((x - y) / y) + (1.0 - y) * xlogx_residual((y - x) / (1.0 - y))
            }
            ScalarFamily::GammaNorm { gamma } => {
                if y == 0.0 {
                    return gamma * x.abs().powf(1.0 / gamma);
                }
                let r = (x - y) / y;
                if r > -1.0 {
                    let p = 1.0 / gamma;
                    y.abs().powf(p) * (gamma * (p * r.ln_1p()).exp_m1() - r)
                } else {
                    self.value(x) - self.value(y) - (x - y) * self.d1(y)
                }
            }
            ScalarFamily::AlphaPower { alpha } => {
                let c = Self::alpha_coef(alpha);
                let r = (x - y) / y;
                c * y.powf(alpha) * ((alpha * r.ln_1p()).exp_m1() - alpha * r)
            }
            ScalarFamily::ExpSum => {
                let d = x - y;
                y.exp() * (d.exp_m1() - d)
            }
        }
    }
}

/// `(1 + r) log(1 + r) - r`, continuous at `r = -1`.
fn xlogx_residual(r: f64) -> f64 {
    if r == -1.0 {
        1.0
    } else {
        (1.0 + r) * r.ln_1p() - r
    }
}

impl ConvexScalar for ScalarFamily {
    fn value(&self, t: f64) -> f64 {
        if !self.in_domain(t) {
            return f64::INFINITY;
        }
        match *self {
            ScalarFamily::NegEntropy => {
                if t == 0.0 {
                    0.0
                } else {
                    t * t.ln() - t
                }
            }
            ScalarFamily::Burg => -t.ln(),
            ScalarFamily::FermiDirac => xlogx(t) + xlogx(1.0 - t),
            ScalarFamily::GammaNorm { gamma } => gamma * t.abs().powf(1.0 / gamma),
            ScalarFamily::AlphaPower { alpha } => Self::alpha_coef(alpha) * (t.powf(alpha) - 1.0),
            ScalarFamily::ExpSum => t.exp(),
        }
    }

    fn d1(&self, t: f64) -> f64 {
        match *self {
            ScalarFamily::NegEntropy => t.ln(),
            ScalarFamily::Burg => -1.0 / t,
            ScalarFamily::FermiDirac => t.ln() - (-t).ln_1p(),
            ScalarFamily::GammaNorm { gamma } => {
                let p = 1.0 / gamma;
                t.signum() * t.abs().powf(p - 1.0)
            }
            ScalarFamily::AlphaPower { alpha } => Self::alpha_coef(alpha) * alpha * t.powf(alpha - 1.0),
            ScalarFamily::ExpSum => t.exp(),
        }
    }

    fn d2(&self, t: f64) -> f64 {
        match *self {
            ScalarFamily::NegEntropy => 1.0 / t,
            ScalarFamily::Burg => 1.0 / (t * t),
            ScalarFamily::FermiDirac => 1.0 / (t * (1.0 - t)),
            ScalarFamily::GammaNorm { gamma } => {
                let p = 1.0 / gamma;
                (p - 1.0) * t.abs().powf(p - 2.0)
            }
            ScalarFamily::AlphaPower { alpha } => Self::alpha_coef(alpha) * alpha * (alpha - 1.0) * t.powf(alpha - 2.0),
            ScalarFamily::ExpSum => t.exp(),
        }
    }

    fn interior(&self) -> (f64, f64) {
        match *self {
            ScalarFamily::NegEntropy | ScalarFamily::Burg | ScalarFamily::AlphaPower { .. } => (0.0, f64::INFINITY),
            ScalarFamily::FermiDirac => (0.0, 1.0),
            ScalarFamily::GammaNorm { .. } | ScalarFamily::ExpSum => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    fn slope_range(&self) -> (f64, f64) {
        match *self {
            ScalarFamily::NegEntropy | ScalarFamily::FermiDirac | ScalarFamily::GammaNorm { .. } => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            ScalarFamily::Burg | ScalarFamily::AlphaPower { .. } => (f64::NEG_INFINITY, 0.0),
            ScalarFamily::ExpSum => (0.0, f64::INFINITY),
        }
    }

    fn edge_limit(&self, upper: bool) -> f64 {
        match (*self, upper) {
            // lim_{t -> inf} (1 - t^alpha)/(1 - alpha) for alpha < 0
            (ScalarFamily::AlphaPower { alpha }, true) if alpha < 0.0 => 1.0 / (1.0 - alpha),
            // lim_{t -> -inf} (-exp t)
            (ScalarFamily::ExpSum, false) => 0.0,
            _ => f64::INFINITY,
        }
    }
}

fn xlogx(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t.ln()
    }
}
