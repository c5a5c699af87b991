//! Radial potentials `Psi(x) = int_0^{|x|} phi(t) dt` for an increasing
//! profile `phi` and an `l_p` norm.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{integrate, solve_increasing, MonotoneCubic};

/// Norm of the carrier space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NormKind {
    Euclidean,
    /// `l_p` norm with `p` in `(1, inf)`.
    PNorm(f64),
}

impl NormKind {
    pub fn exponent(&self) -> f64 {
        match *self {
            NormKind::Euclidean => 2.0,
            NormKind::PNorm(p) => p,
        }
    }

    /// Hoelder-dual norm.
    pub fn dual(&self) -> NormKind {
        match *self {
            NormKind::Euclidean => NormKind::Euclidean,
            NormKind::PNorm(p) => NormKind::PNorm(p / (p - 1.0)),
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let p = self.exponent();
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::param(format!("p-norm exponent must lie in (1, inf), got {p}")));
        }
        Ok(())
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        match *self {
            NormKind::Euclidean => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            NormKind::PNorm(p) => {
                let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if m == 0.0 {
                    return 0.0;
                }
                m * x.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
            }
        }
    }

    /// Gradient of the norm at `x != 0`.
    pub fn norm_gradient(&self, x: &[f64], r: f64) -> DVector<f64> {
        let p = self.exponent();
        DVector::from_iterator(x.len(), x.iter().map(|&v| v.signum() * (v.abs() / r).powf(p - 1.0)))
    }

    /// Hessian of the norm at `x != 0`; `None` where it does not exist
    /// (a zero coordinate with `p < 2`).
    fn norm_hessian(&self, x: &[f64], r: f64, g: &DVector<f64>) -> Option<DMatrix<f64>> {
        let n = x.len();
        let p = self.exponent();
        let mut h = -(g * g.transpose()) * ((p - 1.0) / r);
        for i in 0..n {
            let d = if p == 2.0 {
                1.0 / r
            } else {
                if x[i] == 0.0 && p < 2.0 {
                    return None;
                }
                (p - 1.0) * (x[i].abs() / r).powf(p - 2.0) / r
            };
            h[(i, i)] += d;
        }
        Some(h)
    }
}

/// The increasing profile `phi` with `phi(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum PhiProfile {
    /// Dense sample table, interpolated by a monotone cubic and continued
    /// linearly past the last sample.
    Table(PhiTable),
    /// `phi(t) = coef * t^exponent` with `coef > 0`, `exponent > 0`.
    Power { coef: f64, exponent: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiTable {
    interp: MonotoneCubic,
    // integral of phi from 0 to each knot
    cumulative: Vec<f64>,
}

impl PhiTable {
    /// Validates `phi(0) = 0`, strict monotonicity and unbounded growth of
    /// the sampled profile.
    pub fn new(samples: &[[f64; 2]], quad_tol: f64) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Validation("phi table needs at least two samples".into()));
        }
        if samples[0] != [0.0, 0.0] {
            return Err(Error::Validation("phi table must start at (0, 0)".into()));
        }
        if samples.windows(2).any(|w| !(w[1][0] > w[0][0]) || !(w[1][1] > w[0][1])) {
            return Err(Error::Validation("phi table must be strictly increasing in t and phi(t)".into()));
        }
        if samples.iter().any(|s| !s[0].is_finite() || !s[1].is_finite()) {
            return Err(Error::Validation("phi table entries must be finite".into()));
        }
        let knots: Vec<f64> = samples.iter().map(|s| s[0]).collect();
        let values: Vec<f64> = samples.iter().map(|s| s[1]).collect();
        let interp = MonotoneCubic::new(knots, values)?;
        let mut cumulative = vec![0.0; samples.len()];
        let per_segment = quad_tol / samples.len() as f64;
        for i in 1..samples.len() {
            let (a, b) = (samples[i - 1][0], samples[i][0]);
            cumulative[i] = cumulative[i - 1] + integrate(&|t| interp.eval(t), a, b, per_segment);
        }
        Ok(PhiTable { interp, cumulative })
    }

    pub fn samples(&self) -> Vec<[f64; 2]> {
        self.interp.knots().iter().zip(self.interp.values()).map(|(&t, &v)| [t, v]).collect()
    }
}

impl PhiProfile {
    pub fn phi(&self, t: f64) -> f64 {
        match self {
            PhiProfile::Table(tab) => tab.interp.eval(t),
            PhiProfile::Power { coef, exponent } => coef * t.powf(*exponent),
        }
    }

    pub fn phi_prime(&self, t: f64) -> f64 {
        match self {
            PhiProfile::Table(tab) => tab.interp.derivative(t),
            PhiProfile::Power { coef, exponent } => coef * exponent * t.powf(exponent - 1.0),
        }
    }

    /// `int_0^r phi(t) dt`.
    pub fn integral(&self, r: f64, quad_tol: f64) -> f64 {
        match self {
            PhiProfile::Power { coef, exponent } => coef * r.powf(exponent + 1.0) / (exponent + 1.0),
            PhiProfile::Table(tab) => {
                let knots = tab.interp.knots();
                let k = knots.partition_point(|&t| t <= r).saturating_sub(1);
                let a = knots[k];
                tab.cumulative[k] + integrate(&|t| tab.interp.eval(t), a, r, quad_tol)
            }
        }
    }

    /// `phi^{-1}(s)` for `s >= 0`.
    pub fn phi_inverse(&self, s: f64, tol: f64) -> Result<f64> {
        if s <= 0.0 {
            return Ok(0.0);
        }
        match self {
            PhiProfile::Power { coef, exponent } => Ok((s / coef).powf(1.0 / exponent)),
            PhiProfile::Table(_) => solve_increasing(|t| (self.phi(t), self.phi_prime(t)), 0.0, f64::INFINITY, s, tol),
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if let PhiProfile::Power { coef, exponent } = *self {
            if !(coef > 0.0 && exponent > 0.0 && coef.is_finite() && exponent.is_finite()) {
                return Err(Error::param("power profile needs coef > 0 and exponent > 0"));
            }
        }
        Ok(())
    }
}

/// `Psi(x) = int_0^{|x|} phi(t) dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormIntegral {
    pub profile: PhiProfile,
    pub norm: NormKind,
}

impl NormIntegral {
    pub fn value(&self, x: &[f64], quad_tol: f64) -> f64 {
        self.profile.integral(self.norm.norm(x), quad_tol)
    }

    pub fn gradient(&self, x: &[f64]) -> DVector<f64> {
        let r = self.norm.norm(x);
        if r == 0.0 {
            return DVector::zeros(x.len());
        }
        self.norm.norm_gradient(x, r) * self.profile.phi(r)
    }

    pub fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let n = x.len();
        let r = self.norm.norm(x);
        if r == 0.0 {
            if self.norm.exponent() == 2.0 {
                let d = self.profile.phi_prime(0.0);
                if d.is_finite() {
                    return Ok(DMatrix::identity(n, n) * d);
                }
            }
            return Err(Error::domain("hessian of the norm integral is undefined at 0"));
        }
        let g = self.norm.norm_gradient(x, r);
        let hr = self
            .norm
            .norm_hessian(x, r, &g)
            .ok_or_else(|| Error::domain("hessian of the p-norm undefined on a coordinate plane"))?;
        Ok(&g * g.transpose() * self.profile.phi_prime(r) + hr * self.profile.phi(r))
    }

    /// Conjugate by radial reduction: `Psi*(y) = sup_r (r |y|_* - F(r))`.
    pub fn conjugate(&self, y: &[f64], tol: f64, quad_tol: f64) -> f64 {
        let s = self.norm.dual().norm(y);
        match self.profile.phi_inverse(s, tol) {
            Ok(r) => r * s - self.profile.integral(r, quad_tol),
            Err(_) => f64::INFINITY,
        }
    }

    /// `grad Psi*(y) = phi^{-1}(|y|_*) grad |y|_*`.
    pub fn conjugate_gradient(&self, y: &[f64], tol: f64) -> Result<DVector<f64>> {
        let dual = self.norm.dual();
        let s = dual.norm(y);
        if s == 0.0 {
            return Ok(DVector::zeros(y.len()));
        }
        let r = self.profile.phi_inverse(s, tol)?;
        Ok(dual.norm_gradient(y, s) * r)
    }
}
