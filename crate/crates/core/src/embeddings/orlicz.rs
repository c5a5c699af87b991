//! Orlicz functions `phi(u) = sum_k c_k |u|^p_k` and the Luxemburg norm on
//! a finite weighted space.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::numeric::solve_increasing;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerTerm {
    pub coef: f64,
    pub exponent: f64,
}

/// An even Orlicz function with `phi(1) = 1`, built from positive power
/// terms with exponents above one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOrlicz", into = "RawOrlicz")]
pub struct OrliczFunction {
    terms: Vec<PowerTerm>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOrlicz {
    terms: Vec<PowerTerm>,
}

impl TryFrom<RawOrlicz> for OrliczFunction {
    type Error = Error;

    fn try_from(raw: RawOrlicz) -> Result<Self> {
        OrliczFunction::new(raw.terms)
    }
}

impl From<OrliczFunction> for RawOrlicz {
    fn from(f: OrliczFunction) -> Self {
        RawOrlicz { terms: f.terms }
    }
}

const INVERSE_TOL: f64 = 1e-12;

impl OrliczFunction {
    pub fn new(terms: Vec<PowerTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::param("Orlicz function needs at least one term"));
        }
        for t in &terms {
            if !(t.coef > 0.0 && t.coef.is_finite() && t.exponent > 1.0 && t.exponent.is_finite()) {
                return Err(Error::param(format!(
                    "Orlicz terms need coef > 0 and exponent > 1, got {} u^{}",
                    t.coef, t.exponent
                )));
            }
        }
        let f = OrliczFunction { terms };
        let at_one = f.value(1.0);
        if (at_one - 1.0).abs() > 1e-12 {
            return Err(Error::param(format!("Orlicz function must satisfy phi(1) = 1, got {at_one}")));
        }
        f.check_grid()?;
        Ok(f)
    }

    /// `|u|^p`.
    pub fn power(p: f64) -> Result<Self> {
        Self::new(vec![PowerTerm { coef: 1.0, exponent: p }])
    }

    pub fn terms(&self) -> &[PowerTerm] {
        &self.terms
    }

    /// Growth and doubling conditions on a logarithmic grid.
    fn check_grid(&self) -> Result<()> {
        let mut prev_ratio = 0.0;
        for k in -30..=30 {
            let u = 10f64.powf(k as f64 / 10.0);
            let v = self.value(u);
            let doubling = self.value(2.0 * u) / v;
            let slope_ratio = v / u;
            if !(v > 0.0 && doubling > 2.0 && doubling.is_finite() && slope_ratio > prev_ratio) {
                return Err(Error::param(format!("Orlicz growth conditions fail at u = {u}")));
            }
            prev_ratio = slope_ratio;
        }
        Ok(())
    }

    pub fn value(&self, u: f64) -> f64 {
        let a = u.abs();
        self.terms.iter().map(|t| t.coef * a.powf(t.exponent)).sum()
    }

    pub fn derivative(&self, u: f64) -> f64 {
        let a = u.abs();
        u.signum() * self.terms.iter().map(|t| t.coef * t.exponent * a.powf(t.exponent - 1.0)).sum::<f64>()
    }

    /// Nonnegative solution of `phi(u) = s` for `s >= 0`.
    pub fn inverse(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::domain(format!("Orlicz inverse needs a finite s >= 0, got {s}")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        if let [t] = self.terms.as_slice() {
            return Ok((s / t.coef).powf(1.0 / t.exponent));
        }
        solve_increasing(|u| (self.value(u), self.derivative(u)), 0.0, f64::INFINITY, s, INVERSE_TOL)
    }

    /// `inf {k > 0 : sum_i mu_i phi(u_i / k) <= 1}`.
    pub fn luxemburg_norm(&self, mu: &[f64], u: &[f64]) -> Result<f64> {
        check_dim(mu.len(), u.len())?;
        if u.iter().all(|v| *v == 0.0) {
            return Ok(0.0);
        }
        // sum mu phi(|u| s) = 1 is increasing in s = 1/k
        let g = |s: f64| {
            let mut val = 0.0;
            let mut der = 0.0;
            for (m, v) in mu.iter().zip(u) {
                let a = v.abs();
                val += m * self.value(a * s);
                der += m * a * self.derivative(a * s);
            }
            (val, der)
        };
        let s = solve_increasing(g, 0.0, f64::INFINITY, 1.0, 1e-15)?;
        Ok(1.0 / s)
    }

    /// Gradient of the Luxemburg norm at `u != 0` with norm `k`.
    pub(crate) fn luxemburg_gradient(&self, mu: &[f64], u: &[f64], k: f64) -> Vec<f64> {
        let denom: f64 = mu.iter().zip(u).map(|(m, v)| m * self.derivative(v / k) * v).sum();
        mu.iter().zip(u).map(|(m, v)| m * self.derivative(v / k) * k / denom).collect()
    }
}

/// `Psi(u) = |u|_phi^(1/beta)` on a weighted finite space.
pub(crate) struct LuxemburgPower<'a> {
    pub phi: &'a OrliczFunction,
    pub mu: &'a [f64],
    pub beta: f64,
}

impl LuxemburgPower<'_> {
    pub fn value(&self, u: &[f64]) -> Result<f64> {
        Ok(self.phi.luxemburg_norm(self.mu, u)?.powf(1.0 / self.beta))
    }

    pub fn gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        let k = self.phi.luxemburg_norm(self.mu, u)?;
        if k == 0.0 {
            return Ok(vec![0.0; u.len()]);
        }
        let scale = k.powf(1.0 / self.beta - 1.0) / self.beta;
        Ok(self.phi.luxemburg_gradient(self.mu, u, k).into_iter().map(|g| g * scale).collect())
    }

    pub fn divergence(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        let g = self.gradient(b)?;
        let lin: f64 = a.iter().zip(b).zip(&g).map(|((x, y), c)| (x - y) * c).sum();
        Ok(self.value(a)? - self.value(b)? - lin)
    }
}
