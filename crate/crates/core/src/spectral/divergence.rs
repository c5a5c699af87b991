//! Closed-form matrix divergences and the generic spectral construction.
//!
//! With `xi = U diag(l) U*` and `zeta = V diag(m) V*`, every mixed trace
//! `Re tr(f(xi) g(zeta))` equals `sum_ij f(l_i) g(m_j) |(U* V)_ij|^2`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{re_trace_product, spectral_grad, EigenDecomposition, HermitianMatrix, Scalar};
use crate::config::Tolerances;
use crate::error::{check_dim, Error, Result};
use crate::extended::ExtendedReal;
use crate::potentials::{Potential, PotentialSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum MatrixFamily {
    /// `tr(xi (log xi - log zeta) - xi + zeta)`.
    Umegaki,
    /// `tr(xi zeta^-1) - log det(xi zeta^-1) - n`.
    LogDet,
    /// Fermi-Dirac relative entropy on `0 <= xi <= I`.
    Fermi,
    /// `tr(gamma |xi|^(1/gamma) + (1 - gamma) zeta^(1/gamma) - xi zeta^(1/gamma - 1))`.
    GammaNorm { gamma: f64 },
    /// `tr(zeta^a - xi^a/(1 - a) + a/(1 - a) zeta^(a - 1) xi)` for `a` in
    /// `(0, 1)`, its negative for `a < 0`.
    Alpha { alpha: f64 },
}

impl MatrixFamily {
    pub fn name(&self) -> &'static str {
        match self {
            MatrixFamily::Umegaki => "umegaki",
            MatrixFamily::LogDet => "logdet",
            MatrixFamily::Fermi => "fermi",
            MatrixFamily::GammaNorm { .. } => "gammanorm",
            MatrixFamily::Alpha { .. } => "alpha",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            MatrixFamily::GammaNorm { gamma } if !(gamma > 0.0 && gamma < 1.0) => {
                Err(Error::param(format!("gamma must lie in (0, 1), got {gamma}")))
            }
            MatrixFamily::Alpha { alpha } if !(alpha.is_finite() && (alpha < 0.0 || (alpha > 0.0 && alpha < 1.0))) => {
                Err(Error::param(format!("alpha must lie in (0, 1) or be negative, got {alpha}")))
            }
            _ => Ok(()),
        }
    }

    /// The vector potential whose spectral lift gives this divergence.
    pub fn potential(&self, n: usize) -> Result<PotentialSpec> {
        Ok(match *self {
            MatrixFamily::Umegaki => PotentialSpec::neg_entropy(n),
            MatrixFamily::LogDet => PotentialSpec::burg(n),
            MatrixFamily::Fermi => PotentialSpec::fermi_dirac(n),
            MatrixFamily::GammaNorm { gamma } => PotentialSpec::gamma_norm(gamma, n)?,
            MatrixFamily::Alpha { alpha } => PotentialSpec::alpha_power(alpha, n)?,
        })
    }
}

/// `|(U* V)_ij|^2`.
fn overlap<T: Scalar>(a: &EigenDecomposition<T>, b: &EigenDecomposition<T>) -> DMatrix<f64> {
    (a.vectors.adjoint() * &b.vectors).map(|w| w.modulus_squared())
}

fn mixed(w: &DMatrix<f64>, l: &[f64], m: &[f64], f: impl Fn(f64, f64) -> f64) -> f64 {
    let mut s = 0.0;
    for (i, li) in l.iter().enumerate() {
        for (j, mj) in m.iter().enumerate() {
            s += w[(i, j)] * f(*li, *mj);
        }
    }
    s
}

fn xlogx(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        t * t.ln()
    }
}

/// Closed-form matrix divergence; `+inf` outside the family's domain.
pub fn matrix_div<T: Scalar>(
    family: MatrixFamily,
    xi: &HermitianMatrix<T>,
    zeta: &HermitianMatrix<T>,
) -> Result<ExtendedReal> {
    check_dim(xi.dim(), zeta.dim())?;
    family.validate()?;
    let thr = Tolerances::DEFAULT.spectral;
    let dx = xi.eigen()?;
    let dz = zeta.eigen()?;
    let n = xi.dim() as f64;
    let lmin = dx.eigenvalues.min();
    let lmax = dx.eigenvalues.max();
    let mmin = dz.eigenvalues.min();
    let mmax = dz.eigenvalues.max();
    let psd = lmin >= -thr;
    let pd_x = lmin > thr;
    let pd_z = mmin > thr;
    // eigenvalues within the threshold of zero are treated as zero
    let l: Vec<f64> = dx.eigenvalues.iter().map(|v| v.max(0.0)).collect();
    let m = dz.eigenvalues.as_slice();
    let w = overlap(&dx, &dz);

    let value = match family {
        MatrixFamily::Umegaki => {
            if !(psd && pd_z) {
                return Ok(ExtendedReal::INFINITY);
            }
            let self_term: f64 = l.iter().map(|v| xlogx(*v)).sum();
            let cross = mixed(&w, &l, m, |a, b| a * b.ln());
            self_term - cross - l.iter().sum::<f64>() + m.iter().sum::<f64>()
        }
        MatrixFamily::LogDet => {
            if !(pd_x && pd_z) {
                return Ok(ExtendedReal::INFINITY);
            }
            let l = dx.eigenvalues.as_slice();
            let cross = mixed(&w, l, m, |a, b| a / b);
            let logdet_x: f64 = l.iter().map(|v| v.ln()).sum();
            let logdet_z: f64 = m.iter().map(|v| v.ln()).sum();
            cross - logdet_x + logdet_z - n
        }
        MatrixFamily::Fermi => {
            if !(psd && lmax <= 1.0 + thr && mmin > thr && mmax < 1.0 - thr) {
                return Ok(ExtendedReal::INFINITY);
            }
            let l: Vec<f64> = l.iter().map(|v| v.min(1.0)).collect();
            let self_term: f64 = l.iter().map(|v| xlogx(*v) + xlogx(1.0 - v)).sum();
            let cross = mixed(&w, &l, m, |a, b| a * b.ln() + (1.0 - a) * (1.0 - b).ln());
            self_term - cross
        }
        MatrixFamily::GammaNorm { gamma } => {
            if !pd_z {
                return Ok(ExtendedReal::INFINITY);
            }
            let p = 1.0 / gamma;
            let l = dx.eigenvalues.as_slice();
            let a: f64 = l.iter().map(|v| gamma * v.abs().powf(p)).sum();
            let b: f64 = m.iter().map(|v| (1.0 - gamma) * v.powf(p)).sum();
            a + b - mixed(&w, l, m, |x, z| x * z.powf(p - 1.0))
        }
        MatrixFamily::Alpha { alpha } => {
            let ok = if alpha < 0.0 { pd_x && pd_z } else { psd && pd_z };
            if !ok {
                return Ok(ExtendedReal::INFINITY);
            }
            let l: Vec<f64> = if alpha < 0.0 { dx.eigenvalues.as_slice().to_vec() } else { l };
            let a: f64 = m.iter().map(|v| v.powf(alpha)).sum();
            let b: f64 = l.iter().map(|v| v.powf(alpha)).sum::<f64>() / (1.0 - alpha);
            let c = alpha / (1.0 - alpha) * mixed(&w, &l, m, |x, z| z.powf(alpha - 1.0) * x);
            let v = a - b + c;
            if alpha < 0.0 {
                -v
            } else {
                v
            }
        }
    };
    Ok(ExtendedReal::saturating(value))
}

/// `Phi(lambda(xi)) - Phi(lambda(zeta)) - Re tr((xi - zeta) G)` with
/// `G = U diag(grad Phi(lambda(zeta))) U*`.
pub fn matrix_div_generic<T: Scalar>(
    spec: &PotentialSpec,
    xi: &HermitianMatrix<T>,
    zeta: &HermitianMatrix<T>,
) -> Result<ExtendedReal> {
    check_dim(xi.dim(), zeta.dim())?;
    check_dim(spec.dim(), xi.dim())?;
    let lz = zeta.eigen()?.eigenvalues;
    if !spec.in_interior(lz.as_slice()) {
        return Err(Error::domain("spectrum of the second argument is not interior"));
    }
    let fx = spec.value(xi.eigen()?.eigenvalues.as_slice());
    if fx.is_infinite() {
        return Ok(ExtendedReal::INFINITY);
    }
    let fz = spec.value(lz.as_slice()).raw();
    let g = spectral_grad(spec, zeta)?;
    let diff = xi.matrix() - zeta.matrix();
    let inner = re_trace_product(&diff, g.matrix());
    Ok(ExtendedReal::saturating(fx.raw() - fz - inner))
}

/// `h(zeta^(-1/2) xi zeta^(-1/2)) - n` with `h(A) = tr A - log det A`.
pub fn logdet_congruence_form<T: Scalar>(xi: &HermitianMatrix<T>, zeta: &HermitianMatrix<T>) -> Result<ExtendedReal> {
    check_dim(xi.dim(), zeta.dim())?;
    let thr = Tolerances::DEFAULT.spectral;
    let dz = zeta.eigen()?;
    if dz.eigenvalues.min() <= thr || xi.eigen()?.eigenvalues.min() <= thr {
        return Ok(ExtendedReal::INFINITY);
    }
    let inv_sqrt = dz.reassemble(|v| 1.0 / v.sqrt());
    let a = HermitianMatrix::with_tolerance(inv_sqrt.matrix() * xi.matrix() * inv_sqrt.matrix(), 1e-9)?;
    let la = a.eigen()?.eigenvalues;
    let h: f64 = la.iter().map(|v| v - v.ln()).sum();
    Ok(ExtendedReal::saturating(h - xi.dim() as f64))
}
