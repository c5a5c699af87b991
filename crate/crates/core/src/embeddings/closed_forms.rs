//! Closed-form divergences of the power, Jordan, Orlicz and spin-factor
//! geometries.

use nalgebra::DMatrix;

use super::orlicz::OrliczFunction;
use super::{EmbeddingSpec, GeneralizedGeometry, SpinFactorElement, ZElement};
use crate::config::Tolerances;
use crate::error::{check_dim, Error, Result};
use crate::extended::ExtendedReal;
use crate::potentials::{eval_potential, grad_potential};
use crate::spectral::{re_trace_product, HermitianMatrix, RealSymmetric, Scalar};

const NORMALIZATION_TOL: f64 = 1e-10;

pub(crate) fn check_mazur_params(alpha: f64, beta: f64, gamma: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param(format!("alpha must be positive, got {alpha}")));
    }
    for (name, v) in [("beta", beta), ("gamma", gamma)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::param(format!("{name} must lie in (0, 1), got {v}")));
        }
    }
    Ok(())
}

/// `phi^gamma`, elementwise on vectors and spectrally on matrices.
pub fn mazur_forward(gamma: f64, phi: &ZElement) -> Result<ZElement> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::param(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    power_map(gamma, phi)
}

pub(crate) fn power_map(p: f64, phi: &ZElement) -> Result<ZElement> {
    match phi {
        ZElement::Vector(v) => Ok(ZElement::Vector(nonneg_vector(v)?.iter().map(|t| t.powf(p)).collect())),
        ZElement::Matrix(m) => Ok(ZElement::Matrix(matrix_power(m, p)?)),
        ZElement::Spin(_) => Err(Error::domain("power maps act on vectors and matrices")),
    }
}

fn nonneg_vector(v: &[f64]) -> Result<Vec<f64>> {
    let thr = Tolerances::DEFAULT.spectral;
    if v.is_empty() {
        return Err(Error::Validation("empty vector".into()));
    }
    if v.iter().any(|t| !(*t >= -thr) || !t.is_finite()) {
        return Err(Error::domain("entries must be nonnegative"));
    }
    Ok(v.iter().map(|t| t.max(0.0)).collect())
}

/// `X^p` for positive semidefinite `X`.
pub(crate) fn matrix_power<T: Scalar>(x: &HermitianMatrix<T>, p: f64) -> Result<HermitianMatrix<T>> {
    let dec = x.eigen()?;
    if dec.eigenvalues.min() < -Tolerances::DEFAULT.spectral {
        return Err(Error::domain("matrix must be positive semidefinite"));
    }
    Ok(dec.reassemble(|l| if l <= 0.0 { 0.0 } else { l.powf(p) }))
}

fn mazur_formula(alpha: f64, beta: f64, gamma: f64, n_phi: f64, n_psi: f64, cross: f64) -> Result<ExtendedReal> {
    if !(n_psi > 0.0) {
        return Err(Error::domain("second argument must be nonzero"));
    }
    let e = gamma / beta;
    let v = (beta * n_phi.powf(e) + (1.0 - beta) * n_psi.powf(e) - n_psi.powf(e - 1.0) * cross) / alpha;
    Ok(ExtendedReal::saturating(v))
}

/// `alpha^-1 (beta |phi|_1^(g/b) + (1 - beta) |psi|_1^(g/b) - |psi|_1^(g/b - 1) tr(phi^g psi^(1-g)))`.
pub fn d_mazur(alpha: f64, beta: f64, gamma: f64, phi: &ZElement, psi: &ZElement) -> Result<ExtendedReal> {
    match (phi, psi) {
        (ZElement::Vector(a), ZElement::Vector(b)) => d_mazur_vector(alpha, beta, gamma, a, b),
        (ZElement::Matrix(a), ZElement::Matrix(b)) => d_mazur_matrix(alpha, beta, gamma, a, b),
        _ => Err(Error::domain("both arguments must be vectors or both matrices")),
    }
}

pub fn d_mazur_vector(alpha: f64, beta: f64, gamma: f64, phi: &[f64], psi: &[f64]) -> Result<ExtendedReal> {
    check_mazur_params(alpha, beta, gamma)?;
    check_dim(phi.len(), psi.len())?;
    let a = nonneg_vector(phi)?;
    let b = nonneg_vector(psi)?;
    let cross: f64 = a.iter().zip(&b).map(|(x, y)| x.powf(gamma) * y.powf(1.0 - gamma)).sum();
    mazur_formula(alpha, beta, gamma, a.iter().sum(), b.iter().sum(), cross)
}

pub fn d_mazur_matrix<T: Scalar>(
    alpha: f64,
    beta: f64,
    gamma: f64,
    phi: &HermitianMatrix<T>,
    psi: &HermitianMatrix<T>,
) -> Result<ExtendedReal> {
    check_mazur_params(alpha, beta, gamma)?;
    check_dim(phi.dim(), psi.dim())?;
    let a = matrix_power(phi, gamma)?;
    let b = matrix_power(psi, 1.0 - gamma)?;
    let cross = re_trace_product(a.matrix(), b.matrix());
    mazur_formula(alpha, beta, gamma, trace_norm(phi)?, trace_norm(psi)?, cross)
}

/// Trace of a positive semidefinite matrix, eigenvalues within the spectral
/// threshold of zero counted as zero.
fn trace_norm<T: Scalar>(x: &HermitianMatrix<T>) -> Result<f64> {
    Ok(x.eigen()?.eigenvalues.iter().map(|l| l.max(0.0)).sum())
}

/// The Jordan-algebra form with `a . b = (ab + ba)/2` and `tau = tr` on real
/// symmetric matrices.
pub fn d_jordan(alpha: f64, beta: f64, gamma: f64, omega: &RealSymmetric, phi: &RealSymmetric) -> Result<ExtendedReal> {
    check_mazur_params(alpha, beta, gamma)?;
    check_dim(omega.dim(), phi.dim())?;
    let a = matrix_power(omega, gamma)?;
    let b = matrix_power(phi, 1.0 - gamma)?;
    let jordan: DMatrix<f64> = (a.matrix() * b.matrix() + b.matrix() * a.matrix()) * 0.5;
    let cross = jordan.trace();
    mazur_formula(alpha, beta, gamma, trace_norm(omega)?, trace_norm(phi)?, cross)
}

/// Checks that `w` is a nonnegative vector with `sum mu_i w_i = 1`.
pub(crate) fn check_normalized(mu: &[f64], w: &[f64]) -> Result<()> {
    check_dim(mu.len(), w.len())?;
    nonneg_vector(w)?;
    let mass: f64 = mu.iter().zip(w).map(|(m, v)| m * v).sum();
    if (mass - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::domain(format!("weighted mass must be 1, got {mass}")));
    }
    Ok(())
}

pub(crate) fn check_weights(mu: &[f64]) -> Result<()> {
    if mu.is_empty() || mu.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
        return Err(Error::param("weights must be positive and finite"));
    }
    Ok(())
}

/// `beta^-1 (1 - phibar(omega, rho) / phibar(rho, rho))` with
/// `phibar(omega, rho) = sum_i mu_i phi^-1(omega_i) phi'(phi^-1(rho_i))`.
pub fn d_orlicz_discrete(
    phi: &OrliczFunction,
    beta: f64,
    mu: &[f64],
    omega: &[f64],
    rho: &[f64],
) -> Result<ExtendedReal> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::param(format!("beta must lie in (0, 1), got {beta}")));
    }
    check_weights(mu)?;
    check_normalized(mu, omega)?;
    check_normalized(mu, rho)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..mu.len() {
        let a = phi.inverse(omega[i].max(0.0))?;
        let b = phi.inverse(rho[i].max(0.0))?;
        let d = phi.derivative(b);
        num += mu[i] * a * d;
        den += mu[i] * b * d;
    }
    Ok(ExtendedReal::saturating((1.0 - num / den) / beta))
}

/// `D_Psi(x_v, x_w)` for slice elements `v = (1, x_v)`, `w = (1, x_w)`.
pub fn spin_factor_div(
    geometry: &GeneralizedGeometry,
    v: &SpinFactorElement,
    w: &SpinFactorElement,
) -> Result<ExtendedReal> {
    let EmbeddingSpec::SpinFactorSlice { norm } = geometry.embedding() else {
        return Err(Error::param("geometry is not a spin-factor slice"));
    };
    let spec = geometry.carrier_potential(v.x.len())?;
    v.check_slice(norm)?;
    w.check_slice(norm)?;
    check_dim(v.x.len(), w.x.len())?;
    let pv = eval_potential(&spec, &v.x)?.raw();
    let pw = eval_potential(&spec, &w.x)?.raw();
    let g = grad_potential(&spec, &w.x)?;
    let lin: f64 = v.x.iter().zip(&w.x).zip(&g).map(|((a, b), c)| (a - b) * c).sum();
    Ok(ExtendedReal::saturating(pv - pw - lin))
}
