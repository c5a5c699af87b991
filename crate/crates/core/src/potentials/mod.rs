//! Euler–Legendre potentials on `R^n`.
//!
//! A [`PotentialSpec`] names one of the built-in families together with its
//! parameters and dimension. Every family is proper, closed, strictly convex
//! on the interior of its effective domain and essentially smooth, so its
//! gradient is a bijection onto the interior of the conjugate's domain.
//!
//! | family        | `Phi(x)`                                   | domain          |
//! |---------------|--------------------------------------------|-----------------|
//! | neg-entropy   | `sum x log x - x`                          | `[0, inf)^n`    |
//! | burg          | `-sum log x`                               | `(0, inf)^n`    |
//! | fermi-dirac   | `sum x log x + (1 - x) log(1 - x)`         | `[0, 1]^n`      |
//! | gamma-norm    | `sum gamma |x|^(1/gamma)`                  | `R^n`           |
//! | alpha-power   | `+-(1/(alpha - 1)) sum (x^alpha - 1)`      | `[0, inf)^n`    |
//! | exp-sum       | `sum exp x`                                | `R^n`           |
//! | norm-integral | `int_0^{|x|} phi(t) dt`                    | `R^n`           |

mod legendre;
mod norm;
pub(crate) mod scalar;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::Tolerances;
use crate::error::{check_dim, Error, Result};
use crate::extended::ExtendedReal;
use crate::numeric::{dot, fd_jacobian};

pub use legendre::{boundary_slopes_diverge, check_euler_legendre, check_euler_legendre_with, LegendreReport};
pub use norm::{NormIntegral, NormKind, PhiProfile, PhiTable};
pub use scalar::ScalarFamily;
use scalar::{ConvexScalar, NumericConjugate};

/// Default numeric settings used inside potential evaluations.
pub(crate) const TOL: Tolerances = Tolerances::DEFAULT;

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    NegEntropy,
    Burg,
    FermiDirac,
    GammaNorm { gamma: f64 },
    AlphaPower { alpha: f64 },
    ExpSum,
    NormIntegral(NormIntegral),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::NegEntropy => "neg-entropy",
            Family::Burg => "burg",
            Family::FermiDirac => "fermi-dirac",
            Family::GammaNorm { .. } => "gamma-norm",
            Family::AlphaPower { .. } => "alpha-power",
            Family::ExpSum => "exp-sum",
            Family::NormIntegral(_) => "norm-integral",
        }
    }

    pub(crate) fn scalar(&self) -> Option<ScalarFamily> {
        Some(match *self {
            Family::NegEntropy => ScalarFamily::NegEntropy,
            Family::Burg => ScalarFamily::Burg,
            Family::FermiDirac => ScalarFamily::FermiDirac,
            Family::GammaNorm { gamma } => ScalarFamily::GammaNorm { gamma },
            Family::AlphaPower { alpha } => ScalarFamily::AlphaPower { alpha },
            Family::ExpSum => ScalarFamily::ExpSum,
            Family::NormIntegral(_) => return None,
        })
    }

    fn validate(&self) -> Result<()> {
        match self {
            Family::GammaNorm { gamma } if !(*gamma > 0.0 && *gamma < 1.0) => {
                Err(Error::param(format!("gamma must lie in (0, 1), got {gamma}")))
            }
            Family::AlphaPower { alpha }
                if !((*alpha > 0.0 && *alpha < 1.0) || (*alpha < 0.0 && alpha.is_finite())) =>
            {
                Err(Error::param(format!("alpha must lie in (0, 1) or (-inf, 0), got {alpha}")))
            }
            Family::NormIntegral(ni) => {
                ni.norm.validate()?;
                ni.profile.validate()
            }
            _ => Ok(()),
        }
    }
}

/// A named potential family with parameters and dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    family: Family,
    dim: usize,
}

impl PotentialSpec {
    pub fn new(family: Family, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dimension must be positive"));
        }
        family.validate()?;
        Ok(PotentialSpec { family, dim })
    }

    pub fn neg_entropy(dim: usize) -> Self {
        PotentialSpec { family: Family::NegEntropy, dim: dim.max(1) }
    }

    pub fn burg(dim: usize) -> Self {
        PotentialSpec { family: Family::Burg, dim: dim.max(1) }
    }

    pub fn fermi_dirac(dim: usize) -> Self {
        PotentialSpec { family: Family::FermiDirac, dim: dim.max(1) }
    }

    pub fn exp_sum(dim: usize) -> Self {
        PotentialSpec { family: Family::ExpSum, dim: dim.max(1) }
    }

    pub fn gamma_norm(gamma: f64, dim: usize) -> Result<Self> {
        Self::new(Family::GammaNorm { gamma }, dim)
    }

    pub fn alpha_power(alpha: f64, dim: usize) -> Result<Self> {
        Self::new(Family::AlphaPower { alpha }, dim)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Same family in another dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(self.family.clone(), dim)
    }

    pub(crate) fn scalar(&self) -> Option<ScalarFamily> {
        self.family.scalar()
    }

    /// Whether `y` lies in the interior of the conjugate's effective domain.
    pub fn in_conjugate_interior(&self, y: &[f64]) -> bool {
        match self.scalar() {
            Some(f) => {
                let (lo, hi) = f.slope_range();
                y.iter().all(|&s| s > lo && s < hi)
            }
            None => y.iter().all(|v| v.is_finite()),
        }
    }
}

/// Build a radial potential `Psi(x) = int_0^{|x|} phi(t) dt` from a sampled
/// profile `[[t, phi(t)], ...]`.
pub fn build_norm_integral_potential(phi_samples: &[[f64; 2]], norm: NormKind, dim: usize) -> Result<PotentialSpec> {
    norm.validate()?;
    let table = PhiTable::new(phi_samples, TOL.quadrature)?;
    PotentialSpec::new(Family::NormIntegral(NormIntegral { profile: PhiProfile::Table(table), norm }), dim)
}

/// Operations the divergence and projection code needs from a convex
/// potential on `R^n`.
///
/// Inputs are assumed to have length [`Potential::dim`]; the public free
/// functions of this module check dimensions before dispatching here.
pub trait Potential {
    fn dim(&self) -> usize;

    /// Value, `+inf` off the effective domain.
    fn value(&self, x: &[f64]) -> ExtendedReal;

    fn in_domain(&self, x: &[f64]) -> bool {
        self.value(x).is_finite()
    }

    fn in_interior(&self, x: &[f64]) -> bool;

    fn gradient(&self, x: &[f64]) -> Result<DVector<f64>>;

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>>;

    /// Directional derivative of the Hessian: `sum_j T_ijk v_j`.
    fn hessian_derivative(&self, x: &[f64], v: &[f64]) -> Result<DMatrix<f64>> {
        let n = x.len();
        let mut out = DMatrix::zeros(n, n);
        let mut xp = x.to_vec();
        for k in 0..n {
            let h = 1e-6 * (1.0 + x[k].abs());
            xp[k] = x[k] + h;
            let hp = self.hessian(&xp)?;
            xp[k] = x[k] - h;
            let hm = self.hessian(&xp)?;
            xp[k] = x[k];
            let col = (hp - hm) * DVector::from_column_slice(v) / (2.0 * h);
            out.set_column(k, &col);
        }
        Ok((&out + out.transpose()) * 0.5)
    }

    /// Largest `t` such that `x + s dx` stays interior for `s < t`
    /// (`inf` when the ray never leaves the interior).
    fn max_step(&self, x: &[f64], dx: &[f64]) -> f64 {
        let at = |t: f64| -> Vec<f64> { x.iter().zip(dx).map(|(a, b)| a + t * b).collect() };
        if self.in_interior(&at(1.0)) {
            let mut t = 1.0;
            for _ in 0..60 {
                if !self.in_interior(&at(2.0 * t)) {
                    break;
                }
                t *= 2.0;
            }
            if t >= 2f64.powi(59) {
                return f64::INFINITY;
            }
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        if self.in_interior(&at(1.0)) {
            lo = 1.0;
            hi = 2.0;
            while self.in_interior(&at(hi)) {
                lo = hi;
                hi *= 2.0;
            }
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.in_interior(&at(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// `Phi(x) - Phi(y) - <x - y, grad Phi(y)>`, `+inf` when `y` is not
    /// interior or `x` is off the domain.
    fn divergence(&self, x: &[f64], y: &[f64]) -> ExtendedReal {
        if !self.in_interior(y) {
            return ExtendedReal::INFINITY;
        }
        let (px, py) = match (self.value(x).finite(), self.value(y).finite()) {
            (Some(a), Some(b)) => (a, b),
            _ => return ExtendedReal::INFINITY,
        };
        let g = match self.gradient(y) {
            Ok(g) => g,
            Err(_) => return ExtendedReal::INFINITY,
        };
        let lin: f64 = x.iter().zip(y).zip(g.iter()).map(|((a, b), c)| (a - b) * c).sum();
        ExtendedReal::saturating(px - py - lin)
    }

    /// Per-coordinate open box containing the interior, when the domain is a
    /// product of intervals.
    fn interior_box(&self) -> Option<(f64, f64)> {
        None
    }
}

impl Potential for PotentialSpec {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> ExtendedReal {
        match &self.family {
            Family::NormIntegral(ni) => {
                if x.iter().all(|v| v.is_finite()) {
                    ExtendedReal::saturating(ni.value(x, TOL.quadrature))
                } else {
                    ExtendedReal::INFINITY
                }
            }
            fam => {
                let f = fam.scalar().expect("separable family");
                ExtendedReal::saturating(x.iter().map(|&t| f.value(t)).sum())
            }
        }
    }

    fn in_interior(&self, x: &[f64]) -> bool {
        match self.scalar() {
            Some(f) => x.iter().all(|&t| f.in_interior(t)),
            None => x.iter().all(|v| v.is_finite()),
        }
    }

    fn gradient(&self, x: &[f64]) -> Result<DVector<f64>> {
        if !self.in_interior(x) {
            return Err(Error::domain(format!(
                "{} gradient requested outside the interior of its domain",
                self.family.name()
            )));
        }
        Ok(match &self.family {
            Family::NormIntegral(ni) => ni.gradient(x),
            fam => {
                let f = fam.scalar().expect("separable family");
                DVector::from_iterator(x.len(), x.iter().map(|&t| f.d1(t)))
            }
        })
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        if !self.in_interior(x) {
            return Err(Error::domain(format!(
                "{} hessian requested outside the interior of its domain",
                self.family.name()
            )));
        }
        let h = match &self.family {
            Family::NormIntegral(ni) => ni.hessian(x)?,
            fam => {
                let f = fam.scalar().expect("separable family");
                DMatrix::from_diagonal(&DVector::from_iterator(x.len(), x.iter().map(|&t| f.d2(t))))
            }
        };
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("hessian is not finite at this point"));
        }
        Ok(h)
    }

    fn hessian_derivative(&self, x: &[f64], v: &[f64]) -> Result<DMatrix<f64>> {
        match self.scalar() {
            Some(f) => Ok(DMatrix::from_diagonal(&DVector::from_iterator(
                x.len(),
                x.iter().zip(v).map(|(&t, &w)| f.d3(t) * w),
            ))),
            None => {
                let g = |z: &[f64]| -> DVector<f64> {
                    self.hessian(z)
                        .map(|h| h * DVector::from_column_slice(v))
                        .unwrap_or_else(|_| DVector::from_element(z.len(), f64::NAN))
                };
                let j = fd_jacobian(g, x, 1e-6);
                Ok((&j + j.transpose()) * 0.5)
            }
        }
    }

    fn max_step(&self, x: &[f64], dx: &[f64]) -> f64 {
        match self.scalar() {
            Some(f) => interval_max_step(f.interior(), x, dx),
            None => f64::INFINITY,
        }
    }

    fn divergence(&self, x: &[f64], y: &[f64]) -> ExtendedReal {
        match self.scalar() {
            Some(f) => {
                if !y.iter().all(|&t| f.in_interior(t)) {
                    return ExtendedReal::INFINITY;
                }
                ExtendedReal::saturating(x.iter().zip(y).map(|(&a, &b)| f.divergence(a, b)).sum())
            }
            None => {
                // generic formula, same as the trait default
                if !self.in_interior(y) {
                    return ExtendedReal::INFINITY;
                }
                let (Some(px), Some(py)) = (self.value(x).finite(), self.value(y).finite()) else {
                    return ExtendedReal::INFINITY;
                };
                let Ok(g) = self.gradient(y) else {
                    return ExtendedReal::INFINITY;
                };
                let lin: f64 = x.iter().zip(y).zip(g.iter()).map(|((a, b), c)| (a - b) * c).sum();
                ExtendedReal::saturating(px - py - lin)
            }
        }
    }

    fn interior_box(&self) -> Option<(f64, f64)> {
        self.scalar().map(|f| f.interior())
    }
}

pub(crate) fn interval_max_step((lo, hi): (f64, f64), x: &[f64], dx: &[f64]) -> f64 {
    let mut t = f64::INFINITY;
    for (&xi, &di) in x.iter().zip(dx) {
        if di < 0.0 && lo.is_finite() {
            t = t.min((lo - xi) / di);
        } else if di > 0.0 && hi.is_finite() {
            t = t.min((hi - xi) / di);
        }
    }
    t
}

/// The Fenchel conjugate of a potential, viewed as a potential on the dual
/// coordinates `eta = grad Phi(x)`.
#[derive(Debug, Clone, Copy)]
pub struct Conjugate<'a>(pub &'a PotentialSpec);

impl Potential for Conjugate<'_> {
    fn dim(&self) -> usize {
        self.0.dim
    }

    fn value(&self, y: &[f64]) -> ExtendedReal {
        fenchel_conjugate_unchecked(self.0, y)
    }

    fn in_interior(&self, y: &[f64]) -> bool {
        self.0.in_conjugate_interior(y)
    }

    fn gradient(&self, y: &[f64]) -> Result<DVector<f64>> {
        grad_conjugate_unchecked(self.0, y)
    }

    fn hessian(&self, y: &[f64]) -> Result<DMatrix<f64>> {
        let x = grad_conjugate_unchecked(self.0, y)?;
        match self.0.scalar() {
            Some(f) => Ok(DMatrix::from_diagonal(&DVector::from_iterator(x.len(), x.iter().map(|&t| 1.0 / f.d2(t))))),
            None => self
                .0
                .hessian(x.as_slice())?
                .try_inverse()
                .ok_or_else(|| Error::Numeric("singular hessian while inverting".into())),
        }
    }

    fn hessian_derivative(&self, y: &[f64], v: &[f64]) -> Result<DMatrix<f64>> {
        match self.0.scalar() {
            Some(f) => {
                let x = grad_conjugate_unchecked(self.0, y)?;
                Ok(DMatrix::from_diagonal(&DVector::from_iterator(
                    x.len(),
                    x.iter().zip(v).map(|(&t, &w)| -f.d3(t) / f.d2(t).powi(3) * w),
                )))
            }
            None => {
                let g = |z: &[f64]| -> DVector<f64> {
                    self.hessian(z)
                        .map(|h| h * DVector::from_column_slice(v))
                        .unwrap_or_else(|_| DVector::from_element(z.len(), f64::NAN))
                };
                let j = fd_jacobian(g, y, 1e-6);
                Ok((&j + j.transpose()) * 0.5)
            }
        }
    }

    fn max_step(&self, y: &[f64], dy: &[f64]) -> f64 {
        match self.0.scalar() {
            Some(f) => interval_max_step(f.slope_range(), y, dy),
            None => f64::INFINITY,
        }
    }

    fn divergence(&self, a: &[f64], b: &[f64]) -> ExtendedReal {
        // D_{Phi*}(a, b) = D_Phi(grad Phi*(b), grad Phi*(a))
        if !self.in_interior(b) {
            return ExtendedReal::INFINITY;
        }
        if self.in_interior(a) {
            if let (Ok(xa), Ok(xb)) = (grad_conjugate_unchecked(self.0, a), grad_conjugate_unchecked(self.0, b)) {
                return self.0.divergence(xb.as_slice(), xa.as_slice());
            }
        }
        let (Some(pa), Some(pb)) = (self.value(a).finite(), self.value(b).finite()) else {
            return ExtendedReal::INFINITY;
        };
        let Ok(g) = self.gradient(b) else {
            return ExtendedReal::INFINITY;
        };
        let lin: f64 = a.iter().zip(b).zip(g.iter()).map(|((p, q), c)| (p - q) * c).sum();
        ExtendedReal::saturating(pa - pb - lin)
    }

    fn interior_box(&self) -> Option<(f64, f64)> {
        self.0.scalar().map(|f| f.slope_range())
    }
}

/// `Phi(x)`; `+inf` off the effective domain.
pub fn eval_potential(spec: &PotentialSpec, x: &[f64]) -> Result<ExtendedReal> {
    check_dim(spec.dim, x.len())?;
    Ok(spec.value(x))
}

/// Closed-form gradient; domain error off the interior.
pub fn grad_potential(spec: &PotentialSpec, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(spec.dim, x.len())?;
    Ok(spec.gradient(x)?.as_slice().to_vec())
}

/// Closed-form Hessian; diagonal for the separable families.
pub fn hess_potential(spec: &PotentialSpec, x: &[f64]) -> Result<DMatrix<f64>> {
    check_dim(spec.dim, x.len())?;
    spec.hessian(x)
}

/// `Phi*(y) = sup_x <x, y> - Phi(x)`.
pub fn fenchel_conjugate(spec: &PotentialSpec, y: &[f64]) -> Result<ExtendedReal> {
    check_dim(spec.dim, y.len())?;
    Ok(fenchel_conjugate_unchecked(spec, y))
}

fn fenchel_conjugate_unchecked(spec: &PotentialSpec, y: &[f64]) -> ExtendedReal {
    match &spec.family {
        Family::NormIntegral(ni) => ExtendedReal::saturating(ni.conjugate(y, TOL.root, TOL.quadrature)),
        fam => {
            let f = fam.scalar().expect("separable family");
            ExtendedReal::saturating(y.iter().map(|&s| f.conjugate(s, TOL.conjugate)).sum())
        }
    }
}

/// `(grad Phi)^{-1}(y)`; domain error outside the conjugate's interior.
pub fn grad_conjugate(spec: &PotentialSpec, y: &[f64]) -> Result<Vec<f64>> {
    check_dim(spec.dim, y.len())?;
    Ok(grad_conjugate_unchecked(spec, y)?.as_slice().to_vec())
}

fn grad_conjugate_unchecked(spec: &PotentialSpec, y: &[f64]) -> Result<DVector<f64>> {
    if !spec.in_conjugate_interior(y) {
        return Err(Error::domain(format!(
            "point lies outside the interior of the {} conjugate domain",
            spec.family.name()
        )));
    }
    match &spec.family {
        Family::NormIntegral(ni) => ni.conjugate_gradient(y, TOL.root),
        fam => {
            let f = fam.scalar().expect("separable family");
            Ok(DVector::from_iterator(y.len(), y.iter().map(|&s| f.inverse_slope(s))))
        }
    }
}

/// `Phi**(x)` computed by applying the numeric conjugation twice.
///
/// Separable families conjugate coordinatewise with the guarded Newton
/// maximizer; radial families reduce to the same one-dimensional problem.
pub fn numeric_biconjugate(spec: &PotentialSpec, x: &[f64]) -> Result<ExtendedReal> {
    check_dim(spec.dim, x.len())?;
    let tol = TOL.conjugate * 1e-2;
    match &spec.family {
        Family::NormIntegral(ni) => {
            let radial = Radial { ni };
            let conj = NumericConjugate { inner: &radial, tol };
            let r = ni.norm.norm(x);
            Ok(ExtendedReal::saturating(scalar::conjugate_by_newton(&conj, r, tol)))
        }
        fam => {
            let f = fam.scalar().expect("separable family");
            let conj = NumericConjugate { inner: &f, tol };
            Ok(ExtendedReal::saturating(x.iter().map(|&t| scalar::conjugate_by_newton(&conj, t, tol)).sum()))
        }
    }
}

/// `F(r) = int_0^r phi` extended evenly to the real line.
struct Radial<'a> {
    ni: &'a NormIntegral,
}

impl ConvexScalar for Radial<'_> {
    fn value(&self, t: f64) -> f64 {
        self.ni.profile.integral(t.abs(), TOL.quadrature)
    }
    fn d1(&self, t: f64) -> f64 {
        t.signum() * self.ni.profile.phi(t.abs())
    }
    fn d2(&self, t: f64) -> f64 {
        self.ni.profile.phi_prime(t.abs())
    }
    fn interior(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn slope_range(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn edge_limit(&self, _upper: bool) -> f64 {
        f64::INFINITY
    }
}

/// Fenchel–Young gap `Phi(x) + Phi*(y) - <x, y>`; `+inf` when either side is.
pub fn fenchel_young_gap(spec: &PotentialSpec, x: &[f64], y: &[f64]) -> Result<ExtendedReal> {
    check_dim(spec.dim, x.len())?;
    check_dim(spec.dim, y.len())?;
    match (spec.value(x).finite(), fenchel_conjugate_unchecked(spec, y).finite()) {
        (Some(a), Some(b)) => Ok(ExtendedReal::saturating(a + b - dot(x, y))),
        _ => Ok(ExtendedReal::INFINITY),
    }
}

// ---------------------------------------------------------------------------
// JSON: {"family": "...", "params": {...}, "dim": n}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    family: String,
    #[serde(default)]
    params: RawParams,
    dim: usize,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi_power: Option<RawPower>,
    #[serde(skip_serializing_if = "Option::is_none")]
    norm: Option<NormKind>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPower {
    coef: f64,
    exponent: f64,
}

impl TryFrom<RawSpec> for PotentialSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let p = raw.params;
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::param(format!("family {} needs parameter {name}", raw.family)))
        };
        let family = match raw.family.as_str() {
            "neg-entropy" => Family::NegEntropy,
            "burg" => Family::Burg,
            "fermi-dirac" => Family::FermiDirac,
            "exp-sum" => Family::ExpSum,
            "gamma-norm" => Family::GammaNorm { gamma: need(p.gamma, "gamma")? },
            "alpha-power" => Family::AlphaPower { alpha: need(p.alpha, "alpha")? },
            "norm-integral" => {
                let norm = p.norm.unwrap_or(NormKind::Euclidean);
                let profile = match (p.phi, p.phi_power) {
                    (Some(table), None) => PhiProfile::Table(PhiTable::new(&table, TOL.quadrature)?),
                    (None, Some(pw)) => PhiProfile::Power { coef: pw.coef, exponent: pw.exponent },
                    _ => return Err(Error::param("norm-integral needs exactly one of phi (table) or phi_power")),
                };
                Family::NormIntegral(NormIntegral { profile, norm })
            }
            other => return Err(Error::param(format!("unknown potential family '{other}'"))),
        };
        PotentialSpec::new(family, raw.dim)
    }
}

impl From<&PotentialSpec> for RawSpec {
    fn from(spec: &PotentialSpec) -> Self {
        let mut params = RawParams::default();
        match &spec.family {
            Family::GammaNorm { gamma } => params.gamma = Some(*gamma),
            Family::AlphaPower { alpha } => params.alpha = Some(*alpha),
            Family::NormIntegral(ni) => {
                params.norm = Some(ni.norm);
                match &ni.profile {
                    PhiProfile::Table(t) => params.phi = Some(t.samples()),
                    PhiProfile::Power { coef, exponent } => {
                        params.phi_power = Some(RawPower { coef: *coef, exponent: *exponent })
                    }
                }
            }
            _ => {}
        }
        RawSpec { family: spec.family.name().to_string(), params, dim: spec.dim }
    }
}

impl Serialize for PotentialSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawSpec::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for PotentialSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSpec::deserialize(d)?;
        PotentialSpec::try_from(raw).map_err(serde::de::Error::custom)
    }
}
