//! Divergences pulled back through nonlinear embeddings.
//!
//! A geometry is a triple `(Z, l, Psi)`: a set `Z`, a bijection `l` of `Z`
//! onto a subset of a carrier space, and a potential `Psi` on the carrier.
//! Its divergence is `D(phi, psi) = D_Psi(l(phi), l(psi))`.
//!
//! | embedding | `Z` | `l` | `Psi` |
//! |---|---|---|---|
//! | power (vector) | `phi >= 0` | `phi^gamma` | `(beta/alpha) |u|_{1/gamma}^{1/beta}` |
//! | power (matrix) | `phi >= 0` | `U diag(l^gamma) U*` | same norm on eigenvalues |
//! | Orlicz | `phi >= 0, sum mu phi = 1` | `phi^-1(.)` | `|u|_phi^{1/beta}` (Luxemburg) |
//! | spin factor | `(1, x)`, `|x| <= 1` | `x` | `int_0^{|x|} phi(t) dt` |

mod closed_forms;
mod orlicz;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::bregman::{bregman_div, project, ConstraintSet, Frame, ProjectionOptions, ProjectionResult, Side};
use crate::config::Tolerances;
use crate::error::{check_dim, Error, Result};
use crate::extended::ExtendedReal;
use crate::potentials::{check_euler_legendre, Family, NormIntegral, NormKind, PhiProfile, Potential, PotentialSpec};
use crate::spectral::{matrix_div_generic, HermitianMatrix};

pub use closed_forms::{
    d_jordan, d_mazur, d_mazur_matrix, d_mazur_vector, d_orlicz_discrete, mazur_forward, spin_factor_div,
};
pub use orlicz::{OrliczFunction, PowerTerm};

use closed_forms::{check_mazur_params, check_normalized, check_weights, power_map};
use orlicz::LuxemburgPower;

/// Tolerance for membership of the image of `Z` after a projection.
const IMAGE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Carrier {
    Vector,
    Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EmbeddingSpec {
    /// `phi -> phi^gamma` on the positive cone.
    MazurPower { gamma: f64, carrier: Carrier },
    /// `(1, x) -> x` on the unit slice of `R + X`.
    SpinFactorSlice { norm: NormKind },
    /// `phi -> phi^-1(phi_i)` on normalized weighted vectors.
    OrliczInverse { orlicz: OrliczFunction, weights: Vec<f64> },
}

/// An element of `Z`: a vector, a matrix or a spin-factor pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ZElement {
    Vector(Vec<f64>),
    Matrix(HermitianMatrix),
    Spin(SpinFactorElement),
}

impl ZElement {
    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            ZElement::Vector(v) => Some(v),
            _ => None,
        }
    }
}

/// `v = (lambda, x)` in `R + X`; `v >= 0` iff `lambda >= |x|_X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinFactorElement {
    pub lambda: f64,
    pub x: Vec<f64>,
}

impl SpinFactorElement {
    pub fn on_slice(x: Vec<f64>) -> Self {
        SpinFactorElement { lambda: 1.0, x }
    }

    pub fn is_positive(&self, norm: &NormKind) -> bool {
        self.lambda >= norm.norm(&self.x)
    }

    /// `max(|lambda|, |x|_X)`.
    pub fn norm(&self, norm: &NormKind) -> f64 {
        self.lambda.abs().max(norm.norm(&self.x))
    }

    pub(crate) fn check_slice(&self, norm: &NormKind) -> Result<()> {
        let tol = Tolerances::DEFAULT.spectral;
        if (self.lambda - 1.0).abs() > tol {
            return Err(Error::domain(format!("spin-factor element has lambda = {}, not 1", self.lambda)));
        }
        let r = norm.norm(&self.x);
        if !(r <= 1.0 + tol) {
            return Err(Error::domain(format!("spin-factor element has |x| = {r} > 1")));
        }
        Ok(())
    }
}

impl EmbeddingSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            EmbeddingSpec::MazurPower { gamma, .. } => {
                if !(*gamma > 0.0 && *gamma < 1.0) {
                    return Err(Error::param(format!("gamma must lie in (0, 1), got {gamma}")));
                }
                Ok(())
            }
            EmbeddingSpec::SpinFactorSlice { norm } => norm.validate(),
            EmbeddingSpec::OrliczInverse { weights, .. } => check_weights(weights),
        }
    }

    /// Whether `z` belongs to `Z`.
    pub fn check_member(&self, z: &ZElement) -> Result<()> {
        match (self, z) {
            (EmbeddingSpec::MazurPower { carrier: Carrier::Vector, .. }, ZElement::Vector(v)) => {
                power_map(1.0, &ZElement::Vector(v.clone())).map(|_| ())
            }
            (EmbeddingSpec::MazurPower { carrier: Carrier::Matrix, .. }, ZElement::Matrix(m)) => {
                closed_forms::matrix_power(m, 1.0).map(|_| ())
            }
            (EmbeddingSpec::SpinFactorSlice { norm }, ZElement::Spin(s)) => s.check_slice(norm),
            (EmbeddingSpec::OrliczInverse { weights, .. }, ZElement::Vector(v)) => check_normalized(weights, v),
            _ => Err(Error::domain("element does not match the carrier of the embedding")),
        }
    }

    /// `l(z)`.
    pub fn forward(&self, z: &ZElement) -> Result<ZElement> {
        self.check_member(z)?;
        match (self, z) {
            (EmbeddingSpec::MazurPower { gamma, .. }, _) => power_map(*gamma, z),
            (EmbeddingSpec::SpinFactorSlice { .. }, ZElement::Spin(s)) => Ok(ZElement::Vector(s.x.clone())),
            (EmbeddingSpec::OrliczInverse { orlicz, .. }, ZElement::Vector(v)) => {
                Ok(ZElement::Vector(v.iter().map(|t| orlicz.inverse(t.max(0.0))).collect::<Result<_>>()?))
            }
            _ => unreachable!("carrier checked above"),
        }
    }

    /// `l^-1(u)` for `u` in the image of `Z`.
    pub fn inverse(&self, u: &ZElement) -> Result<ZElement> {
        let z = match (self, u) {
            (EmbeddingSpec::MazurPower { gamma, .. }, _) => power_map(1.0 / gamma, u)?,
            (EmbeddingSpec::SpinFactorSlice { .. }, ZElement::Vector(x)) => {
                ZElement::Spin(SpinFactorElement::on_slice(x.clone()))
            }
            (EmbeddingSpec::OrliczInverse { orlicz, .. }, ZElement::Vector(v)) => {
                ZElement::Vector(v.iter().map(|t| orlicz.value(*t)).collect())
            }
            _ => return Err(Error::domain("element does not match the carrier of the embedding")),
        };
        self.check_member(&z)?;
        Ok(z)
    }
}

/// The potential of a geometry on the carrier space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeometryPotential {
    /// `(beta/alpha) |u|_X^(1/beta)` with the norm fixed by the embedding.
    PowerNorm { alpha: f64, beta: f64 },
    /// An explicit potential on the carrier.
    Spec(PotentialSpec),
}

/// The triple `(Z, l, Psi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGeometry", into = "RawGeometry")]
pub struct GeneralizedGeometry {
    embedding: EmbeddingSpec,
    potential: GeometryPotential,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    embedding: EmbeddingSpec,
    potential: GeometryPotential,
}

impl TryFrom<RawGeometry> for GeneralizedGeometry {
    type Error = Error;

    fn try_from(raw: RawGeometry) -> Result<Self> {
        GeneralizedGeometry::new(raw.embedding, raw.potential)
    }
}

impl From<GeneralizedGeometry> for RawGeometry {
    fn from(g: GeneralizedGeometry) -> Self {
        RawGeometry { embedding: g.embedding, potential: g.potential }
    }
}

impl GeneralizedGeometry {
    /// Validates the pairing of embedding and potential:
    ///
    /// - power embeddings take `PowerNorm` on the `1/gamma` norm;
    /// - Orlicz embeddings take `PowerNorm` with `alpha = beta` on the
    ///   Luxemburg norm;
    /// - spin-factor slices take a norm-integral potential on the same norm,
    ///   checked numerically to be Euler–Legendre.
    pub fn new(embedding: EmbeddingSpec, potential: GeometryPotential) -> Result<Self> {
        embedding.validate()?;
        match (&embedding, &potential) {
            (EmbeddingSpec::MazurPower { gamma, .. }, GeometryPotential::PowerNorm { alpha, beta }) => {
                check_mazur_params(*alpha, *beta, *gamma)?;
            }
            (EmbeddingSpec::OrliczInverse { .. }, GeometryPotential::PowerNorm { alpha, beta }) => {
                if !(*beta > 0.0 && *beta < 1.0) {
                    return Err(Error::param(format!("beta must lie in (0, 1), got {beta}")));
                }
                if alpha != beta {
                    return Err(Error::param("the Orlicz geometry needs alpha = beta"));
                }
            }
            (EmbeddingSpec::SpinFactorSlice { norm }, GeometryPotential::Spec(spec)) => {
                match spec.family() {
                    Family::NormIntegral(ni) if ni.norm == *norm => {}
                    _ => {
                        return Err(Error::param(
                            "a spin-factor slice needs a norm-integral potential on the slice norm",
                        ))
                    }
                }
                let report = check_euler_legendre(spec, 16, 0)?;
                if !report.passed {
                    return Err(Error::Validation("slice potential fails the Euler–Legendre check".into()));
                }
            }
            _ => return Err(Error::param("potential does not pair with this embedding")),
        }
        let g = GeneralizedGeometry { embedding, potential };
        g.probe()?;
        Ok(g)
    }

    pub fn mazur(alpha: f64, beta: f64, gamma: f64, carrier: Carrier) -> Result<Self> {
        Self::new(EmbeddingSpec::MazurPower { gamma, carrier }, GeometryPotential::PowerNorm { alpha, beta })
    }

    /// Power geometry with `alpha = gamma (1 - gamma)` and `beta = gamma`.
    pub fn jencova(gamma: f64, carrier: Carrier) -> Result<Self> {
        Self::mazur(gamma * (1.0 - gamma), gamma, gamma, carrier)
    }

    pub fn orlicz(orlicz: OrliczFunction, weights: Vec<f64>, beta: f64) -> Result<Self> {
        Self::new(EmbeddingSpec::OrliczInverse { orlicz, weights }, GeometryPotential::PowerNorm { alpha: beta, beta })
    }

    pub fn spin_factor(norm: NormKind, potential: PotentialSpec) -> Result<Self> {
        Self::new(EmbeddingSpec::SpinFactorSlice { norm }, GeometryPotential::Spec(potential))
    }

    pub fn embedding(&self) -> &EmbeddingSpec {
        &self.embedding
    }

    pub fn potential(&self) -> &GeometryPotential {
        &self.potential
    }

    /// The image of a reference point of `Z` lies in the interior of the
    /// potential's domain.
    fn probe(&self) -> Result<()> {
        let z = match &self.embedding {
            EmbeddingSpec::MazurPower { carrier: Carrier::Vector, .. } => ZElement::Vector(vec![1.0, 1.0]),
            EmbeddingSpec::MazurPower { carrier: Carrier::Matrix, .. } => {
                ZElement::Matrix(HermitianMatrix::identity(2))
            }
            EmbeddingSpec::SpinFactorSlice { .. } => {
                let GeometryPotential::Spec(spec) = &self.potential else { unreachable!() };
                ZElement::Spin(SpinFactorElement::on_slice(vec![0.0; spec.dim()]))
            }
            EmbeddingSpec::OrliczInverse { weights, .. } => {
                let total: f64 = weights.iter().sum();
                ZElement::Vector(vec![1.0 / total; weights.len()])
            }
        };
        let d = pullback_div(self, &z, &z)?;
        if d.is_infinite() {
            return Err(Error::Validation("image of Z misses the interior of the potential's domain".into()));
        }
        Ok(())
    }

    /// The potential on an `n`-dimensional vector carrier (eigenvalues for
    /// matrices); not available for the Orlicz geometry, whose norm depends
    /// on the weights.
    pub fn carrier_potential(&self, n: usize) -> Result<PotentialSpec> {
        match (&self.embedding, &self.potential) {
            (EmbeddingSpec::MazurPower { gamma, .. }, GeometryPotential::PowerNorm { alpha, beta }) => {
                PotentialSpec::new(
                    Family::NormIntegral(NormIntegral {
                        profile: PhiProfile::Power { coef: 1.0 / alpha, exponent: 1.0 / beta - 1.0 },
                        norm: NormKind::PNorm(1.0 / gamma),
                    }),
                    n,
                )
            }
            (EmbeddingSpec::SpinFactorSlice { .. }, GeometryPotential::Spec(spec)) => {
                check_dim(spec.dim(), n)?;
                Ok(spec.clone())
            }
            _ => Err(Error::param("this geometry has no norm-integral carrier potential")),
        }
    }
}

/// `D_Psi(l(phi), l(psi))` through the generic Bregman construction on the
/// carrier.
pub fn pullback_div(geometry: &GeneralizedGeometry, phi: &ZElement, psi: &ZElement) -> Result<ExtendedReal> {
    let emb = &geometry.embedding;
    let u = emb.forward(phi)?;
    let v = emb.forward(psi)?;
    match (emb, u, v) {
        (EmbeddingSpec::MazurPower { .. }, ZElement::Vector(a), ZElement::Vector(b)) => {
            check_dim(a.len(), b.len())?;
            if b.iter().all(|t| *t == 0.0) {
                return Err(Error::domain("second argument must be nonzero"));
            }
            bregman_div(&geometry.carrier_potential(a.len())?, &a, &b)
        }
        (EmbeddingSpec::MazurPower { .. }, ZElement::Matrix(a), ZElement::Matrix(b)) => {
            check_dim(a.dim(), b.dim())?;
            if b.trace() <= 0.0 {
                return Err(Error::domain("second argument must be nonzero"));
            }
            matrix_div_generic::<Complex<f64>>(&geometry.carrier_potential(a.dim())?, &a, &b)
        }
        (EmbeddingSpec::SpinFactorSlice { .. }, ZElement::Vector(a), ZElement::Vector(b)) => {
            check_dim(a.len(), b.len())?;
            bregman_div(&geometry.carrier_potential(a.len())?, &a, &b)
        }
        (EmbeddingSpec::OrliczInverse { orlicz, weights }, ZElement::Vector(a), ZElement::Vector(b)) => {
            let GeometryPotential::PowerNorm { beta, .. } = geometry.potential else { unreachable!() };
            let psi = LuxemburgPower { phi: orlicz, mu: weights, beta };
            Ok(ExtendedReal::saturating(psi.divergence(&a, &b)?))
        }
        _ => Err(Error::domain("element does not match the carrier of the embedding")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedProjection {
    /// The projection as an element of `Z`.
    pub point: ZElement,
    /// The projection in carrier coordinates with solver diagnostics.
    pub embedded: ProjectionResult,
    /// Largest `|D(x, P) + D(P, psi) - D(x, psi)|` over probe points `x` of
    /// an affine set, for left projections.
    pub pythagoras_residual: Option<f64>,
}

/// Projection of `psi` onto the set whose image under `l` is `c` (given in
/// carrier coordinates), for vector carriers with a norm-integral potential.
pub fn generalized_project(
    geometry: &GeneralizedGeometry,
    c: &ConstraintSet,
    psi: &ZElement,
    side: Side,
) -> Result<GeneralizedProjection> {
    let emb = &geometry.embedding;
    let vector_carrier = matches!(
        emb,
        EmbeddingSpec::MazurPower { carrier: Carrier::Vector, .. } | EmbeddingSpec::SpinFactorSlice { .. }
    );
    if !vector_carrier {
        return Err(Error::param("projections need a vector carrier with a norm-integral potential"));
    }
    let ZElement::Vector(y) = emb.forward(psi)? else { unreachable!() };
    let spec = geometry.carrier_potential(y.len())?;
    let embedded = project(&spec, c, &y, side, &ProjectionOptions::default())?;
    let p = &embedded.point;
    let in_image = |x: &[f64]| match emb {
        EmbeddingSpec::MazurPower { .. } => x.iter().all(|t| *t >= -IMAGE_TOL),
        EmbeddingSpec::SpinFactorSlice { norm } => norm.norm(x) <= 1.0 + IMAGE_TOL,
        EmbeddingSpec::OrliczInverse { .. } => false,
    };
    if !in_image(p) {
        return Err(Error::domain("the projection leaves the image of Z"));
    }
    let clipped: Vec<f64> = match emb {
        EmbeddingSpec::MazurPower { .. } => p.iter().map(|t| t.max(0.0)).collect(),
        _ => {
            let EmbeddingSpec::SpinFactorSlice { norm } = emb else { unreachable!() };
            let r = norm.norm(p);
            if r > 1.0 {
                p.iter().map(|t| t / r).collect()
            } else {
                p.clone()
            }
        }
    };
    let point = emb.inverse(&ZElement::Vector(clipped))?;

    let pythagoras_residual = match (side, c.frame(), c.tangent_basis()) {
        (Side::Left, Frame::Primal, Some(basis)) => {
            let d = |a: &[f64], b: &[f64]| spec.divergence(a, b).raw();
            let mut worst = 0.0f64;
            for k in 0..basis.ncols() {
                let dir = basis.column(k);
                let mut s = 0.25;
                let x = loop {
                    let x: Vec<f64> = p.iter().zip(dir.iter()).map(|(a, b)| a + s * b).collect();
                    if in_image(&x) && spec.in_interior(&x) || s < 1e-8 {
                        break x;
                    }
                    s *= 0.5;
                };
                worst = worst.max((d(&x, p) + d(p, &y) - d(&x, &y)).abs());
            }
            Some(worst)
        }
        _ => None,
    };
    Ok(GeneralizedProjection { point, embedded, pythagoras_residual })
}
