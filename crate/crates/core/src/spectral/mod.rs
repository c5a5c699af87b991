//! Hermitian matrices and spectral calculus.
//!
//! Matrices are dense and generic over [`Scalar`], implemented for `f64`
//! (real symmetric) and `Complex<f64>` (complex Hermitian). Matrix functions
//! are evaluated through the eigendecomposition `U diag f(lambda) U*`.

mod divergence;

use std::fmt;

use nalgebra::{Complex, ComplexField, DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::Tolerances;
use crate::error::{check_dim, Error, Result};
use crate::extended::ExtendedReal;
use crate::potentials::{Potential, PotentialSpec};

pub use divergence::{logdet_congruence_form, matrix_div, matrix_div_generic, MatrixFamily};

/// Scalar field of a [`HermitianMatrix`].
pub trait Scalar: ComplexField<RealField = f64> + Copy + fmt::Debug {
    /// Builds a scalar from real and imaginary parts; `None` when the field
    /// cannot represent a nonzero imaginary part.
    fn from_parts(re: f64, im: f64) -> Option<Self>;
    fn re_part(self) -> f64;
    fn im_part(self) -> f64;
}

impl Scalar for f64 {
    fn from_parts(re: f64, im: f64) -> Option<Self> {
        (im == 0.0).then_some(re)
    }
    fn re_part(self) -> f64 {
        self
    }
    fn im_part(self) -> f64 {
        0.0
    }
}

impl Scalar for Complex<f64> {
    fn from_parts(re: f64, im: f64) -> Option<Self> {
        Some(Complex::new(re, im))
    }
    fn re_part(self) -> f64 {
        self.re
    }
    fn im_part(self) -> f64 {
        self.im
    }
}

/// Dense Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T: Scalar = Complex<f64>> {
    data: DMatrix<T>,
    correction: f64,
}

pub type RealSymmetric = HermitianMatrix<f64>;

impl<T: Scalar> HermitianMatrix<T> {
    /// Accepts a square matrix within `1e-12` (relative to its largest entry)
    /// of being Hermitian and stores `(X + X*)/2`.
    pub fn new(m: DMatrix<T>) -> Result<Self> {
        Self::with_tolerance(m, Tolerances::DEFAULT.hermitian)
    }

    pub fn with_tolerance(m: DMatrix<T>, tol: f64) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::Validation(format!(
                "matrix must be square and nonempty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.re_part().is_finite() || !v.im_part().is_finite()) {
            return Err(Error::Validation("matrix entries must be finite".into()));
        }
        let adj = m.adjoint();
        let asym = max_modulus(&(&m - &adj));
        let scale = max_modulus(&m).max(1.0);
        if asym > tol * scale {
            return Err(Error::Validation(format!("matrix is not Hermitian: max |X - X*| = {asym:e}")));
        }
        let half = T::from_real(0.5);
        let data = (&m + &adj) * half;
        Ok(HermitianMatrix { data, correction: asym * 0.5 })
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let v = DVector::from_iterator(d.len(), d.iter().map(|x| T::from_real(*x)));
        HermitianMatrix { data: DMatrix::from_diagonal(&v), correction: 0.0 }
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix { data: DMatrix::identity(n, n), correction: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.data
    }

    /// Largest entry change made by the symmetrization at construction.
    pub fn correction(&self) -> f64 {
        self.correction
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.data[(i, i)].re_part()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.modulus_squared()).sum::<f64>().sqrt()
    }

    pub fn eigen(&self) -> Result<EigenDecomposition<T>> {
        eigen_nonincreasing(self)
    }

    pub fn positivity(&self) -> Result<PositivityClass> {
        Ok(PositivityClass::of(&self.eigen()?.eigenvalues, Tolerances::DEFAULT.spectral))
    }

    /// `U diag f(lambda) U*`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Ok(self.eigen()?.reassemble(f))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(HermitianMatrix { data: &self.data + &other.data, correction: 0.0 })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(HermitianMatrix { data: &self.data - &other.data, correction: 0.0 })
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianMatrix { data: &self.data * T::from_real(s), correction: 0.0 }
    }

    /// `V X V*` for a unitary (or any square) `V`.
    pub fn congruence(&self, v: &DMatrix<T>) -> Result<Self> {
        check_dim(self.dim(), v.ncols())?;
        HermitianMatrix::with_tolerance(v * &self.data * v.adjoint(), 1e-9)
    }
}

/// Frobenius inner product `Re tr(A B)`.
pub fn trace_product<T: Scalar>(a: &HermitianMatrix<T>, b: &HermitianMatrix<T>) -> Result<f64> {
    check_dim(a.dim(), b.dim())?;
    Ok(re_trace_product(a.matrix(), b.matrix()))
}

pub(crate) fn re_trace_product<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (a[(i, j)] * b[(j, i)]).re_part();
        }
    }
    s
}

fn max_modulus<T: Scalar>(m: &DMatrix<T>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.modulus()))
}

/// Eigenvalues in nonincreasing order with the matching unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition<T: Scalar = Complex<f64>> {
    pub eigenvalues: DVector<f64>,
    pub vectors: DMatrix<T>,
}

impl<T: Scalar> EigenDecomposition<T> {
    pub fn reassemble(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix<T> {
        let d = DVector::from_iterator(self.eigenvalues.len(), self.eigenvalues.iter().map(|l| T::from_real(f(*l))));
        let u = &self.vectors;
        let m = u * DMatrix::from_diagonal(&d) * u.adjoint();
        let adj = m.adjoint();
        HermitianMatrix { data: (&m + &adj) * T::from_real(0.5), correction: 0.0 }
    }
}

/// Eigendecomposition with eigenvalues sorted nonincreasingly (stable, so
/// ties keep the solver's order) and each eigenvector scaled so that its
/// largest-modulus component is real and positive.
pub fn eigen_nonincreasing<T: Scalar>(x: &HermitianMatrix<T>) -> Result<EigenDecomposition<T>> {
    let n = x.dim();
    let eig = x
        .data
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).into_owned();
        let mut best = 0;
        let mut best_mod = -1.0;
        for r in 0..n {
            let m = col[r].modulus();
            // strict improvement beyond roundoff keeps the choice stable
            if m > best_mod * (1.0 + 1e-12) {
                best = r;
                best_mod = m;
            }
        }
        let c = col[best];
        if best_mod > 0.0 {
            let phase = c.conjugate() * T::from_real(1.0 / best_mod);
            col *= phase;
        }
        vectors.set_column(k, &col);
    }
    let dec = EigenDecomposition { eigenvalues, vectors };
    check_decomposition(x, &dec)?;
    Ok(dec)
}

fn check_decomposition<T: Scalar>(x: &HermitianMatrix<T>, dec: &EigenDecomposition<T>) -> Result<()> {
    let n = x.dim();
    let u = &dec.vectors;
    let orth = (u.adjoint() * u - DMatrix::<T>::identity(n, n)).iter().map(|v| v.modulus_squared()).sum::<f64>().sqrt();
    let rec = dec.reassemble(|l| l);
    let err = (rec.data - &x.data).iter().map(|v| v.modulus_squared()).sum::<f64>().sqrt();
    let scale = x.frobenius_norm();
    if orth > 1e-10 || err > 1e-10 * scale.max(f64::MIN_POSITIVE) && err > 1e-300 {
        return Err(Error::Numeric(format!(
            "eigendecomposition check failed: orthogonality {orth:e}, reconstruction {err:e}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositivityClass {
    StrictlyPositive,
    PositiveSemidefinite,
    Indefinite,
}

impl PositivityClass {
    /// Classifies a spectrum sorted nonincreasingly.
    pub fn of(eigenvalues: &DVector<f64>, threshold: f64) -> Self {
        let min = eigenvalues.iter().fold(f64::INFINITY, |a, b| a.min(*b));
        if min > threshold {
            PositivityClass::StrictlyPositive
        } else if min >= -threshold {
            PositivityClass::PositiveSemidefinite
        } else {
            PositivityClass::Indefinite
        }
    }
}

/// `Phi(lambda(X))`, `+inf` when the spectrum leaves the domain.
pub fn spectral_potential_eval<T: Scalar>(spec: &PotentialSpec, x: &HermitianMatrix<T>) -> Result<ExtendedReal> {
    check_dim(spec.dim(), x.dim())?;
    let dec = x.eigen()?;
    Ok(spec.value(dec.eigenvalues.as_slice()))
}

/// `U diag(grad Phi(lambda)) U*`.
pub fn spectral_grad<T: Scalar>(spec: &PotentialSpec, x: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
    check_dim(spec.dim(), x.dim())?;
    let dec = x.eigen()?;
    let g = spec.gradient(dec.eigenvalues.as_slice())?;
    let d = DVector::from_iterator(g.len(), g.iter().map(|v| T::from_real(*v)));
    let u = &dec.vectors;
    let m = u * DMatrix::from_diagonal(&d) * u.adjoint();
    let adj = m.adjoint();
    Ok(HermitianMatrix { data: (&m + &adj) * T::from_real(0.5), correction: 0.0 })
}

// ---------------------------------------------------------------------------
// JSON: {"re": [[...]], "im": [[...]]}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMatrix {
    re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Vec<Vec<f64>>>,
}

impl<T: Scalar> TryFrom<RawMatrix> for HermitianMatrix<T> {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        let n = raw.re.len();
        let square = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if !square(&raw.re) || raw.im.as_ref().is_some_and(|im| !square(im)) {
            return Err(Error::Validation("matrix rows must form a square array".into()));
        }
        let mut data = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let im = raw.im.as_ref().map_or(0.0, |m| m[i][j]);
                data[(i, j)] = T::from_parts(raw.re[i][j], im)
                    .ok_or_else(|| Error::Validation("imaginary parts are not allowed for a real matrix".into()))?;
            }
        }
        HermitianMatrix::new(data)
    }
}

impl<T: Scalar> Serialize for HermitianMatrix<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let re = (0..n).map(|i| (0..n).map(|j| self.data[(i, j)].re_part()).collect()).collect();
        let has_im = self.data.iter().any(|v| v.im_part() != 0.0);
        let im = has_im.then(|| (0..n).map(|i| (0..n).map(|j| self.data[(i, j)].im_part()).collect()).collect());
        RawMatrix { re, im }.serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for HermitianMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        HermitianMatrix::try_from(RawMatrix::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests;
