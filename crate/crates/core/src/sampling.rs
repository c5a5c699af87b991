//! Seeded generators for test points, constraint sets and random matrices.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bregman::{ConstraintKind, ConstraintSet};
use crate::potentials::{Family, PotentialSpec};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Range used for each coordinate of interior samples.
pub fn interior_range(spec: &PotentialSpec) -> (f64, f64) {
    match spec.family() {
        Family::NegEntropy | Family::Burg | Family::AlphaPower { .. } => (0.05, 3.0),
        Family::FermiDirac => (0.02, 0.98),
        Family::GammaNorm { .. } | Family::ExpSum | Family::NormIntegral(_) => (-2.0, 2.0),
    }
}

/// A point well inside the interior of the effective domain.
pub fn interior_point<R: Rng>(spec: &PotentialSpec, rng: &mut R) -> Vec<f64> {
    let (lo, hi) = interior_range(spec);
    (0..spec.dim()).map(|_| rng.random_range(lo..hi)).collect()
}

/// A point well inside the interior of the conjugate's effective domain.
pub fn conjugate_interior_point<R: Rng>(spec: &PotentialSpec, rng: &mut R) -> Vec<f64> {
    let (lo, hi) = match spec.family() {
        Family::Burg | Family::AlphaPower { .. } => (f64::NEG_INFINITY, 0.0),
        Family::ExpSum => (0.0, f64::INFINITY),
        _ => (f64::NEG_INFINITY, f64::INFINITY),
    };
    (0..spec.dim())
        .map(|_| {
            if lo.is_finite() {
                lo + rng.random_range(0.05..5.0)
            } else if hi.is_finite() {
                hi - rng.random_range(0.05..5.0)
            } else {
                rng.random_range(-3.0..3.0)
            }
        })
        .collect()
}

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn gaussian_vector<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

/// Haar-like random unitary from the QR factorization of a complex Gaussian
/// matrix, with the phases of `R`'s diagonal absorbed into `Q`.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> DMatrix<Complex<f64>> {
    let g = DMatrix::from_fn(n, n, |_, _| Complex::new(gaussian(rng), gaussian(rng)));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / Complex::new(d.norm(), 0.0) } else { Complex::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random real orthogonal matrix.
pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// `U diag(lambda) U*` with eigenvalues drawn from `range`.
pub fn hermitian_with_spectrum<R: Rng>(n: usize, range: (f64, f64), rng: &mut R) -> DMatrix<Complex<f64>> {
    let u = random_unitary(n, rng);
    let lam = DVector::from_fn(n, |_, _| Complex::new(rng.random_range(range.0..range.1), 0.0));
    let m = &u * DMatrix::from_diagonal(&lam) * u.adjoint();
    (&m + m.adjoint()) * Complex::new(0.5, 0.0)
}

/// Real symmetric analogue of [`hermitian_with_spectrum`].
pub fn symmetric_with_spectrum<R: Rng>(n: usize, range: (f64, f64), rng: &mut R) -> DMatrix<f64> {
    let q = random_orthogonal(n, rng);
    let lam = DVector::from_fn(n, |_, _| rng.random_range(range.0..range.1));
    let m = &q * DMatrix::from_diagonal(&lam) * q.transpose();
    (&m + m.transpose()) * 0.5
}

/// Random Hermitian direction with unit Frobenius norm.
pub fn hermitian_direction<R: Rng>(n: usize, rng: &mut R) -> DMatrix<Complex<f64>> {
    let g = DMatrix::from_fn(n, n, |_, _| Complex::new(gaussian(rng), gaussian(rng)));
    let h = (&g + g.adjoint()) * Complex::new(0.5, 0.0);
    let nrm = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    h / Complex::new(nrm, 0.0)
}

/// A box strictly inside the sampling range of `spec`, with its center.
pub fn random_box_inside<R: Rng>(spec: &PotentialSpec, rng: &mut R) -> (ConstraintSet, Vec<f64>) {
    let (lo, hi) = interior_range(spec);
    let width = hi - lo;
    let mut l = Vec::with_capacity(spec.dim());
    let mut h = Vec::with_capacity(spec.dim());
    for _ in 0..spec.dim() {
        let a = rng.random_range(lo..hi - 0.2 * width);
        let b = rng.random_range(a + 0.1 * width..a + 0.2 * width);
        l.push(a);
        h.push(b.min(hi));
    }
    let center = l.iter().zip(&h).map(|(a, b)| 0.5 * (a + b)).collect();
    (ConstraintSet::boxed(l, h).expect("ordered box"), center)
}

/// Uniform point of a box constraint set.
pub fn point_in_box<R: Rng>(c: &ConstraintSet, rng: &mut R) -> Vec<f64> {
    match c.kind() {
        ConstraintKind::Box { lo, hi } => {
            lo.iter().zip(hi).map(|(a, b)| if a < b { rng.random_range(*a..*b) } else { *a }).collect()
        }
        _ => panic!("point_in_box needs a box constraint"),
    }
}

/// A random affine set of codimension `m` through an interior point, with
/// that point.
pub fn random_affine_through<R: Rng>(spec: &PotentialSpec, m: usize, rng: &mut R) -> (ConstraintSet, Vec<f64>) {
    let n = spec.dim();
    let x0 = interior_point(spec, rng);
    loop {
        let a = DMatrix::from_fn(m, n, |_, _| gaussian(rng));
        let b = &a * DVector::from_column_slice(&x0);
        if let Ok(c) = ConstraintSet::affine(a, b) {
            return (c, x0);
        }
    }
}

/// A random point of the affine set `c` near `x0`, inside the sampling range.
pub fn affine_feasible_point<R: Rng>(spec: &PotentialSpec, c: &ConstraintSet, x0: &[f64], rng: &mut R) -> Vec<f64> {
    let (lo, hi) = interior_range(spec);
    let basis = c.tangent_basis().expect("affine constraint set");
    if basis.ncols() == 0 {
        return x0.to_vec();
    }
    let w = DVector::from_fn(basis.ncols(), |_, _| gaussian(rng));
    let dir = &basis * w;
    let mut t = 0.5 * (hi - lo);
    loop {
        let x: Vec<f64> = x0.iter().zip(dir.iter()).map(|(a, d)| a + t * d).collect();
        if x.iter().all(|v| *v > lo && *v < hi) {
            return x;
        }
        t *= 0.5;
    }
}
