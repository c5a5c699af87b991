//! Seeded fixtures shared by the benchmarks.

use bregman_core::bregman::ConstraintSet;
use bregman_core::sampling::{hermitian_with_spectrum, interior_point, random_affine_through, random_box_inside, rng};
use bregman_core::spectral::HermitianMatrix;
use bregman_core::PotentialSpec;

/// `count` pairs of interior points of `spec`.
pub fn vector_pairs(spec: &PotentialSpec, count: usize, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut r = rng(seed);
    (0..count).map(|_| (interior_point(spec, &mut r), interior_point(spec, &mut r))).collect()
}

/// Pair of `n x n` Hermitian matrices with spectra in `range`.
pub fn matrix_pair(n: usize, range: (f64, f64), seed: u64) -> (HermitianMatrix, HermitianMatrix) {
    let mut r = rng(seed);
    let a = HermitianMatrix::new(hermitian_with_spectrum(n, range, &mut r)).expect("hermitian");
    let b = HermitianMatrix::new(hermitian_with_spectrum(n, range, &mut r)).expect("hermitian");
    (a, b)
}

/// Projection problem: a point, an affine set of codimension 1 and a box.
pub struct ProjectionFixture {
    pub y: Vec<f64>,
    pub affine: ConstraintSet,
    pub boxed: ConstraintSet,
}

pub fn projection_fixture(spec: &PotentialSpec, seed: u64) -> ProjectionFixture {
    let mut r = rng(seed);
    let y = interior_point(spec, &mut r);
    let (affine, _) = random_affine_through(spec, 1, &mut r);
    let (boxed, _) = random_box_inside(spec, &mut r);
    ProjectionFixture { y, affine, boxed }
}
