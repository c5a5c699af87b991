//! Metric and dual connections induced by a divergence.
//!
//! For a divergence `D(u, v)` on a coordinate patch:
//!
//! - `g_ij = d_i d_j^u D(u, p)` at `u = p`;
//! - `Gamma_ijk = -d_i d_j^u d_k^v D(u, v)` at `u = v = p`;
//! - `Gamma~_ijk = -d_k^u d_i d_j^v D(u, v)` at `u = v = p`.
//!
//! These satisfy `d_i g_jk = Gamma_ijk + Gamma~_ikj`. For a Bregman
//! divergence `Gamma` vanishes in the primal coordinates `theta`, and
//! `Gamma~` vanishes in the dual coordinates `eta = grad Psi(theta)`.
//!
//! All derivatives are central differences with step
//! `h = 1e-4 (1 + |p_i|)` and one Richardson extrapolation. Tensors are
//! flattened row-major: `Gamma[i][j][k]` sits at `(i n + j) n + k`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bregman::{left_project, ConstraintSet};
use crate::config::Tolerances;
use crate::error::{check_dim, Error, Result};
use crate::potentials::{grad_conjugate, grad_potential, hess_potential, Potential, PotentialSpec};
use crate::sampling::rng;

/// A divergence `D(u, v)` on an open patch of `R^n`.
pub trait DivergenceField {
    fn dim(&self) -> usize;

    fn eval(&self, u: &[f64], v: &[f64]) -> f64;
}

/// A divergence given by a closure.
pub struct FnField<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64], &[f64]) -> f64> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnField { dim, f }
    }
}

impl<F: Fn(&[f64], &[f64]) -> f64> DivergenceField for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, u: &[f64], v: &[f64]) -> f64 {
        (self.f)(u, v)
    }
}

/// `D_Psi` in the primal coordinates `theta`.
pub struct BregmanField<'a>(pub &'a PotentialSpec);

impl DivergenceField for BregmanField<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, u: &[f64], v: &[f64]) -> f64 {
        self.0.divergence(u, v).raw()
    }
}

/// `D_Psi(grad Psi*(a), grad Psi*(b))`: the same divergence written in the
/// dual coordinates `eta`.
pub struct DualBregmanField<'a>(pub &'a PotentialSpec);

impl DivergenceField for DualBregmanField<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match (grad_conjugate(self.0, a), grad_conjugate(self.0, b)) {
            (Ok(x), Ok(y)) => self.0.divergence(&x, &y).raw(),
            _ => f64::NAN,
        }
    }
}

/// `D~(u, v) = D(v, u)`.
pub struct SwappedField<'a, F: ?Sized>(pub &'a F);

impl<F: DivergenceField + ?Sized> DivergenceField for SwappedField<'_, F> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, u: &[f64], v: &[f64]) -> f64 {
        self.0.eval(v, u)
    }
}

fn base_steps(p: &[f64]) -> Vec<f64> {
    let h = Tolerances::DEFAULT.fd_step;
    p.iter().map(|x| h * (1.0 + x.abs())).collect()
}

/// A differentiation direction: coordinate `index` of the first (`u`) or
/// second (`v`) argument.
#[derive(Clone, Copy)]
struct Dir {
    second: bool,
    index: usize,
}

/// Nested central differences of `D(u, v)` along `dirs` at `(u, v)`.
fn central<F: DivergenceField + ?Sized>(
    field: &F,
    u: &mut Vec<f64>,
    v: &mut Vec<f64>,
    dirs: &[Dir],
    steps: &[f64],
) -> f64 {
    let Some((d, rest)) = dirs.split_first() else {
        return field.eval(u, v);
    };
    let h = steps[d.index];
    let target = if d.second { &mut *v } else { &mut *u };
    let orig = target[d.index];
    target[d.index] = orig + h;
    let plus = central(field, u, v, rest, steps);
    let target = if d.second { &mut *v } else { &mut *u };
    target[d.index] = orig - h;
    let minus = central(field, u, v, rest, steps);
    let target = if d.second { &mut *v } else { &mut *u };
    target[d.index] = orig;
    (plus - minus) / (2.0 * h)
}

/// Richardson-extrapolated derivative along `dirs` at `u = v = p`.
fn derivative<F: DivergenceField + ?Sized>(field: &F, p: &[f64], dirs: &[Dir]) -> f64 {
    let steps = base_steps(p);
    let half: Vec<f64> = steps.iter().map(|h| 0.5 * h).collect();
    let mut u = p.to_vec();
    let mut v = p.to_vec();
    let coarse = central(field, &mut u, &mut v, dirs, &steps);
    let fine = central(field, &mut u, &mut v, dirs, &half);
    (4.0 * fine - coarse) / 3.0
}

fn u(index: usize) -> Dir {
    Dir { second: false, index }
}

fn v(index: usize) -> Dir {
    Dir { second: true, index }
}

fn check_point<F: DivergenceField + ?Sized>(field: &F, p: &[f64]) -> Result<()> {
    check_dim(field.dim(), p.len())?;
    if !field.eval(p, p).is_finite() {
        return Err(Error::domain("point lies outside the patch of the divergence"));
    }
    Ok(())
}

/// `g_ij = d_i d_j^u D(u, p)` at `u = p`, symmetrized.
pub fn metric_from_divergence<F: DivergenceField + ?Sized>(field: &F, p: &[f64]) -> Result<DMatrix<f64>> {
    check_point(field, p)?;
    let n = p.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let d = derivative(field, p, &[u(i), u(j)]);
            g[(i, j)] = d;
            g[(j, i)] = d;
        }
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("metric is not finite at this point".into()));
    }
    let min = g.clone().symmetric_eigen().eigenvalues.min();
    if min <= 1e-10 {
        return Err(Error::Numeric(format!("degenerate metric: smallest eigenvalue {min:e}")));
    }
    Ok(g)
}

/// `(Gamma, Gamma~)` flattened row-major.
pub fn connections_from_divergence<F: DivergenceField + ?Sized>(field: &F, p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_point(field, p)?;
    let n = p.len();
    let mut gamma = vec![0.0; n * n * n];
    let mut dual = vec![0.0; n * n * n];
    for i in 0..n {
        for j in i..n {
            for k in 0..n {
                let a = -derivative(field, p, &[u(i), u(j), v(k)]);
                let b = -derivative(field, p, &[u(k), v(i), v(j)]);
                // symmetric in (i, j) by construction
                gamma[(i * n + j) * n + k] = a;
                gamma[(j * n + i) * n + k] = a;
                dual[(i * n + j) * n + k] = b;
                dual[(j * n + i) * n + k] = b;
            }
        }
    }
    if gamma.iter().chain(&dual).any(|x| !x.is_finite()) {
        return Err(Error::Numeric("connection coefficients are not finite at this point".into()));
    }
    Ok((gamma, dual))
}

/// Largest `|D(p, p)|` and `|d^u D(u, p)|` at `u = p`.
pub fn diagonal_residual<F: DivergenceField + ?Sized>(field: &F, p: &[f64]) -> Result<f64> {
    check_point(field, p)?;
    let mut r = field.eval(p, p).abs();
    for i in 0..p.len() {
        r = r.max(derivative(field, p, &[u(i)]).abs());
    }
    Ok(r)
}

/// Largest `|d_i g_jk - Gamma_ijk - Gamma~_ikj|` over `trials` seeded index
/// triples (all triples when `trials >= n^3`).
pub fn norden_sen_check<F: DivergenceField + ?Sized>(field: &F, p: &[f64], trials: usize, seed: u64) -> Result<f64> {
    let n = p.len();
    let (gamma, dual) = connections_from_divergence(field, p)?;
    let triples: Vec<(usize, usize, usize)> = if trials >= n * n * n {
        (0..n * n * n).map(|t| (t / (n * n), (t / n) % n, t % n)).collect()
    } else {
        let mut r = rng(seed);
        (0..trials).map(|_| (r.random_range(0..n), r.random_range(0..n), r.random_range(0..n))).collect()
    };
    let steps = base_steps(p);
    let metric_at = |i: usize, s: f64| -> Result<DMatrix<f64>> {
        let mut q = p.to_vec();
        q[i] += s;
        metric_from_divergence(field, &q)
    };
    let mut dg = vec![None; n];
    let mut worst = 0.0f64;
    for (i, j, k) in triples {
        if dg[i].is_none() {
            let h = steps[i];
            let d1 = (metric_at(i, h)? - metric_at(i, -h)?) / (2.0 * h);
            let d2 = (metric_at(i, 2.0 * h)? - metric_at(i, -2.0 * h)?) / (4.0 * h);
            dg[i] = Some((d1 * 4.0 - d2) / 3.0);
        }
        let dgi = dg[i].as_ref().expect("filled above");
        let r = dgi[(j, k)] - gamma[(i * n + j) * n + k] - dual[(i * n + k) * n + j];
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// `eta = grad Psi(theta)`.
pub fn dual_coordinates(spec: &PotentialSpec, theta: &[f64]) -> Result<Vec<f64>> {
    grad_potential(spec, theta)
}

/// `theta = grad Psi*(eta)`.
pub fn primal_coordinates(spec: &PotentialSpec, eta: &[f64]) -> Result<Vec<f64>> {
    grad_conjugate(spec, eta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    /// Largest `|Gamma_ijk|` in `theta` coordinates.
    pub primal: f64,
    /// Largest `|Gamma~_ijk|` in `eta` coordinates.
    pub dual: f64,
}

impl FlatnessReport {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual)
    }
}

pub fn flatness_check(spec: &PotentialSpec, points: &[Vec<f64>]) -> Result<FlatnessReport> {
    let mut rep = FlatnessReport { primal: 0.0, dual: 0.0 };
    for theta in points {
        let (g, _) = connections_from_divergence(&BregmanField(spec), theta)?;
        let eta = dual_coordinates(spec, theta)?;
        let (_, gd) = connections_from_divergence(&DualBregmanField(spec), &eta)?;
        rep.primal = g.iter().fold(rep.primal, |m, x| m.max(x.abs()));
        rep.dual = gd.iter().fold(rep.dual, |m, x| m.max(x.abs()));
    }
    Ok(rep)
}

/// Largest normalized `g(P)(c, t)` over a tangent basis `t` of the affine set
/// `C`, where `c` is the direction at `P` of the straight `eta`-segment from
/// the left projection `P` of `y` to `y`. Zero when `y` lies in `C`.
pub fn orthogonality_check(spec: &PotentialSpec, c: &ConstraintSet, y: &[f64]) -> Result<f64> {
    let basis = c.tangent_basis().ok_or_else(|| Error::param("orthogonality needs an affine constraint set"))?;
    let p = left_project(spec, c, y)?.point;
    let chord_eta = DVector::from_vec(grad_potential(spec, y)?) - DVector::from_vec(grad_potential(spec, &p)?);
    if chord_eta.norm() <= 1e-14 {
        return Ok(0.0);
    }
    let g = hess_potential(spec, &p)?;
    let chord =
        g.clone().lu().solve(&chord_eta).ok_or_else(|| Error::Numeric("singular metric at the projection".into()))?;
    let chord_norm = chord.dot(&(&g * &chord)).sqrt();
    let mut worst = 0.0f64;
    for t in basis.column_iter() {
        let gt = &g * t;
        let cos = chord.dot(&gt) / (chord_norm * t.dot(&gt).sqrt());
        worst = worst.max(cos.abs());
    }
    Ok(worst)
}

/// Metric, connections and residuals of a divergence at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub point: Vec<f64>,
    /// Row-major `n x n`.
    pub metric: Vec<f64>,
    /// Row-major `Gamma[i][j][k]`.
    pub gamma: Vec<f64>,
    /// Row-major `Gamma~[i][j][k]`.
    pub gamma_dual: Vec<f64>,
    pub norden_sen_residual: f64,
    /// Largest `|Gamma_ijk|` in the given coordinates; for a potential also
    /// the largest `|Gamma~_ijk|` in its dual coordinates.
    pub flatness_residual: f64,
}

pub fn geometry_report<F: DivergenceField + ?Sized>(field: &F, p: &[f64], seed: u64) -> Result<GeometryReport> {
    let n = p.len();
    let metric = metric_from_divergence(field, p)?;
    let (gamma, gamma_dual) = connections_from_divergence(field, p)?;
    let norden_sen_residual = norden_sen_check(field, p, n * n * n, seed)?;
    let flatness_residual = gamma.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(GeometryReport {
        point: p.to_vec(),
        metric: metric.transpose().as_slice().to_vec(),
        gamma,
        gamma_dual,
        norden_sen_residual,
        flatness_residual,
    })
}

/// [`geometry_report`] of `D_Psi` in `theta` coordinates, with flatness
/// measured on both sides of the coordinate pair.
pub fn potential_geometry_report(spec: &PotentialSpec, theta: &[f64], seed: u64) -> Result<GeometryReport> {
    let mut rep = geometry_report(&BregmanField(spec), theta, seed)?;
    rep.flatness_residual = flatness_check(spec, &[theta.to_vec()])?.max();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bregman::pythagoras_check;
    use crate::bregman::Side;
    use crate::sampling::{affine_feasible_point, interior_point, random_affine_through};

    fn quadratic(n: usize) -> FnField<impl Fn(&[f64], &[f64]) -> f64> {
        FnField::new(n, |a: &[f64], b: &[f64]| 0.5 * a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>())
    }

    fn flat_families(n: usize) -> Vec<PotentialSpec> {
        vec![
            PotentialSpec::neg_entropy(n),
            PotentialSpec::burg(n),
            PotentialSpec::gamma_norm(0.5, n).unwrap(),
            PotentialSpec::gamma_norm(0.4, n).unwrap(),
            PotentialSpec::exp_sum(n),
        ]
    }

    #[test]
    fn metric_examples() {
        let g = metric_from_divergence(&quadratic(3), &[0.3, -1.0, 2.0]).unwrap();
        assert!((g - DMatrix::identity(3, 3)).amax() < 1e-8);
        let ne = PotentialSpec::neg_entropy(1);
        let g = metric_from_divergence(&BregmanField(&ne), &[0.5]).unwrap();
        assert!((g[(0, 0)] - 2.0).abs() < 1e-6);
        let b = PotentialSpec::burg(1);
        let g = metric_from_divergence(&BregmanField(&b), &[2.0]).unwrap();
        assert!((g[(0, 0)] - 0.25).abs() < 1e-7);
        let degenerate = FnField::new(2, |a: &[f64], b: &[f64]| (a[0] - b[0]).powi(2));
        assert!(matches!(metric_from_divergence(&degenerate, &[0.0, 0.0]), Err(Error::Numeric(_))));
        assert!(metric_from_divergence(&BregmanField(&b), &[-1.0]).is_err());
    }

    #[test]
    fn connection_examples() {
        let (g, d) = connections_from_divergence(&quadratic(2), &[0.4, 0.1]).unwrap();
        assert!(g.iter().chain(&d).all(|x| x.abs() < 1e-6));
        let e = PotentialSpec::exp_sum(2);
        let theta = [0.3, -0.5];
        let (g, d) = connections_from_divergence(&BregmanField(&e), &theta).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let idx = (i * 2 + j) * 2 + k;
                    let expect = if i == j && j == k { theta[i].exp() } else { 0.0 };
                    assert!(g[idx].abs() < 1e-3);
                    assert!((d[idx] - expect).abs() < 1e-3);
                }
            }
        }
    }

    #[test]
    fn swapping_arguments_swaps_connections() {
        let b = PotentialSpec::burg(2);
        let field = BregmanField(&b);
        let p = [0.8, 1.3];
        let (g, d) = connections_from_divergence(&field, &p).unwrap();
        let (gs, ds) = connections_from_divergence(&SwappedField(&field), &p).unwrap();
        for k in 0..g.len() {
            assert!((g[k] - ds[k]).abs() < 1e-4);
            assert!((d[k] - gs[k]).abs() < 1e-4);
        }
    }

    #[test]
    fn torsion_free_and_diagonal() {
        let ne = PotentialSpec::neg_entropy(3);
        let p = [0.3, 0.6, 0.45];
        let (g, d) = connections_from_divergence(&BregmanField(&ne), &p).unwrap();
        let n = 3;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    assert_eq!(g[(i * n + j) * n + k], g[(j * n + i) * n + k]);
                    assert_eq!(d[(i * n + j) * n + k], d[(j * n + i) * n + k]);
                }
            }
        }
        for spec in flat_families(3) {
            let mut r = rng(2);
            let x = interior_point(&spec, &mut r);
            assert!(diagonal_residual(&BregmanField(&spec), &x).unwrap() < 1e-6);
        }
    }

    #[test]
    fn norden_sen_examples() {
        assert!(norden_sen_check(&quadratic(2), &[0.1, 0.2], 8, 0).unwrap() < 1e-8);
        let ne = PotentialSpec::neg_entropy(2);
        assert!(norden_sen_check(&BregmanField(&ne), &[0.2, 0.8], 8, 0).unwrap() < 5e-3);
        let b = PotentialSpec::burg(2);
        assert!(norden_sen_check(&BregmanField(&b), &[1.0, 1.0], 8, 0).unwrap() < 5e-3);
        let fd = PotentialSpec::fermi_dirac(2);
        assert!(norden_sen_check(&BregmanField(&fd), &[0.3, 0.6], 8, 0).unwrap() < 5e-3);
        // a non-Bregman divergence still satisfies the identity
        let f = FnField::new(2, |a: &[f64], b: &[f64]| {
            a.iter().zip(b).map(|(x, y)| (x.exp() - y.exp()).powi(2) * (1.0 + y * y)).sum::<f64>()
        });
        assert!(norden_sen_check(&f, &[0.2, -0.3], 8, 0).unwrap() < 5e-3);
    }

    #[test]
    fn dual_coordinate_examples() {
        let g = PotentialSpec::gamma_norm(0.5, 2).unwrap();
        assert_eq!(dual_coordinates(&g, &[0.3, -1.2]).unwrap(), vec![0.3, -1.2]);
        assert_eq!(dual_coordinates(&PotentialSpec::neg_entropy(1), &[1.0]).unwrap(), vec![0.0]);
        assert_eq!(dual_coordinates(&PotentialSpec::exp_sum(2), &[0.0, 0.0]).unwrap(), vec![1.0, 1.0]);
        assert!(dual_coordinates(&PotentialSpec::burg(1), &[-1.0]).is_err());
        for spec in flat_families(3) {
            let mut r = rng(4);
            let x = interior_point(&spec, &mut r);
            let back = primal_coordinates(&spec, &dual_coordinates(&spec, &x).unwrap()).unwrap();
            assert!(crate::numeric::max_abs_diff(&x, &back) < 1e-8);
        }
    }

    #[test]
    fn bregman_fields_are_dually_flat() {
        let grid = |lo: f64, hi: f64| -> Vec<Vec<f64>> {
            let t = |k: usize| lo + (hi - lo) * k as f64 / 3.0;
            (0..4).flat_map(|a| (0..4).map(move |b| vec![t(a), t(b)])).collect()
        };
        let ne = flatness_check(&PotentialSpec::neg_entropy(2), &grid(0.1, 1.0)).unwrap();
        assert!(ne.max() <= 1e-3, "{ne:?}");
        let b = flatness_check(&PotentialSpec::burg(2), &grid(0.5, 2.0)).unwrap();
        assert!(b.max() <= 1e-3, "{b:?}");
        let q = flatness_check(&PotentialSpec::gamma_norm(0.5, 2).unwrap(), &grid(-1.0, 1.0)).unwrap();
        assert!(q.max() <= 1e-6, "{q:?}");
    }

    #[test]
    fn metric_equals_hessian() {
        for spec in flat_families(3) {
            let mut r = rng(6);
            for _ in 0..5 {
                let x = interior_point(&spec, &mut r);
                let g = metric_from_divergence(&BregmanField(&spec), &x).unwrap();
                let h = hess_potential(&spec, &x).unwrap();
                assert!((g - h).amax() <= 1e-4);
            }
        }
    }

    #[test]
    fn orthogonality_examples() {
        let q = PotentialSpec::gamma_norm(0.5, 3).unwrap();
        let c = ConstraintSet::sum(1.0, 3).unwrap();
        assert!(orthogonality_check(&q, &c, &[0.3, 2.0, -0.7]).unwrap() < 1e-10);
        let ne = PotentialSpec::neg_entropy(3);
        assert!(orthogonality_check(&ne, &c, &[0.3, 2.0, 0.7]).unwrap() < 1e-5);
        assert_eq!(orthogonality_check(&ne, &c, &[0.2, 0.3, 0.5]).unwrap(), 0.0);
        let bx = ConstraintSet::boxed(vec![0.0; 3], vec![1.0; 3]).unwrap();
        assert!(orthogonality_check(&ne, &bx, &[0.3, 2.0, 0.7]).is_err());
    }

    #[test]
    fn pythagoras_and_orthogonality_agree() {
        let mut r = rng(12);
        for spec in flat_families(3) {
            for _ in 0..5 {
                let (c, x0) = random_affine_through(&spec, 1, &mut r);
                let x = affine_feasible_point(&spec, &c, &x0, &mut r);
                let y = interior_point(&spec, &mut r);
                let rep = pythagoras_check(&spec, &c, &x, &y, Side::Left).unwrap();
                if rep.slack.abs() <= 1e-6 {
                    assert!(orthogonality_check(&spec, &c, &y).unwrap() <= 1e-5);
                }
            }
        }
    }

    #[test]
    fn report_layout() {
        let e = PotentialSpec::exp_sum(2);
        let rep = potential_geometry_report(&e, &[0.1, 0.2], 0).unwrap();
        assert_eq!(rep.metric.len(), 4);
        assert_eq!(rep.gamma.len(), 8);
        assert!((rep.metric[0] - 0.1f64.exp()).abs() < 1e-6);
        assert!((rep.gamma_dual[7] - 0.2f64.exp()).abs() < 1e-3);
        assert!(rep.norden_sen_residual < 5e-3 && rep.flatness_residual < 1e-3);
        let s = serde_json::to_string(&rep).unwrap();
        assert_eq!(serde_json::from_str::<GeometryReport>(&s).unwrap(), rep);
    }
}
