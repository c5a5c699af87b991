//! Convex constraint sets and their polyhedral form.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Coordinates in which a constraint set is written.
///
/// `Primal` sets constrain `x` itself. `Dual` sets constrain the gradient
/// coordinates `eta = grad Phi(x)`; they are the natural targets of right
/// projections, which are ordinary left projections of the conjugate in
/// those coordinates.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    #[default]
    Primal,
    Dual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Halfspace {
    /// Normal vector.
    pub a: Vec<f64>,
    /// Offset: the set is `<a, x> <= c`.
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintKind {
    /// `A x = b` with `A` of full row rank.
    Affine {
        a: DMatrix<f64>,
        b: DVector<f64>,
    },
    Halfspaces(Vec<Halfspace>),
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// `{x >= 0, sum x = total}`.
    Simplex {
        total: f64,
    },
}

/// A closed convex set in `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    kind: ConstraintKind,
    dim: usize,
    frame: Frame,
}

/// `{x : E x = e, G x <= h}`.
#[derive(Debug, Clone)]
pub(crate) struct Polyhedron {
    pub eq: DMatrix<f64>,
    pub eq_rhs: DVector<f64>,
    pub ineq: DMatrix<f64>,
    pub ineq_rhs: DVector<f64>,
}

impl ConstraintSet {
    pub fn affine(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        Self::affine_with_rank_tol(a, b, crate::config::Tolerances::DEFAULT.rank)
    }

    pub fn affine_with_rank_tol(a: DMatrix<f64>, b: DVector<f64>, rank_tol: f64) -> Result<Self> {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            return Err(Error::Validation("affine set needs at least one row and column".into()));
        }
        check_dim(m, b.len())?;
        if m > n {
            return Err(Error::Validation(format!("{m} equations in dimension {n}")));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Validation("affine data must be finite".into()));
        }
        let rank = numerical_rank(&a, rank_tol);
        if rank < m {
            return Err(Error::Validation(format!("constraint matrix has rank {rank} < {m} rows")));
        }
        Ok(ConstraintSet { kind: ConstraintKind::Affine { a, b }, dim: n, frame: Frame::Primal })
    }

    /// The hyperplane `{x : sum x = total}`.
    pub fn sum(total: f64, dim: usize) -> Result<Self> {
        Self::affine(DMatrix::from_element(1, dim, 1.0), DVector::from_element(1, total))
    }

    pub fn halfspaces(list: Vec<Halfspace>) -> Result<Self> {
        let dim = list.first().map(|h| h.a.len()).ok_or_else(|| Error::Validation("halfspace list is empty".into()))?;
        if dim == 0 {
            return Err(Error::Validation("halfspace normal is empty".into()));
        }
        for h in &list {
            check_dim(dim, h.a.len())?;
            if h.a.iter().all(|v| *v == 0.0) {
                return Err(Error::Validation("halfspace normal is zero".into()));
            }
            if h.a.iter().any(|v| !v.is_finite()) || !h.c.is_finite() {
                return Err(Error::Validation("halfspace data must be finite".into()));
            }
        }
        Ok(ConstraintSet { kind: ConstraintKind::Halfspaces(list), dim, frame: Frame::Primal })
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if lo.is_empty() {
            return Err(Error::Validation("box is empty".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h) || l.is_nan() || h.is_nan()) {
            return Err(Error::Infeasible("box has lo > hi".into()));
        }
        let dim = lo.len();
        Ok(ConstraintSet { kind: ConstraintKind::Box { lo, hi }, dim, frame: Frame::Primal })
    }

    pub fn simplex(total: f64, dim: usize) -> Result<Self> {
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Validation(format!("simplex mass must be positive, got {total}")));
        }
        if dim == 0 {
            return Err(Error::Validation("simplex dimension must be positive".into()));
        }
        Ok(ConstraintSet { kind: ConstraintKind::Simplex { total }, dim, frame: Frame::Primal })
    }

    pub fn in_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    pub fn kind(&self) -> &ConstraintKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.kind, ConstraintKind::Affine { .. })
    }

    pub(crate) fn polyhedron(&self) -> Polyhedron {
        let n = self.dim;
        let empty = |rows: usize| (DMatrix::zeros(rows, n), DVector::zeros(rows));
        let (eq, eq_rhs, ineq, ineq_rhs) = match &self.kind {
            ConstraintKind::Affine { a, b } => {
                let (g, h) = empty(0);
                (a.clone(), b.clone(), g, h)
            }
            ConstraintKind::Halfspaces(list) => {
                let (e, ev) = empty(0);
                let g = DMatrix::from_fn(list.len(), n, |i, j| list[i].a[j]);
                let h = DVector::from_iterator(list.len(), list.iter().map(|h| h.c));
                (e, ev, g, h)
            }
            ConstraintKind::Box { lo, hi } => {
                let (e, ev) = empty(0);
                let mut g = Vec::new();
                let mut h = Vec::new();
                for i in 0..n {
                    if hi[i].is_finite() {
                        let mut row = vec![0.0; n];
                        row[i] = 1.0;
                        g.push(row);
                        h.push(hi[i]);
                    }
                    if lo[i].is_finite() {
                        let mut row = vec![0.0; n];
                        row[i] = -1.0;
                        g.push(row);
                        h.push(-lo[i]);
                    }
                }
                let gm = DMatrix::from_fn(g.len(), n, |i, j| g[i][j]);
                (e, ev, gm, DVector::from_vec(h))
            }
            ConstraintKind::Simplex { total } => (
                DMatrix::from_element(1, n, 1.0),
                DVector::from_element(1, *total),
                -DMatrix::identity(n, n),
                DVector::zeros(n),
            ),
        };
        Polyhedron { eq, eq_rhs, ineq, ineq_rhs }
    }

    /// Largest violation of any constraint at `x` (0 inside the set).
    pub fn violation(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.polyhedron().violation(x))
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        Ok(self.violation(x)? <= tol)
    }

    /// Orthonormal basis of the tangent space (kernel of `A`) of an affine set.
    pub fn tangent_basis(&self) -> Option<DMatrix<f64>> {
        match &self.kind {
            ConstraintKind::Affine { a, .. } => Some(kernel_basis(a)),
            _ => None,
        }
    }
}

impl Polyhedron {
    pub fn violation(&self, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        let e = (&self.eq * &xv - &self.eq_rhs).amax();
        let g = (&self.ineq * &xv - &self.ineq_rhs).iter().fold(0.0f64, |m, v| m.max(*v));
        let e = if self.eq.nrows() == 0 { 0.0 } else { e };
        e.max(g)
    }
}

fn numerical_rank(a: &DMatrix<f64>, tol: f64) -> usize {
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0f64, |m, v| m.max(*v));
    sv.iter().filter(|s| **s > tol * smax.max(1.0)).count()
}

/// Orthonormal basis of `ker A` from the full SVD of `A^T A`.
pub(crate) fn kernel_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    let ata = a.transpose() * a;
    let eig = ata.symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(1.0);
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| eig.eigenvalues[i] <= 1e-12 * scale)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Euclidean projection onto `{E x = e}`.
fn project_affine(eq: &DMatrix<f64>, rhs: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
    let r = eq * x - rhs;
    let gram = eq * eq.transpose();
    match gram.cholesky() {
        Some(ch) => x - eq.transpose() * ch.solve(&r),
        None => x.clone(),
    }
}

/// Dykstra's alternating projections onto `C` intersected with a closed box
/// strictly inside the domain. Returns a point of the intersection, or an
/// infeasibility error when the iteration does not settle on one.
pub(crate) fn feasibility_probe(
    poly: &Polyhedron,
    start: &[f64],
    domain: Option<(f64, f64)>,
    tol: f64,
) -> Result<Vec<f64>> {
    let n = start.len();
    let shrink = |v: f64, inward: f64| v + inward * 1e-9 * (1.0 + v.abs());
    let bx = domain.map(|(lo, hi)| {
        let l = if lo.is_finite() { shrink(lo, 1.0) } else { f64::NEG_INFINITY };
        let h = if hi.is_finite() { shrink(hi, -1.0) } else { f64::INFINITY };
        (l, h)
    });
    let box_violation =
        |x: &DVector<f64>| -> f64 { bx.map_or(0.0, |(l, h)| x.iter().fold(0.0f64, |m, v| m.max(l - v).max(v - h))) };

    let p = poly.ineq.nrows();
    let blocks = p + 2;
    let mut x = DVector::from_column_slice(start);
    let mut incr = vec![DVector::zeros(n); blocks];
    for _ in 0..20_000 {
        for k in 0..blocks {
            let z = &x + &incr[k];
            let proj = if k < p {
                let a = poly.ineq.row(k).transpose();
                let excess = a.dot(&z) - poly.ineq_rhs[k];
                if excess > 0.0 {
                    &z - &a * (excess / a.norm_squared())
                } else {
                    z.clone()
                }
            } else if k == p {
                if poly.eq.nrows() > 0 {
                    project_affine(&poly.eq, &poly.eq_rhs, &z)
                } else {
                    z.clone()
                }
            } else {
                match bx {
                    Some((l, h)) => z.map(|v| v.clamp(l, h)),
                    None => z.clone(),
                }
            };
            incr[k] = &z - &proj;
            x = proj;
        }
        if poly.violation(x.as_slice()) <= tol && box_violation(&x) <= 0.0 {
            return Ok(x.as_slice().to_vec());
        }
    }
    Err(Error::Infeasible("the constraint set does not meet the interior of the domain".into()))
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraint {
    kind: String,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    halfspaces: Option<Vec<Halfspace>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lo: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    total: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(default, skip_serializing_if = "is_primal")]
    frame: Frame,
}

fn is_primal(f: &Frame) -> bool {
    *f == Frame::Primal
}

impl TryFrom<RawConstraint> for ConstraintSet {
    type Error = Error;

    fn try_from(r: RawConstraint) -> Result<Self> {
        let missing = |f: &str| Error::Validation(format!("{} constraint needs field {f}", r.kind));
        let set = match r.kind.as_str() {
            "affine" => {
                let rows = r.a.clone().ok_or_else(|| missing("A"))?;
                let b = r.b.clone().ok_or_else(|| missing("b"))?;
                let n = rows.first().map_or(0, |row| row.len());
                if rows.iter().any(|row| row.len() != n) {
                    return Err(Error::Validation("rows of A have different lengths".into()));
                }
                ConstraintSet::affine(DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]), DVector::from_vec(b))?
            }
            "halfspaces" => ConstraintSet::halfspaces(r.halfspaces.clone().ok_or_else(|| missing("halfspaces"))?)?,
            "box" => ConstraintSet::boxed(
                r.lo.clone().ok_or_else(|| missing("lo"))?,
                r.hi.clone().ok_or_else(|| missing("hi"))?,
            )?,
            "simplex" => {
                ConstraintSet::simplex(r.total.ok_or_else(|| missing("total"))?, r.dim.ok_or_else(|| missing("dim"))?)?
            }
            other => return Err(Error::Validation(format!("unknown constraint kind '{other}'"))),
        };
        Ok(set.in_frame(r.frame))
    }
}

impl From<&ConstraintSet> for RawConstraint {
    fn from(c: &ConstraintSet) -> Self {
        let mut r = RawConstraint {
            kind: String::new(),
            a: None,
            b: None,
            halfspaces: None,
            lo: None,
            hi: None,
            total: None,
            dim: None,
            frame: c.frame,
        };
        match &c.kind {
            ConstraintKind::Affine { a, b } => {
                r.kind = "affine".into();
                r.a = Some(a.row_iter().map(|row| row.iter().copied().collect()).collect());
                r.b = Some(b.iter().copied().collect());
            }
            ConstraintKind::Halfspaces(list) => {
                r.kind = "halfspaces".into();
                r.halfspaces = Some(list.clone());
            }
            ConstraintKind::Box { lo, hi } => {
                r.kind = "box".into();
                r.lo = Some(lo.clone());
                r.hi = Some(hi.clone());
            }
            ConstraintKind::Simplex { total } => {
                r.kind = "simplex".into();
                r.total = Some(*total);
                r.dim = Some(c.dim);
            }
        }
        r
    }
}

impl Serialize for ConstraintSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawConstraint::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConstraintSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        ConstraintSet::try_from(RawConstraint::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_deficient_affine_is_rejected() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 0.0]);
        assert!(matches!(ConstraintSet::affine(a, DVector::from_vec(vec![1.0, 2.0])), Err(Error::Validation(_))));
    }

    #[test]
    fn json_forms() {
        let c: ConstraintSet = serde_json::from_str(r#"{"kind": "affine", "A": [[1, 1]], "b": [1]}"#).unwrap();
        assert!(c.is_affine());
        assert_eq!(c.dim(), 2);
        let c: ConstraintSet =
            serde_json::from_str(r#"{"kind": "halfspaces", "halfspaces": [{"a": [1, 0], "c": 0}], "frame": "dual"}"#)
                .unwrap();
        assert_eq!(c.frame(), Frame::Dual);
        let back: ConstraintSet = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<ConstraintSet>(r#"{"kind": "box", "lo": [0], "hi": [1], "x": 1}"#).is_err());
        assert!(serde_json::from_str::<ConstraintSet>(r#"{"kind": "simplex", "total": 1}"#).is_err());
    }

    #[test]
    fn violation_and_kernel() {
        let c = ConstraintSet::simplex(1.0, 3).unwrap();
        assert_eq!(c.violation(&[0.2, 0.3, 0.5]).unwrap(), 0.0);
        assert!((c.violation(&[-0.1, 0.6, 0.5]).unwrap() - 0.1).abs() < 1e-15);
        let s = ConstraintSet::sum(1.0, 3).unwrap();
        let k = s.tangent_basis().unwrap();
        assert_eq!(k.ncols(), 2);
        assert!((DMatrix::from_element(1, 3, 1.0) * &k).amax() < 1e-12);
    }

    #[test]
    fn probe_finds_interior_point_or_fails() {
        let c = ConstraintSet::halfspaces(vec![Halfspace { a: vec![1.0, 1.0], c: 1.0 }]).unwrap();
        let x = feasibility_probe(&c.polyhedron(), &[3.0, 3.0], Some((0.0, f64::INFINITY)), 1e-10).unwrap();
        assert!(x.iter().all(|v| *v > 0.0) && x[0] + x[1] <= 1.0 + 1e-10);
        let bad = ConstraintSet::halfspaces(vec![Halfspace { a: vec![1.0, 0.0], c: -1.0 }]).unwrap();
        assert!(feasibility_probe(&bad.polyhedron(), &[1.0, 1.0], Some((0.0, f64::INFINITY)), 1e-10).is_err());
    }
}
