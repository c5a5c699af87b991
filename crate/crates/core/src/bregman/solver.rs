//! Primal-dual interior point method for smooth convex objectives over
//! `{E x = e, G x <= h}` intersected with the open domain of the objective.
//!
//! Inequalities carry slacks `s > 0` and multipliers `z > 0`; each iteration
//! solves one dense KKT system twice (Mehrotra predictor and corrector).
//! Steps are cut back to 99% of the distance to the boundary of both the
//! slack cone and the objective's domain, then backtracked on the residual
//! norm. Without inequalities this reduces to infeasible-start Newton on the
//! equality-constrained stationarity system.
//!
//! Right objectives `x -> D(a, x)` need not be convex. When the method above
//! stalls, [`solve_projected_newton`] takes over: convexified quadratic
//! models minimized over the polyhedron, a backtracking search on the
//! objective, and a final active-set Newton polish with the exact Hessian.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::constraint::Polyhedron;
use crate::error::{Error, Result};
use crate::potentials::Potential;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// `x -> D(x, a)` (left) or `x -> D(a, x)` (right) for a fixed anchor `a`.
pub(crate) struct Objective<'a, P: Potential + ?Sized> {
    pub pot: &'a P,
    pub anchor: Vec<f64>,
    pub anchor_grad: DVector<f64>,
    pub side: Side,
}

impl<'a, P: Potential + ?Sized> Objective<'a, P> {
    pub fn new(pot: &'a P, anchor: &[f64], side: Side) -> Result<Self> {
        let anchor_grad = pot.gradient(anchor)?;
        Ok(Objective { pot, anchor: anchor.to_vec(), anchor_grad, side })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self.side {
            Side::Left => self.pot.divergence(x, &self.anchor).raw(),
            Side::Right => self.pot.divergence(&self.anchor, x).raw(),
        }
    }

    fn gradient(&self, x: &[f64]) -> Result<DVector<f64>> {
        match self.side {
            Side::Left => Ok(self.pot.gradient(x)? - &self.anchor_grad),
            Side::Right => {
                let d = DVector::from_iterator(x.len(), x.iter().zip(&self.anchor).map(|(a, b)| a - b));
                Ok(self.pot.hessian(x)? * d)
            }
        }
    }

    /// Hessian of the objective itself, not necessarily positive definite.
    fn exact_hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let h = self.pot.hessian(x)?;
        match self.side {
            Side::Left => Ok(h),
            Side::Right => {
                let d: Vec<f64> = x.iter().zip(&self.anchor).map(|(a, b)| a - b).collect();
                let full = &h + self.pot.hessian_derivative(x, &d)?;
                Ok((&full + full.transpose()) * 0.5)
            }
        }
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let h = self.pot.hessian(x)?;
        match self.side {
            Side::Left => Ok(h),
            Side::Right => {
                let d: Vec<f64> = x.iter().zip(&self.anchor).map(|(a, b)| a - b).collect();
                let full = &h + self.pot.hessian_derivative(x, &d)?;
                let sym = (&full + full.transpose()) * 0.5;
                // the right objective need not be convex away from the anchor
                if sym.clone().cholesky().is_some() {
                    Ok(sym)
                } else {
                    Ok(h)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub residual: f64,
    pub step: f64,
    pub objective: f64,
}

pub(crate) struct Solution {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub trace: Vec<TraceEntry>,
}

struct State {
    x: DVector<f64>,
    lam: DVector<f64>,
    s: DVector<f64>,
    z: DVector<f64>,
}

struct Residuals {
    dual: DVector<f64>,
    eq: DVector<f64>,
    ineq: DVector<f64>,
    mu: f64,
}

impl Residuals {
    fn kkt(&self) -> f64 {
        let inf = |v: &DVector<f64>| if v.is_empty() { 0.0 } else { v.amax() };
        inf(&self.dual).max(inf(&self.eq)).max(inf(&self.ineq)).max(self.mu)
    }
}

fn residuals<P: Potential + ?Sized>(obj: &Objective<P>, poly: &Polyhedron, st: &State) -> Result<Residuals> {
    let g = obj.gradient(st.x.as_slice())?;
    let dual = g + poly.eq.transpose() * &st.lam + poly.ineq.transpose() * &st.z;
    let eq = &poly.eq * &st.x - &poly.eq_rhs;
    let ineq = &poly.ineq * &st.x + &st.s - &poly.ineq_rhs;
    let p = st.s.len();
    let mu = if p == 0 { 0.0 } else { st.s.dot(&st.z) / p as f64 };
    Ok(Residuals { dual, eq, ineq, mu })
}

fn merit(r: &Residuals, st: &State) -> f64 {
    let comp: f64 = st.s.iter().zip(st.z.iter()).map(|(a, b)| (a * b).powi(2)).sum();
    (r.dual.norm_squared() + r.eq.norm_squared() + r.ineq.norm_squared() + comp).sqrt()
}

/// Largest `a <= 1` keeping `v + a dv >= 0`.
fn cone_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter().zip(dv.iter()).fold(1.0f64, |a, (vi, di)| if *di < 0.0 { a.min(-vi / di) } else { a })
}

pub(crate) fn solve<P: Potential + ?Sized>(
    obj: &Objective<P>,
    poly: &Polyhedron,
    x0: &[f64],
    tol: f64,
    max_iterations: usize,
    keep_trace: bool,
) -> Result<Solution> {
    let n = x0.len();
    let m = poly.eq.nrows();
    let p = poly.ineq.nrows();
    if !obj.pot.in_interior(x0) {
        return Err(Error::domain("initial point lies outside the interior of the domain"));
    }
    let x = DVector::from_column_slice(x0);
    let s = (&poly.ineq_rhs - &poly.ineq * &x).map(|v| v.max(1.0));
    let mut st = State { x, lam: DVector::zeros(m), s, z: DVector::from_element(p, 1.0) };

    let mut trace = Vec::new();
    let mut best = (f64::INFINITY, st.x.clone());
    let mut res = residuals(obj, poly, &st)?;
    for it in 0..max_iterations {
        let kkt = res.kkt();
        if kkt < best.0 {
            best = (kkt, st.x.clone());
        }
        if kkt <= tol {
            return Ok(Solution { x: st.x.as_slice().to_vec(), iterations: it, residual: kkt, trace });
        }

        let h = obj.hessian(st.x.as_slice())?;
        let dim = n + m + p;
        let mut k = DMatrix::zeros(dim, dim);
        k.view_mut((0, 0), (n, n)).copy_from(&h);
        if m > 0 {
            k.view_mut((n, 0), (m, n)).copy_from(&poly.eq);
            k.view_mut((0, n), (n, m)).copy_from(&poly.eq.transpose());
        }
        if p > 0 {
            k.view_mut((n + m, 0), (p, n)).copy_from(&poly.ineq);
            k.view_mut((0, n + m), (n, p)).copy_from(&poly.ineq.transpose());
            for i in 0..p {
                k[(n + m + i, n + m + i)] = -st.s[i] / st.z[i];
            }
        }
        let lu = k.lu();

        // direction for complementarity target rc (S dz + Z ds = rc)
        let direction = |rc: &DVector<f64>| -> Result<(DVector<f64>, DVector<f64>, DVector<f64>, DVector<f64>)> {
            let mut rhs = DVector::zeros(dim);
            rhs.rows_mut(0, n).copy_from(&(-&res.dual));
            if m > 0 {
                rhs.rows_mut(n, m).copy_from(&(-&res.eq));
            }
            if p > 0 {
                let r = -&res.ineq - rc.component_div(&st.z);
                rhs.rows_mut(n + m, p).copy_from(&r);
            }
            let sol = lu.solve(&rhs).ok_or_else(|| Error::Numeric("singular KKT system".into()))?;
            let dx = sol.rows(0, n).into_owned();
            let dl = sol.rows(n, m).into_owned();
            let dz = sol.rows(n + m, p).into_owned();
            let ds = (rc - st.s.component_mul(&dz)).component_div(&st.z);
            Ok((dx, dl, ds, dz))
        };

        let sz = st.s.component_mul(&st.z);
        let mut candidates = Vec::with_capacity(2);
        if p == 0 {
            candidates.push(direction(&DVector::zeros(0))?);
        } else {
            let (_, _, ds_a, dz_a) = direction(&(-&sz))?;
            let a_aff = cone_step(&st.s, &ds_a).min(cone_step(&st.z, &dz_a));
            let mu_aff = (&st.s + &ds_a * a_aff).dot(&(&st.z + &dz_a * a_aff)) / p as f64;
            let sigma = (mu_aff / res.mu).clamp(0.0, 1.0).powi(3);
            let rc = DVector::from_element(p, sigma * res.mu) - &sz - ds_a.component_mul(&dz_a);
            candidates.push(direction(&rc)?);
            // without the corrector term the direction descends on the merit
            candidates.push(direction(&(DVector::from_element(p, 0.3 * res.mu) - &sz))?);
        }

        let m0 = merit(&res, &st);
        let mut accepted = None;
        let mut fallback = None;
        for (dx, dl, ds, dz) in &candidates {
            let mut alpha = 1.0f64;
            if p > 0 {
                alpha = alpha.min(0.99 * cone_step(&st.s, ds)).min(0.99 * cone_step(&st.z, dz));
            }
            let dom = obj.pot.max_step(st.x.as_slice(), dx.as_slice());
            if dom.is_finite() {
                alpha = alpha.min(0.99 * dom);
            }
            for _ in 0..60 {
                let trial = State {
                    x: &st.x + dx * alpha,
                    lam: &st.lam + dl * alpha,
                    s: &st.s + ds * alpha,
                    z: &st.z + dz * alpha,
                };
                if obj.pot.in_interior(trial.x.as_slice()) {
                    if let Ok(r) = residuals(obj, poly, &trial) {
                        let mt = merit(&r, &trial);
                        if mt.is_finite() {
                            if mt <= (1.0 - 1e-4 * alpha) * m0 && alpha > 1e-10 {
                                accepted = Some((trial, r, alpha));
                                break;
                            }
                            if fallback.is_none() {
                                fallback = Some((trial, r, alpha));
                            }
                        }
                    }
                }
                alpha *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
        }
        // no decrease: take the longest admissible step so that the
        // iteration cannot stall on a nonconvex stretch
        let Some((next, r, alpha)) = accepted.or(fallback) else { break };
        st = next;
        res = r;
        if keep_trace {
            trace.push(TraceEntry {
                iteration: it + 1,
                residual: res.kkt(),
                step: alpha,
                objective: obj.value(st.x.as_slice()),
            });
        }
    }
    let kkt = res.kkt();
    if kkt < best.0 {
        best = (kkt, st.x.clone());
    }
    if best.0 <= tol {
        return Ok(Solution { x: best.1.as_slice().to_vec(), iterations: max_iterations, residual: best.0, trace });
    }
    Err(Error::Convergence { iterations: max_iterations, residual: best.0, best: best.1.as_slice().to_vec() })
}

/// `x -> x^T H x / 2` on all of `R^n`.
struct Quadratic {
    h: DMatrix<f64>,
}

impl Potential for Quadratic {
    fn dim(&self) -> usize {
        self.h.nrows()
    }

    fn value(&self, x: &[f64]) -> crate::extended::ExtendedReal {
        let v = DVector::from_column_slice(x);
        crate::extended::ExtendedReal::saturating(0.5 * v.dot(&(&self.h * &v)))
    }

    fn in_interior(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.is_finite())
    }

    fn gradient(&self, x: &[f64]) -> Result<DVector<f64>> {
        Ok(&self.h * DVector::from_column_slice(x))
    }

    fn hessian(&self, _x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.h.clone())
    }

    fn hessian_derivative(&self, x: &[f64], _v: &[f64]) -> Result<DMatrix<f64>> {
        Ok(DMatrix::zeros(x.len(), x.len()))
    }

    fn max_step(&self, _x: &[f64], _dx: &[f64]) -> f64 {
        f64::INFINITY
    }
}

/// Damped projected Newton: each step minimizes the local quadratic model
/// over the polyhedron with [`solve`], then backtracks on the objective.
/// Globally convergent for nonconvex objectives from a feasible start.
pub(crate) fn solve_projected_newton<P: Potential + ?Sized>(
    obj: &Objective<P>,
    poly: &Polyhedron,
    x0: &[f64],
    tol: f64,
    max_iterations: usize,
    keep_trace: bool,
) -> Result<Solution> {
    let n = x0.len();
    if !obj.pot.in_interior(x0) {
        return Err(Error::domain("initial point lies outside the interior of the domain"));
    }
    let mut x = DVector::from_column_slice(x0);
    let mut trace = Vec::new();
    let mut best = (f64::INFINITY, x.clone());
    for it in 0..max_iterations {
        let g = obj.gradient(x.as_slice())?;
        let mut h = obj.hessian(x.as_slice())?;
        let mut shift = 0.0;
        while h.clone().cholesky().is_none() {
            shift = if shift == 0.0 { 1e-8 * (1.0 + h.amax()) } else { 10.0 * shift };
            h += DMatrix::identity(n, n) * shift;
        }
        let newton = h.clone().cholesky().expect("positive definite").solve(&g);
        let anchor: Vec<f64> = (&x - newton).iter().copied().collect();
        let quad = Quadratic { h: h.clone() };
        let model = Objective::new(&quad, &anchor, Side::Left)?;
        let qp = solve(&model, poly, x.as_slice(), tol, max_iterations, false)?;
        let target = DVector::from_vec(qp.x);
        let d = &target - &x;
        let slope = g.dot(&d);
        let f0 = obj.value(x.as_slice());
        let mut t = 1.0f64;
        let mut next = None;
        for _ in 0..60 {
            let trial = &x + &d * t;
            if obj.pot.in_interior(trial.as_slice()) {
                let ft = obj.value(trial.as_slice());
                if ft.is_finite() && ft <= f0 + 1e-4 * t * slope.min(0.0) + 1e-15 * (1.0 + f0.abs()) {
                    next = Some(trial);
                    break;
                }
            }
            t *= 0.5;
        }
        let Some(next) = next else { break };
        let stalled = t < 1e-6;
        // stationarity at the new point with the model's multipliers
        let gn = obj.gradient(next.as_slice())?;
        let residual = qp.residual.max((&gn - &g - &h * &d * t).amax()).max(if t < 1.0 { d.amax() } else { 0.0 });
        x = next;
        if keep_trace {
            trace.push(TraceEntry { iteration: it + 1, residual, step: t, objective: obj.value(x.as_slice()) });
        }
        if residual < best.0 {
            best = (residual, x.clone());
        }
        if residual <= tol {
            return Ok(Solution { x: x.as_slice().to_vec(), iterations: it + 1, residual, trace });
        }
        if residual <= 1e-5 || stalled {
            if let Some((xp, r)) = polish_active_set(obj, poly, &x, tol) {
                return Ok(Solution { x: xp.as_slice().to_vec(), iterations: it + 1, residual: r, trace });
            }
        }
    }
    if let Some((xp, r)) = polish_active_set(obj, poly, &best.1, tol) {
        return Ok(Solution { x: xp.as_slice().to_vec(), iterations: max_iterations, residual: r, trace });
    }
    Err(Error::Convergence { iterations: max_iterations, residual: best.0, best: best.1.as_slice().to_vec() })
}

/// Newton's method on the stationarity system with the inequalities in
/// `active` held as equalities, using the exact objective Hessian. Active
/// constraints with negative multipliers are released and violated inactive
/// ones are added until the full KKT residual is within `tol`.
fn polish_active_set<P: Potential + ?Sized>(
    obj: &Objective<P>,
    poly: &Polyhedron,
    x0: &DVector<f64>,
    tol: f64,
) -> Option<(DVector<f64>, f64)> {
    let n = x0.len();
    let m = poly.eq.nrows();
    let p = poly.ineq.nrows();
    let slack0 = &poly.ineq_rhs - &poly.ineq * x0;
    let mut active: Vec<usize> = (0..p).filter(|&i| slack0[i] <= 1e-5 * (1.0 + poly.ineq_rhs[i].abs())).collect();
    for _ in 0..=2 * p {
        let k = m + active.len();
        let mut a = DMatrix::zeros(k, n);
        let mut b = DVector::zeros(k);
        a.rows_mut(0, m).copy_from(&poly.eq);
        b.rows_mut(0, m).copy_from(&poly.eq_rhs);
        for (r, &i) in active.iter().enumerate() {
            a.row_mut(m + r).copy_from(&poly.ineq.row(i));
            b[m + r] = poly.ineq_rhs[i];
        }
        let mut x = x0.clone();
        let mut mult = DVector::zeros(k);
        let mut converged = false;
        for _ in 0..40 {
            let g = obj.gradient(x.as_slice()).ok()?;
            let h = obj.exact_hessian(x.as_slice()).ok()?;
            let mut kkt = DMatrix::zeros(n + k, n + k);
            kkt.view_mut((0, 0), (n, n)).copy_from(&h);
            kkt.view_mut((n, 0), (k, n)).copy_from(&a);
            kkt.view_mut((0, n), (n, k)).copy_from(&a.transpose());
            let mut rhs = DVector::zeros(n + k);
            rhs.rows_mut(0, n).copy_from(&(-&g));
            rhs.rows_mut(n, k).copy_from(&(&b - &a * &x));
            let sol = kkt.lu().solve(&rhs)?;
            let dx = sol.rows(0, n).into_owned();
            mult = sol.rows(n, k).into_owned();
            let mut t = 1.0;
            while !obj.pot.in_interior((&x + &dx * t).as_slice()) {
                t *= 0.5;
                if t < 1e-8 {
                    return None;
                }
            }
            x += &dx * t;
            let gn = obj.gradient(x.as_slice()).ok()?;
            let stat = (&gn + a.transpose() * &mult).amax();
            if t == 1.0 && stat <= 0.1 * tol && dx.amax() <= 1e-12 * (1.0 + x.amax()) {
                converged = true;
                break;
            }
            if t == 1.0 && stat <= 0.1 * tol && (&a * &x - &b).amax() <= 0.1 * tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return None;
        }
        // release the most negative multiplier
        let worst = (0..active.len()).min_by(|&i, &j| mult[m + i].total_cmp(&mult[m + j]));
        if let Some(w) = worst.filter(|&w| mult[m + w] < -tol) {
            active.remove(w);
            continue;
        }
        let slack = &poly.ineq_rhs - &poly.ineq * &x;
        let violated = (0..p).filter(|i| !active.contains(i)).min_by(|&i, &j| slack[i].total_cmp(&slack[j]));
        if let Some(v) = violated.filter(|&v| slack[v] < -tol) {
            active.push(v);
            active.sort_unstable();
            continue;
        }
        let g = obj.gradient(x.as_slice()).ok()?;
        let mut z = DVector::zeros(p);
        for (r, &i) in active.iter().enumerate() {
            z[i] = mult[m + r].max(0.0);
        }
        let lam = mult.rows(0, m).into_owned();
        let stat = (&g + poly.eq.transpose() * &lam + poly.ineq.transpose() * &z).amax();
        let eq = if m == 0 { 0.0 } else { (&poly.eq * &x - &poly.eq_rhs).amax() };
        let ineq = slack.iter().fold(0.0f64, |acc, s| acc.max(-s));
        let comp = z.iter().zip(slack.iter()).fold(0.0f64, |acc, (a, s)| acc.max((a * s).abs()));
        let residual = stat.max(eq).max(ineq).max(comp);
        return (residual <= tol).then_some((x, residual));
    }
    None
}
