//! Entropy maximization over one conjunctive cell.
//!
//! Linear constraints are preprocessed with a handful of linear programs:
//! atoms that must vanish are removed, inequalities that can never be slack
//! become equalities, and a point strictly inside everything else is found.
//! The remaining problem is solved by Newton's method on the null space of
//! the equalities with a log barrier for the inequalities. Nonlinear
//! constraints are added through an augmented Lagrangian.

use nalgebra::{DMatrix, DVector};

use super::lp::{Cmp, Lp, LpOutcome};
use crate::canon::{Poly, Var};
use crate::constraints::{Constraint, Rel, RegionCell};
use crate::error::{Error, Result};
use crate::model::rational::to_f64;

/// Slack below which an inequality counts as tight everywhere.
const SLACK_TOL: f64 = 1e-9;

/// `a . u <= b`, strict when the source constraint was.
#[derive(Clone, Debug)]
pub(crate) struct Row {
    pub a: Vec<f64>,
    pub b: f64,
    pub strict: bool,
}

impl Row {
    fn slack(&self, u: &[f64]) -> f64 {
        self.b - dot(&self.a, u)
    }
}

fn dot(a: &[f64], u: &[f64]) -> f64 {
    a.iter().zip(u).map(|(x, y)| x * y).sum()
}

/// A nonlinear constraint `g(u) = 0` or `g(u) <= 0` with derivatives.
#[derive(Clone, Debug)]
pub(crate) struct Nonlinear {
    g: Poly,
    equality: bool,
    grad: Vec<Poly>,
    hess: Vec<Vec<Poly>>,
}

impl Nonlinear {
    fn new(g: Poly, equality: bool, k: usize) -> Nonlinear {
        let grad: Vec<Poly> = (0..k).map(|j| g.derivative(Var::U(j))).collect();
        let hess = grad.iter().map(|d| (0..k).map(|l| d.derivative(Var::U(l))).collect()).collect();
        Nonlinear { g, equality, grad, hess }
    }

    fn value(&self, u: &[f64]) -> f64 {
        self.g.eval_u(u, &|_| 0.0)
    }

    fn violation(&self, u: &[f64]) -> f64 {
        let v = self.value(u);
        if self.equality {
            v.abs()
        } else {
            v.max(0.0)
        }
    }
}

/// The constraints of a cell split by kind, all as `a . u = b`,
/// `a . u <= b` or nonlinear.
#[derive(Clone, Debug)]
pub(crate) struct Split {
    pub k: usize,
    pub eq: Vec<(Vec<f64>, f64)>,
    pub ineq: Vec<Row>,
    pub nonlinear: Vec<Nonlinear>,
}

impl Split {
    pub fn of(cell: &RegionCell, k: usize) -> Split {
        let mut s = Split { k, eq: Vec::new(), ineq: Vec::new(), nonlinear: Vec::new() };
        for c in &cell.constraints {
            s.push(c);
        }
        s
    }

    pub fn push(&mut self, c: &Constraint) {
        let k = self.k;
        if !c.poly.is_linear() {
            let (g, equality) = match c.rel {
                Rel::Eq => (c.poly.clone(), true),
                Rel::Le | Rel::Lt => (c.poly.clone(), false),
                Rel::Ge | Rel::Gt => (c.poly.neg(), false),
            };
            self.nonlinear.push(Nonlinear::new(g, equality, k));
            return;
        }
        let (a, c0) = linear_coefs(&c.poly, k);
        match c.rel {
            Rel::Eq => self.eq.push((a, -c0)),
            Rel::Le | Rel::Lt => self.ineq.push(Row { a, b: -c0, strict: c.is_strict() }),
            Rel::Ge | Rel::Gt => {
                self.ineq.push(Row { a: a.iter().map(|x| -x).collect(), b: c0, strict: c.is_strict() })
            }
        }
    }

    /// Simplex and linear constraints as a linear program over `u`.
    fn lp(&self) -> Lp {
        let mut lp = Lp::new(vec![(0.0, 1.0); self.k]);
        lp.row((0..self.k).map(|j| (j, 1.0)), Cmp::Eq, 1.0);
        for (a, b) in &self.eq {
            lp.dense_row(a, Cmp::Eq, *b);
        }
        for r in &self.ineq {
            lp.dense_row(&r.a, Cmp::Le, r.b);
        }
        lp
    }
}

/// Coefficients and constant term of a linear polynomial in `u`.
pub(crate) fn linear_coefs(p: &Poly, k: usize) -> (Vec<f64>, f64) {
    let mut a = vec![0.0; k];
    let mut c0 = 0.0;
    for (m, c) in p.terms() {
        match m.as_single() {
            Some(Var::U(j)) => a[j] += to_f64(c),
            None if m.is_constant() => c0 += to_f64(c),
            _ => unreachable!("linear polynomial in u only"),
        }
    }
    (a, c0)
}

/// Linear structure of a nonempty cell.
#[derive(Clone, Debug)]
pub(crate) struct Prepared {
    pub k: usize,
    /// Atoms forced to zero.
    pub zero: Vec<bool>,
    /// Equalities including the simplex row and tight inequalities.
    pub eq: Vec<(Vec<f64>, f64)>,
    /// Inequalities with room to move.
    pub ineq: Vec<Row>,
    pub nonlinear: Vec<Nonlinear>,
    /// Feasible for the linear part, strictly inside every inequality and
    /// positive on every atom not forced to zero.
    pub center: Vec<f64>,
}

impl Prepared {
    pub fn free(&self) -> Vec<usize> {
        (0..self.k).filter(|&j| !self.zero[j]).collect()
    }

    pub fn lp(&self) -> Lp {
        let mut lp = Lp::new((0..self.k).map(|j| if self.zero[j] { (0.0, 0.0) } else { (0.0, 1.0) }).collect());
        for (a, b) in &self.eq {
            lp.dense_row(a, Cmp::Eq, *b);
        }
        for r in &self.ineq {
            lp.dense_row(&r.a, Cmp::Le, r.b);
        }
        lp
    }
}

/// Finds forced zeros and tight inequalities. `None` when the closure of the
/// cell is empty: its linear part is infeasible, or some strict inequality
/// can never hold strictly.
pub(crate) fn prepare(split: &Split) -> Result<Option<Prepared>> {
    let k = split.k;
    let base = split.lp();
    // Candidates: inequality rows, then atoms (`-u_j <= 0`).
    let n = split.ineq.len() + k;
    let slack_of = |i: usize, u: &[f64]| if i < split.ineq.len() { split.ineq[i].slack(u) } else { u[i - split.ineq.len()] };
    let mut open: Vec<usize> = (0..n).collect();
    let mut loose = vec![false; n];
    let mut points: Vec<Vec<f64>> = Vec::new();
    loop {
        let mut lp = base.clone();
        let mut svars = Vec::new();
        for &i in &open {
            let s = lp.add_var((0.0, 1.0), 1.0);
            svars.push(s);
            if i < split.ineq.len() {
                let r = &split.ineq[i];
                let mut coefs: Vec<(usize, f64)> = r.a.iter().copied().enumerate().collect();
                coefs.push((s, 1.0));
                lp.row(coefs, Cmp::Le, r.b);
            } else {
                lp.row([(i - split.ineq.len(), -1.0), (s, 1.0)], Cmp::Le, 0.0);
            }
        }
        let x = match lp.solve(true)? {
            LpOutcome::Optimal { x, .. } => x,
            LpOutcome::Infeasible => return Ok(None),
            LpOutcome::Unbounded => return Err(Error::Solver("bounded program reported unbounded".into())),
        };
        let u: Vec<f64> = x[..k].to_vec();
        let mut progress = false;
        for &i in &open {
            if slack_of(i, &u) > SLACK_TOL {
                loose[i] = true;
                progress = true;
            }
        }
        if points.is_empty() || progress {
            points.push(u);
        }
        open.retain(|&i| !loose[i]);
        if !progress || open.is_empty() {
            break;
        }
    }
    let mut zero = vec![false; k];
    let mut eq = split.eq.clone();
    let mut ineq = Vec::new();
    for (i, r) in split.ineq.iter().enumerate() {
        match (loose[i], r.strict) {
            (true, _) => ineq.push(r.clone()),
            (false, true) => return Ok(None),
            (false, false) => eq.push((r.a.clone(), r.b)),
        }
    }
    for j in 0..k {
        zero[j] = !loose[split.ineq.len() + j];
    }
    eq.push((vec![1.0; k], 1.0));
    let mut center = vec![0.0; k];
    for p in &points {
        for j in 0..k {
            center[j] += p[j] / points.len() as f64;
        }
    }
    for j in 0..k {
        if zero[j] {
            center[j] = 0.0;
        }
    }
    Ok(Some(Prepared { k, zero, eq, ineq, nonlinear: split.nonlinear.clone(), center }))
}

/// Solver tolerances.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Tolerances {
    pub max_newton: usize,
    pub max_outer: usize,
}

/// A local maximum found from one start.
#[derive(Clone, Debug)]
pub(crate) struct Local {
    pub point: Vec<f64>,
    pub entropy: f64,
    /// Largest violation of any constraint of the prepared cell.
    pub feasibility: f64,
    /// Size of the projected gradient of the last subproblem.
    pub kkt: f64,
}

/// Newton machinery over the null space of the equalities.
pub(crate) struct Solver<'a> {
    prep: &'a Prepared,
    free: Vec<usize>,
    /// Base point satisfying the equalities.
    u0: Vec<f64>,
    /// Orthonormal basis of the feasible directions, one row per free atom.
    z: DMatrix<f64>,
}

#[derive(Clone, Debug)]
struct Params {
    mu: f64,
    rho: f64,
    lambda: Vec<f64>,
}

impl<'a> Solver<'a> {
    pub fn new(prep: &'a Prepared) -> Solver<'a> {
        let free = prep.free();
        let f = free.len();
        let m = prep.eq.len();
        let e = DMatrix::from_fn(m, f, |r, c| prep.eq[r].0[free[c]]);
        let d = DVector::from_fn(m, |r, _| prep.eq[r].1);
        let c = DVector::from_fn(f, |i, _| prep.center[free[i]]);
        // Project the center onto the equalities to remove LP round-off.
        let fix = match e.clone().pseudo_inverse(1e-12) {
            Ok(pinv) => pinv * (&d - &e * &c),
            Err(_) => DVector::zeros(f),
        };
        let mut u0 = prep.center.clone();
        for (i, &j) in free.iter().enumerate() {
            u0[j] = c[i] + fix[i];
        }
        let gram = e.transpose() * &e;
        let eig = nalgebra::SymmetricEigen::new(gram);
        let scale = eig.eigenvalues.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
        let cols: Vec<usize> = (0..f).filter(|&i| eig.eigenvalues[i].abs() <= 1e-12 * scale).collect();
        let z = DMatrix::from_fn(f, cols.len(), |r, c| eig.eigenvectors[(r, cols[c])]);
        Solver { prep, free, u0, z }
    }

    fn point(&self, y: &DVector<f64>) -> Vec<f64> {
        let mut u = self.u0.clone();
        if y.is_empty() {
            return u;
        }
        let step = &self.z * y;
        for (i, &j) in self.free.iter().enumerate() {
            u[j] += step[i];
        }
        u
    }

    /// Coordinates of `u` in the null-space basis.
    pub fn coords(&self, u: &[f64]) -> DVector<f64> {
        let diff = DVector::from_fn(self.free.len(), |i, _| u[self.free[i]] - self.u0[self.free[i]]);
        self.z.transpose() * diff
    }

    fn value(&self, y: &DVector<f64>, p: &Params) -> Option<f64> {
        let u = self.point(y);
        let mut v = 0.0;
        for &j in &self.free {
            if u[j] <= 0.0 {
                return None;
            }
            v -= u[j] * u[j].ln();
        }
        for r in &self.prep.ineq {
            let s = r.slack(&u);
            if s <= 0.0 {
                return None;
            }
            v += p.mu * s.ln();
        }
        for (nl, &lam) in self.prep.nonlinear.iter().zip(&p.lambda) {
            let g = nl.value(&u);
            v -= if nl.equality {
                lam * g + 0.5 * p.rho * g * g
            } else {
                let t = (lam + p.rho * g).max(0.0);
                (t * t - lam * lam) / (2.0 * p.rho)
            };
        }
        Some(v)
    }

    /// Gradient and Hessian with respect to the free atoms.
    fn derivatives(&self, u: &[f64], p: &Params) -> (DVector<f64>, DMatrix<f64>) {
        let f = self.free.len();
        let mut g = DVector::from_fn(f, |i, _| -u[self.free[i]].ln() - 1.0);
        let mut h = DMatrix::from_fn(f, f, |r, c| if r == c { -1.0 / u[self.free[r]] } else { 0.0 });
        for r in &self.prep.ineq {
            let s = r.slack(u);
            let a = DVector::from_fn(f, |i, _| r.a[self.free[i]]);
            g -= &a * (p.mu / s);
            h -= (&a * a.transpose()) * (p.mu / (s * s));
        }
        for (nl, &lam) in self.prep.nonlinear.iter().zip(&p.lambda) {
            let gv = nl.value(u);
            let w = if nl.equality { lam + p.rho * gv } else { (lam + p.rho * gv).max(0.0) };
            if w == 0.0 && !nl.equality {
                continue;
            }
            let grad = DVector::from_fn(f, |i, _| nl.grad[self.free[i]].eval_u(u, &|_| 0.0));
            g -= &grad * w;
            h -= (&grad * grad.transpose()) * p.rho;
            for r in 0..f {
                for c in 0..f {
                    let d2 = &nl.hess[self.free[r]][self.free[c]];
                    if !d2.is_empty() {
                        h[(r, c)] -= w * d2.eval_u(u, &|_| 0.0);
                    }
                }
            }
        }
        (g, h)
    }

    /// Damped Newton ascent from `y`; returns the final point and the norm
    /// of the reduced gradient there.
    fn newton(&self, mut y: DVector<f64>, p: &Params, tol: &Tolerances) -> (DVector<f64>, f64) {
        let mut gnorm = f64::INFINITY;
        if self.z.ncols() == 0 {
            return (y, 0.0);
        }
        for _ in 0..tol.max_newton {
            let u = self.point(&y);
            let (gu, hu) = self.derivatives(&u, p);
            let g = self.z.transpose() * gu;
            let h = self.z.transpose() * hu * &self.z;
            gnorm = g.amax();
            let neg = -h;
            let d = neg.nrows();
            let mut shift = 0.0;
            let dir = loop {
                let m = &neg + DMatrix::identity(d, d) * shift;
                if let Some(ch) = m.cholesky() {
                    break ch.solve(&g);
                }
                shift = if shift == 0.0 { 1e-10 * (1.0 + neg.amax()) } else { shift * 10.0 };
                if shift > 1e12 {
                    break g.clone();
                }
            };
            let dec = g.dot(&dir);
            if !dec.is_finite() || dec < 1e-24 {
                break;
            }
            let Some(f0) = self.value(&y, p) else { break };
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-20 {
                let cand = &y + &dir * t;
                if let Some(f1) = self.value(&cand, p) {
                    if f1 >= f0 + 1e-4 * t * dec || (t == 1.0 && dec < 1e-14) {
                        y = cand;
                        moved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        (y, gnorm)
    }

    /// Maximizes entropy from the start `u`, which must lie strictly inside
    /// the linear inequalities.
    pub fn solve_from(&self, u: &[f64], tol: &Tolerances) -> Local {
        let nl = &self.prep.nonlinear;
        let has_ineq = !self.prep.ineq.is_empty();
        let mut p = Params { mu: if has_ineq { 1e-2 } else { 0.0 }, rho: 10.0, lambda: vec![0.0; nl.len()] };
        let mut y = self.coords(u);
        let mut kkt = 0.0;
        let mut prev = f64::INFINITY;
        for _ in 0..tol.max_outer {
            let (ny, g) = self.newton(y, &p, tol);
            y = ny;
            kkt = g;
            let u = self.point(&y);
            let viol = nl.iter().map(|c| c.violation(&u)).fold(0.0, f64::max);
            let barrier_done = !has_ineq || p.mu <= 1e-14;
            if barrier_done && viol <= 1e-11 {
                break;
            }
            for (i, c) in nl.iter().enumerate() {
                let g = c.value(&u);
                p.lambda[i] = if c.equality { p.lambda[i] + p.rho * g } else { (p.lambda[i] + p.rho * g).max(0.0) };
            }
            if viol > 0.25 * prev {
                p.rho = (p.rho * 10.0).min(1e10);
            }
            prev = viol;
            if has_ineq {
                p.mu = (p.mu * 1e-2).max(1e-14);
            }
        }
        let mut point = self.point(&y);
        for x in point.iter_mut() {
            if *x < 0.0 && *x > -1e-12 {
                *x = 0.0;
            }
        }
        let feasibility = self.feasibility(&point);
        Local { entropy: super::entropy(&point), point, feasibility, kkt }
    }

    pub fn feasibility(&self, u: &[f64]) -> f64 {
        let mut v: f64 = 0.0;
        for (a, b) in &self.prep.eq {
            v = v.max((dot(a, u) - b).abs());
        }
        for r in &self.prep.ineq {
            v = v.max(-r.slack(u));
        }
        for (j, &x) in u.iter().enumerate() {
            v = v.max(-x);
            if self.prep.zero[j] {
                v = v.max(x.abs());
            }
        }
        for c in &self.prep.nonlinear {
            v = v.max(c.violation(u));
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::RegionCell;
    use crate::model::rational::rat;

    fn le(atoms: &[usize], rhs: (i64, i64)) -> Constraint {
        Constraint::new(Poly::sum_u(atoms.iter().copied()).sub(&Poly::constant(rat(rhs.0, rhs.1))), Rel::Le)
    }

    fn ge(atoms: &[usize], rhs: (i64, i64)) -> Constraint {
        Constraint::new(Poly::sum_u(atoms.iter().copied()).sub(&Poly::constant(rat(rhs.0, rhs.1))), Rel::Ge)
    }

    fn tol() -> Tolerances {
        Tolerances { max_newton: 100, max_outer: 40 }
    }

    #[test]
    fn tight_pair_becomes_equality_and_zero_is_found() {
        let cell = RegionCell::new(vec![le(&[0], (3, 10)), ge(&[0], (3, 10)), le(&[2], (0, 1))], 0, vec![]);
        let prep = prepare(&Split::of(&cell, 3)).unwrap().unwrap();
        assert_eq!(prep.zero, vec![false, false, true]);
        assert!(prep.ineq.is_empty());
        let s = Solver::new(&prep);
        let out = s.solve_from(&prep.center, &tol());
        assert!((out.point[0] - 0.3).abs() < 1e-10 && (out.point[1] - 0.7).abs() < 1e-10);
    }

    #[test]
    fn strict_bound_that_cannot_hold_empties_the_cell() {
        let strict = Constraint::new(Poly::u(0).sub(&Poly::constant(rat(3, 10))), Rel::Gt);
        let cell = RegionCell::new(vec![le(&[0], (3, 10)), strict], 0, vec![]);
        assert!(prepare(&Split::of(&cell, 2)).unwrap().is_none());
    }

    #[test]
    fn active_bound_is_reached() {
        let cell = RegionCell::new(vec![le(&[0], (3, 10))], 0, vec![]);
        let prep = prepare(&Split::of(&cell, 2)).unwrap().unwrap();
        let out = Solver::new(&prep).solve_from(&prep.center, &tol());
        assert!((out.point[0] - 0.3).abs() < 1e-9, "{:?}", out.point);
        assert!(out.feasibility < 1e-12);
    }

    #[test]
    fn nonlinear_independence_constraint() {
        // u1 = (u1 + u2)(u1 + u3): P and Q independent; maxent is uniform.
        let pq = Poly::sum_u([0, 1]).mul(&Poly::sum_u([0, 2]));
        let c = Constraint::new(Poly::u(0).sub(&pq), Rel::Eq);
        let cell = RegionCell::new(vec![c, le(&[0, 1], (1, 5))], 0, vec![]);
        let prep = prepare(&Split::of(&cell, 4)).unwrap().unwrap();
        let out = Solver::new(&prep).solve_from(&prep.center, &tol());
        assert!(out.feasibility < 1e-8, "{out:?}");
        // Independent with P at 0.2 and Q free at 1/2.
        let expect = [0.1, 0.1, 0.4, 0.4];
        for (x, e) in out.point.iter().zip(expect) {
            assert!((x - e).abs() < 1e-6, "{:?}", out.point);
        }
    }
}
