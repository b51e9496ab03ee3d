use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::model::rational::{format_rational, to_f64};
use crate::model::{Expr, ToleranceVector};

/// A polynomial variable: an atomic proportion `[[A_j]]` (0-based `j`) or a
/// tolerance variable `eps[i]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    U(usize),
    Eps(u32),
}

/// Product of variables with positive exponents, sorted by variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn is_constant(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.iter().map(|(v, _)| *v)
    }

    pub fn degree_in(&self, v: Var) -> u32 {
        self.0.iter().find(|(w, _)| *w == v).map_or(0, |(_, e)| *e)
    }

    /// The single variable of a degree-one monomial.
    pub fn as_single(&self) -> Option<Var> {
        match self.0.as_slice() {
            [(v, 1)] => Some(*v),
            _ => None,
        }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut map: BTreeMap<Var, u32> = self.0.iter().copied().collect();
        for (v, e) in &other.0 {
            *map.entry(*v).or_insert(0) += e;
        }
        Monomial(map.into_iter().collect())
    }

    /// This monomial with one power of `v` removed, if it has one.
    fn without_one(&self, v: Var) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut found = false;
        for &(w, e) in &self.0 {
            if w == v {
                found = true;
                if e > 1 {
                    out.push((w, e - 1));
                }
            } else {
                out.push((w, e));
            }
        }
        found.then_some(Monomial(out))
    }
}

/// Sparse polynomial with rational coefficients; zero coefficients are never
/// stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn int(c: i64) -> Self {
        Poly::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn var(v: Var) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::var(v), BigRational::one());
        p
    }

    pub fn u(j: usize) -> Self {
        Poly::var(Var::U(j))
    }

    pub fn sum_u(js: impl IntoIterator<Item = usize>) -> Self {
        js.into_iter().fold(Poly::zero(), |acc, j| acc.add(&Poly::u(j)))
    }

    pub fn from_terms<'a>(terms: impl IntoIterator<Item = (&'a Monomial, &'a BigRational)>) -> Self {
        let mut p = Poly::zero();
        for (m, c) in terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }

    /// Coefficient of `m`, zero when absent.
    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        self.scale(&-BigRational::one())
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    /// The constant polynomial's value, if this is one (zero included).
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn constant_term(&self) -> BigRational {
        self.terms.get(&Monomial::one()).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Nonempty with every coefficient positive. Such a polynomial is zero on
    /// the nonnegative orthant exactly when each of its monomials is.
    pub fn is_positive(&self) -> bool {
        !self.terms.is_empty() && self.terms.values().all(|c| c.is_positive())
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.keys().flat_map(|m| m.vars()).collect()
    }

    pub fn eps_indices(&self) -> BTreeSet<u32> {
        self.vars()
            .into_iter()
            .filter_map(|v| match v {
                Var::Eps(i) => Some(i),
                Var::U(_) => None,
            })
            .collect()
    }

    pub fn u_indices(&self) -> BTreeSet<usize> {
        self.vars()
            .into_iter()
            .filter_map(|v| match v {
                Var::U(j) => Some(j),
                Var::Eps(_) => None,
            })
            .collect()
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.0.iter().map(|(_, e)| e).sum()).max().unwrap_or(0)
    }

    /// Whether every monomial has total degree at most one.
    pub fn is_linear(&self) -> bool {
        self.max_degree() <= 1
    }

    /// Writes `self = a + b * v` when `v` occurs at most linearly.
    pub fn split_linear(&self, v: Var) -> Option<(Poly, Poly)> {
        let mut a = Poly::zero();
        let mut b = Poly::zero();
        for (m, c) in &self.terms {
            match m.degree_in(v) {
                0 => a.add_term(m.clone(), c.clone()),
                1 => b.add_term(m.without_one(v)?, c.clone()),
                _ => return None,
            }
        }
        Some((a, b))
    }

    pub fn derivative(&self, v: Var) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.degree_in(v);
            if e > 0 {
                out.add_term(m.without_one(v).expect("degree checked"), c * BigRational::from_integer(e.into()));
            }
        }
        out
    }

    /// Replaces variables by exact values; unmapped variables stay.
    pub fn substitute(&self, value: &dyn Fn(Var) -> Option<BigRational>) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut coef = c.clone();
            let mut rest = Vec::new();
            for &(v, e) in &m.0 {
                match value(v) {
                    Some(x) => coef *= pow(&x, e),
                    None => rest.push((v, e)),
                }
            }
            out.add_term(Monomial(rest), coef);
        }
        out
    }

    /// Replaces every tolerance variable by its value in `tau`; a missing
    /// index is left symbolic.
    pub fn substitute_tau(&self, tau: &ToleranceVector) -> Poly {
        self.substitute(&|v| match v {
            Var::Eps(i) => tau.get(i).cloned(),
            Var::U(_) => None,
        })
    }

    pub fn eval_exact(&self, value: &dyn Fn(Var) -> BigRational) -> BigRational {
        self.terms
            .iter()
            .map(|(m, c)| m.0.iter().fold(c.clone(), |acc, (v, e)| acc * pow(&value(*v), *e)))
            .fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn eval_f64(&self, value: &dyn Fn(Var) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| m.0.iter().fold(to_f64(c), |acc, (v, e)| acc * value(*v).powi(*e as i32)))
            .sum()
    }

    /// Evaluates at a simplex point with tolerance values from `eps`.
    pub fn eval_u(&self, u: &[f64], eps: &dyn Fn(u32) -> f64) -> f64 {
        self.eval_f64(&|v| match v {
            Var::U(j) => u[j],
            Var::Eps(i) => eps(i),
        })
    }

    /// Builds an expression tree, mapping each variable through `leaf`.
    pub fn to_expr(&self, leaf: &dyn Fn(Var) -> Expr) -> Expr {
        if self.terms.is_empty() {
            return Expr::num(0);
        }
        let mut out: Option<Expr> = None;
        for (m, c) in &self.terms {
            let negative = out.is_some() && c.is_negative();
            let mag = if negative { -c.clone() } else { c.clone() };
            let mut factors: Vec<Expr> = Vec::new();
            if !mag.is_one() || m.is_constant() {
                factors.push(Expr::Num(mag));
            }
            for &(v, e) in &m.0 {
                for _ in 0..e {
                    factors.push(leaf(v));
                }
            }
            let term = factors.into_iter().reduce(Expr::mul).expect("at least one factor");
            out = Some(match out {
                None => term,
                Some(acc) if negative => Expr::sub(acc, term),
                Some(acc) => Expr::add(acc, term),
            });
        }
        out.expect("nonempty")
    }

    /// Text rendering with `u1..uK` (1-based) and `e<i>` names.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

fn pow(x: &BigRational, e: u32) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * x)
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::U(j) => write!(f, "u{}", j + 1),
            Var::Eps(i) => write!(f, "e{i}"),
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Constant term last reads more naturally: `u1 + u2 - 1`.
        let mut order: Vec<_> = self.terms.iter().filter(|(m, _)| !m.is_constant()).collect();
        order.extend(self.terms.iter().filter(|(m, _)| m.is_constant()));
        for (k, (m, c)) in order.into_iter().enumerate() {
            let mag = c.abs();
            match (k, c.is_negative()) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut parts: Vec<String> = Vec::new();
            if !mag.is_one() || m.is_constant() {
                parts.push(format_rational(&mag));
            }
            for (v, e) in &m.0 {
                parts.push(if *e == 1 { v.to_string() } else { format!("{v}^{e}") });
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rational::rat;

    #[test]
    fn arithmetic_collects_and_cancels() {
        let p = Poly::u(0).add(&Poly::u(1));
        let q = p.sub(&Poly::u(1));
        assert_eq!(q, Poly::u(0));
        assert!(p.sub(&p).is_empty());
        let sq = p.mul(&p);
        assert_eq!(sq.len(), 3);
        assert_eq!(sq.to_string(), "2*u1*u2 + u1^2 + u2^2");
    }

    #[test]
    fn positivity_and_constants() {
        assert!(Poly::u(0).add(&Poly::int(2)).is_positive());
        assert!(!Poly::zero().is_positive());
        assert!(!Poly::u(0).sub(&Poly::int(1)).is_positive());
        assert_eq!(Poly::int(3).as_constant(), Some(rat(3, 1)));
        assert_eq!(Poly::u(2).as_constant(), None);
    }

    #[test]
    fn split_in_tolerance() {
        let e = Poly::var(Var::Eps(1));
        let p = Poly::u(0).sub(&e.mul(&Poly::u(1)));
        let (a, b) = p.split_linear(Var::Eps(1)).unwrap();
        assert_eq!(a, Poly::u(0));
        assert_eq!(b, Poly::u(1).neg());
        assert!(e.mul(&e).split_linear(Var::Eps(1)).is_none());
    }

    #[test]
    fn evaluation_and_substitution() {
        let p = Poly::u(0).scale(&rat(3, 1)).sub(&Poly::int(1)).sub(&Poly::var(Var::Eps(2)));
        let tau = ToleranceVector::new([(2, rat(1, 10))]).unwrap();
        let q = p.substitute_tau(&tau);
        assert_eq!(q.to_string(), "3*u1 - 1.1");
        assert!((p.eval_u(&[0.5, 0.5], &|_| 0.1) - 0.4).abs() < 1e-12);
        assert_eq!(q.derivative(Var::U(0)), Poly::int(3));
    }
}
