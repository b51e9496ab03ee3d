//! Polynomial constraint systems over atomic proportions.
//!
//! A canonical form becomes a disjunction of conjunctive cells of constraints
//! `p rel 0`, with `p` a polynomial in `u_1..u_K` and the tolerance variables.
//! Instantiating the tolerances gives the solution space whose closure the
//! entropy maximizer works over.

mod analysis;
mod print;
mod space;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::canon::{CanonicalForm, Lit, Poly, Var};
use crate::model::ToleranceVector;

pub use analysis::{
    check_eventual_consistency, check_stability, is_essentially_positive, is_safe, realize_world, ConsistencyReport,
    EssentialPositivity, Stability,
};
pub use space::{solution_space, RegionCell, RegionDescriptor};
pub(crate) use analysis::optional;

/// Coordinates at or below this count as zero when reading off a size
/// description.
pub const ZERO_THRESHOLD: f64 = 1e-9;

/// Relation of a constraint polynomial to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Rel {
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
}

impl Rel {
    pub fn is_strict(self) -> bool {
        matches!(self, Rel::Lt | Rel::Gt)
    }

    /// Closed relaxation.
    pub fn weakened(self) -> Rel {
        match self {
            Rel::Lt => Rel::Le,
            Rel::Gt => Rel::Ge,
            r => r,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    fn holds(self, x: f64, tol: f64) -> bool {
        match self {
            Rel::Eq => x.abs() <= tol,
            Rel::Le | Rel::Lt => x <= tol,
            Rel::Ge | Rel::Gt => x >= -tol,
        }
    }
}

/// Where a tolerance bound came from, kept so it can be printed as a bound
/// around its nominal value: `poly = t - tp * eps`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct TolShape {
    eps: u32,
    /// Printed as a lower bound; upper bounds sort first.
    lower: bool,
    t: Poly,
    tp: Poly,
    /// Value substituted for `eps`, once instantiated.
    value: Option<BigRational>,
}

/// `poly rel 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constraint {
    group: u8,
    shape: Option<TolShape>,
    pub poly: Poly,
    pub rel: Rel,
}

impl Constraint {
    pub fn new(poly: Poly, rel: Rel) -> Constraint {
        let group = match rel {
            Rel::Eq => 0,
            Rel::Gt if poly.is_positive() => 3,
            _ => 2,
        };
        Constraint { group, poly, rel, shape: None }
    }

    pub fn is_strict(&self) -> bool {
        self.rel.is_strict()
    }

    pub fn is_linear(&self) -> bool {
        self.poly.is_linear()
    }

    /// Residual test at a simplex point, treating strict relations as their
    /// closure.
    pub fn holds_at(&self, u: &[f64], tol: f64) -> bool {
        self.rel.holds(self.poly.eval_u(u, &|_| 0.0), tol)
    }

    /// Amount by which the closed form of the constraint fails at `u`.
    pub fn violation(&self, u: &[f64]) -> f64 {
        let x = self.poly.eval_u(u, &|_| 0.0);
        match self.rel {
            Rel::Eq => x.abs(),
            Rel::Le | Rel::Lt => x.max(0.0),
            Rel::Ge | Rel::Gt => (-x).max(0.0),
        }
    }

    /// Exact test at a rational point; strict relations are strict here.
    pub fn holds_exact(&self, u: &[BigRational]) -> bool {
        let x = self.poly.eval_exact(&|v| match v {
            Var::U(j) => u[j].clone(),
            Var::Eps(_) => BigRational::zero(),
        });
        match self.rel {
            Rel::Eq => x.is_zero(),
            Rel::Le => !x.is_positive(),
            Rel::Lt => x.is_negative(),
            Rel::Ge => !x.is_negative(),
            Rel::Gt => x.is_positive(),
        }
    }

    fn weakened(&self) -> Constraint {
        Constraint { rel: self.rel.weakened(), ..self.clone() }
    }

    /// Substitutes tolerance values. A constraint that becomes constant is
    /// returned as `Err` carrying its truth value.
    fn instantiate(&self, tau: &ToleranceVector) -> Result<Constraint, bool> {
        let poly = self.poly.substitute_tau(tau);
        if let Some(c) = poly.as_constant() {
            let ok = match self.rel {
                Rel::Eq => c.is_zero(),
                Rel::Le => !c.is_positive(),
                Rel::Lt => c.is_negative(),
                Rel::Ge => !c.is_negative(),
                Rel::Gt => c.is_positive(),
            };
            return Err(ok);
        }
        let shape = self.shape.as_ref().map(|s| TolShape {
            value: s.value.clone().or_else(|| tau.get(s.eps).cloned()),
            ..s.clone()
        });
        Ok(Constraint { poly, shape, ..self.clone() })
    }
}

/// A conjunctive cell, with the constant memberships of the canonical
/// disjunct it came from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub constraints: Vec<Constraint>,
    /// `(constant, atom)` pairs asserted by the disjunct.
    pub members: Vec<(String, usize)>,
}

impl Cell {
    fn normalize(&mut self) {
        self.constraints.sort();
        self.constraints.dedup();
        self.members.sort();
        self.members.dedup();
    }

    pub fn is_linear(&self) -> bool {
        self.constraints.iter().all(Constraint::is_linear)
    }

    pub fn has_tolerances(&self) -> bool {
        self.constraints.iter().any(|c| !c.poly.eps_indices().is_empty())
    }
}

/// A disjunction of conjunctive cells over `u_1..u_K`. No cells means false.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintFormula {
    num_atoms: usize,
    cells: Vec<Cell>,
}

impl ConstraintFormula {
    pub fn new(num_atoms: usize, cells: Vec<Cell>) -> ConstraintFormula {
        ConstraintFormula { num_atoms, cells }
    }

    pub fn num_atoms(&self) -> usize {
        self.num_atoms
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn is_false(&self) -> bool {
        self.cells.is_empty()
    }

    /// Substitutes tolerance values, dropping constraints that become true
    /// and cells that become false. Indices missing from `tau` stay symbolic.
    pub fn instantiate(&self, tau: &ToleranceVector) -> ConstraintFormula {
        let cells = self
            .cells
            .iter()
            .filter_map(|cell| {
                let mut out = Vec::new();
                for c in &cell.constraints {
                    match c.instantiate(tau) {
                        Ok(c) => out.push(c),
                        Err(true) => {}
                        Err(false) => return None,
                    }
                }
                let mut cell = Cell { constraints: out, members: cell.members.clone() };
                cell.normalize();
                Some(cell)
            })
            .collect();
        ConstraintFormula { num_atoms: self.num_atoms, cells }
    }

    /// Every strict relation replaced by its closure, tolerances left alone.
    pub fn relaxed(&self) -> ConstraintFormula {
        let cells = self
            .cells
            .iter()
            .map(|cell| Cell {
                constraints: cell.constraints.iter().map(Constraint::weakened).collect(),
                members: cell.members.clone(),
            })
            .collect();
        ConstraintFormula { num_atoms: self.num_atoms, cells }
    }

    /// Equivalent system for display: memberships dropped, duplicate cells
    /// removed, and cells differing only in a single `u_j > 0` merged into
    /// one cell with the sum of those proportions positive.
    pub fn simplified(&self) -> ConstraintFormula {
        let mut cells: Vec<Cell> = self
            .cells
            .iter()
            .map(|c| {
                let mut c = Cell { constraints: c.constraints.clone(), members: vec![] };
                c.normalize();
                c
            })
            .collect();
        cells.sort();
        cells.dedup();
        while let Some(merged) = merge_once(&cells) {
            cells = merged;
            cells.sort();
            cells.dedup();
        }
        ConstraintFormula { num_atoms: self.num_atoms, cells }
    }
}

/// Index of `u_j` when `c` reads `u_j > 0`.
fn single_positive(c: &Constraint) -> Option<usize> {
    if c.rel != Rel::Gt || c.poly.len() != 1 {
        return None;
    }
    let (m, coef) = c.poly.terms().next()?;
    match (m.as_single(), coef.is_positive()) {
        (Some(Var::U(j)), true) => Some(j),
        _ => None,
    }
}

fn merge_once(cells: &[Cell]) -> Option<Vec<Cell>> {
    let mut groups: BTreeMap<Vec<Constraint>, Vec<(usize, usize)>> = BTreeMap::new();
    for (ci, cell) in cells.iter().enumerate() {
        for (k, c) in cell.constraints.iter().enumerate() {
            if let Some(j) = single_positive(c) {
                let mut rest = cell.constraints.clone();
                rest.remove(k);
                groups.entry(rest).or_default().push((ci, j));
            }
        }
    }
    for (rest, members) in groups {
        let mut idx: Vec<usize> = members.iter().map(|&(ci, _)| ci).collect();
        idx.sort();
        idx.dedup();
        if idx.len() < 2 || idx.len() != members.len() {
            continue;
        }
        let mut constraints = rest;
        constraints.push(Constraint::new(Poly::sum_u(members.iter().map(|&(_, j)| j)), Rel::Gt));
        let mut merged = Cell { constraints, members: vec![] };
        merged.normalize();
        let mut out: Vec<Cell> = cells.iter().enumerate().filter(|(i, _)| !idx.contains(i)).map(|(_, c)| c.clone()).collect();
        out.push(merged);
        return Some(out);
    }
    None
}

/// The constraint system of a canonical form: memberships and existence
/// assertions become positivity of the atom's proportion, nonexistence
/// becomes a zero proportion, tolerance bounds keep their `eps` variable.
pub fn gamma(cf: &CanonicalForm) -> ConstraintFormula {
    let k = cf.vocab().num_atoms();
    let cells = cf
        .disjuncts()
        .iter()
        .map(|conj| {
            let mut cell = Cell { constraints: Vec::new(), members: Vec::new() };
            for lit in conj {
                let c = match lit {
                    Lit::Zero(p) => Constraint::new(p.clone(), Rel::Eq),
                    Lit::Positive(p) => Constraint::new(p.clone(), Rel::Gt),
                    Lit::Tol { t, tp, eps, holds } => {
                        let poly = t.sub(&tp.mul(&Poly::var(Var::Eps(*eps))));
                        let rel = if *holds { Rel::Le } else { Rel::Gt };
                        let mut shape = TolShape { eps: *eps, lower: false, t: t.clone(), tp: tp.clone(), value: None };
                        shape.lower = print::bound_form(&shape).is_some_and(|b| b.lower);
                        Constraint { group: 1, poly, rel, shape: Some(shape) }
                    }
                    Lit::Exact { t, holds } => Constraint::new(t.clone(), if *holds { Rel::Le } else { Rel::Gt }),
                    Lit::Exists(j) => Constraint::new(Poly::u(*j), Rel::Gt),
                    Lit::NotExists(j) => Constraint::new(Poly::u(*j), Rel::Eq),
                    Lit::Member { c, atom } => {
                        cell.members.push((c.clone(), *atom));
                        Constraint::new(Poly::u(*atom), Rel::Gt)
                    }
                };
                cell.constraints.push(c);
            }
            cell.normalize();
            cell
        })
        .collect();
    ConstraintFormula { num_atoms: k, cells }
}

/// The weakened system at zero tolerance: tolerances set to zero and every
/// strict inequality closed.
pub fn gamma_weakened(cf: &CanonicalForm) -> ConstraintFormula {
    gamma(cf).instantiate(&ToleranceVector::zero()).relaxed()
}

/// Which atoms a point populates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SizeDescription(pub Vec<bool>);

impl SizeDescription {
    /// Atom `j` exists iff `u_j` exceeds [`ZERO_THRESHOLD`].
    pub fn of(u: &[f64]) -> SizeDescription {
        SizeDescription(u.iter().map(|&x| x > ZERO_THRESHOLD).collect())
    }

    pub fn exists(&self, j: usize) -> bool {
        self.0[j]
    }

    /// Indices of populated atoms.
    pub fn populated(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&j| self.0[j]).collect()
    }
}

impl fmt::Display for SizeDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .map(|(j, &e)| format!("{}exists x A{}(x)", if e { "" } else { "!" }, j + 1))
            .collect();
        write!(f, "{}", parts.join(" & "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::to_canonical;
    use crate::model::rational::rat;
    use crate::model::Vocabulary;
    use crate::parser::{parse_formula, Side};

    fn gamma_of(vocab: &Vocabulary, kb: &str) -> ConstraintFormula {
        let f = parse_formula(kb, vocab, Side::Kb).unwrap();
        gamma(&to_canonical(&f, vocab).unwrap())
    }

    fn lines(cf: &ConstraintFormula) -> Vec<String> {
        cf.to_string().lines().map(str::to_string).collect()
    }

    pub(crate) fn hepatitis() -> (Vocabulary, String) {
        let v = Vocabulary::unary(["Hep", "Jaun", "Blue"]).unwrap().with_constants(["Eric"]).unwrap();
        let kb = "forall x (Hep(x) -> Jaun(x)) & ||Hep(x) | Jaun(x)||_{x} ~=[1] 0.8 \
                  & ||Blue(x)||_{x} ~=[2] 0.25 & Jaun(Eric)";
        (v, kb.to_string())
    }

    #[test]
    fn hepatitis_is_the_seven_constraint_system() {
        let (v, kb) = hepatitis();
        let g = gamma_of(&v, &kb);
        assert_eq!(g.cells().len(), 4);
        let s = g.simplified();
        assert_eq!(
            lines(&s),
            vec![
                "u3 = 0",
                "u4 = 0",
                "u1 + u2 <= (0.8 + e1)*(u1 + u2 + u5 + u6)",
                "u1 + u2 >= (0.8 - e1)*(u1 + u2 + u5 + u6)",
                "u1 + u3 + u5 + u7 <= 0.25 + e2",
                "u1 + u3 + u5 + u7 >= 0.25 - e2",
                "u1 + u2 + u5 + u6 > 0",
            ]
        );
    }

    #[test]
    fn universal_plus_scaled_proportion() {
        let v = Vocabulary::unary(["P1", "P2"]).unwrap();
        let g = gamma_of(&v, "forall x P1(x) & 3 * ||P1(x) & P2(x)||_{x} <~[1] 1");
        assert_eq!(lines(&g), vec!["u3 = 0", "u4 = 0", "3*u1 <= 1 + e1"]);
        let tau = ToleranceVector::new([(1, rat(1, 10))]).unwrap();
        let inst = g.instantiate(&tau);
        assert_eq!(lines(&inst), vec!["u3 = 0", "u4 = 0", "3*u1 <= 1.1"]);
        let inside = [rat(11, 30), rat(19, 30), rat(0, 1), rat(0, 1)];
        let outside = [rat(12, 30), rat(18, 30), rat(0, 1), rat(0, 1)];
        assert!(inst.cells()[0].constraints.iter().all(|c| c.holds_exact(&inside)));
        assert!(!inst.cells()[0].constraints.iter().all(|c| c.holds_exact(&outside)));
    }

    #[test]
    fn membership_is_positivity() {
        let v = Vocabulary::unary(["P"]).unwrap().with_constants(["c"]).unwrap();
        let g = gamma_of(&v, "!P(c)");
        assert_eq!(lines(&g), vec!["u2 > 0"]);
        assert_eq!(g.cells()[0].members, vec![("c".to_string(), 1)]);
    }

    #[test]
    fn weakening_closes_strict_relations() {
        let v = Vocabulary::unary(["P"]).unwrap();
        let f = parse_formula("(||P(x)||_{x} ~=[1] 0.3 | ||P(x)||_{x} ~=[2] 0.4) & !(||P(x)||_{x} ~=[3] 0.4)", &v, Side::Kb)
            .unwrap();
        let cf = to_canonical(&f, &v).unwrap();
        let w = gamma_weakened(&cf);
        for cell in w.cells() {
            assert!(cell.constraints.iter().all(|c| !c.is_strict() && c.poly.eps_indices().is_empty()));
        }
        let holds = |x: f64| w.cells().iter().any(|c| c.constraints.iter().all(|k| k.holds_at(&[x, 1.0 - x], 1e-12)));
        assert!(holds(0.3) && holds(0.4));
        assert!(!holds(0.35) && !holds(0.5));
    }

    #[test]
    fn size_descriptions() {
        assert_eq!(SizeDescription::of(&[0.0, 1.0]).to_string(), "!exists x A1(x) & exists x A2(x)");
        assert_eq!(SizeDescription::of(&[0.25; 4]).populated(), vec![0, 1, 2, 3]);
        assert_eq!(SizeDescription::of(&[1e-3, 1.0 - 1e-3]).populated(), vec![0, 1]);
    }
}
