use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::canon::flatten::flatten;
use crate::canon::poly::{Monomial, Poly, Var};
use crate::canon::translate::to_exact;
use crate::error::{Error, Result};
use crate::model::atoms::eval_unary_qf;
use crate::model::{atom_formula, atom_indices, CmpOp, Expr, Formula, Term, Vocabulary};
use crate::parser::print_formula;

/// Disjunct count past which normalization gives up.
pub const MAX_DISJUNCTS: usize = 100_000;
/// Atom tuples enumerated for one proportion term.
const MAX_TUPLES: usize = 1 << 20;
/// Search nodes spent deciding whether a tolerance bound needs an exact
/// companion constraint; past this the constraint is kept.
const MAX_HITTING_NODES: usize = 4096;

/// One conjunct of a canonical disjunct. Polynomials range over atomic
/// proportions `u_j` (0-based) and tolerance variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lit {
    /// `t' = 0`
    Zero(Poly),
    /// `t' > 0`
    Positive(Poly),
    /// `t <= t' * eps[i]`, or its negation when `holds` is false. A
    /// nonconstant `t'` is always accompanied by `Positive(t')`.
    Tol { t: Poly, tp: Poly, eps: u32, holds: bool },
    /// `t <= 0` or its negation, for exact comparisons that survive
    /// simplification.
    Exact { t: Poly, holds: bool },
    /// `exists x A_j(x)`
    Exists(usize),
    /// `!exists x A_j(x)`
    NotExists(usize),
    /// `A_j(c)`
    Member { c: String, atom: usize },
}

pub type Conj = BTreeSet<Lit>;

/// A formula in canonical form: a disjunction of conjunctions of literals.
/// No disjuncts means `false`; the one-disjunct form `0 = 0` is `true`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    vocab: Vocabulary,
    disjuncts: Vec<Conj>,
}

impl CanonicalForm {
    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn disjuncts(&self) -> &[Conj] {
        &self.disjuncts
    }

    pub fn is_false(&self) -> bool {
        self.disjuncts.is_empty()
    }

    /// Tolerance indices mentioned by any literal.
    pub fn tolerance_indices(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        for lit in self.disjuncts.iter().flatten() {
            match lit {
                Lit::Tol { eps, .. } => {
                    out.insert(*eps);
                }
                Lit::Zero(p) | Lit::Positive(p) | Lit::Exact { t: p, .. } => out.extend(p.eps_indices()),
                _ => {}
            }
        }
        out
    }

    /// The canonical form as an exact formula, with `[[A_j]]` written as
    /// `||A_j(x)||_{x}`.
    pub fn to_formula(&self) -> Formula {
        let x = self.var_name();
        Formula::disj(self.disjuncts.iter().map(|conj| Formula::conj(conj.iter().map(|l| self.lit_formula(l, &x)))))
    }

    fn var_name(&self) -> String {
        let taken = |s: &str| self.vocab.is_constant(s) || self.vocab.arity(s).is_some();
        std::iter::once("x".to_string())
            .chain((1..).map(|i| format!("x{i}")))
            .find(|s| !taken(s))
            .expect("unbounded supply")
    }

    fn lit_formula(&self, lit: &Lit, x: &str) -> Formula {
        let v = Term::Var(x.to_string());
        let leaf = |var: Var| match var {
            Var::U(j) => Expr::Prop { body: Box::new(atom_formula(&self.vocab, j, &v)), vars: vec![x.to_string()] },
            Var::Eps(i) => Expr::Tol(i),
        };
        let e = |p: &Poly| p.to_expr(&leaf);
        let zero = Expr::num(0);
        match lit {
            Lit::Zero(p) => Formula::compare(e(p), CmpOp::Eq, zero),
            Lit::Positive(p) => Formula::not(Formula::compare(e(p), CmpOp::Leq, zero)),
            Lit::Tol { t, tp, eps, holds } => {
                let rhs = match tp.as_constant() {
                    Some(c) if c == num_traits::One::one() => Expr::Tol(*eps),
                    _ => Expr::mul(e(tp), Expr::Tol(*eps)),
                };
                let f = Formula::compare(e(t), CmpOp::Leq, rhs);
                if *holds {
                    f
                } else {
                    Formula::not(f)
                }
            }
            Lit::Exact { t, holds } => {
                let f = Formula::compare(e(t), CmpOp::Leq, zero);
                if *holds {
                    f
                } else {
                    Formula::not(f)
                }
            }
            Lit::Exists(j) => Formula::exists(x, atom_formula(&self.vocab, *j, &v)),
            Lit::NotExists(j) => Formula::not(Formula::exists(x, atom_formula(&self.vocab, *j, &v))),
            Lit::Member { c, atom } => atom_formula(&self.vocab, *atom, &Term::Const(c.clone())),
        }
    }
}

impl std::fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", print_formula(&self.to_formula()))
    }
}

/// Canonical form of a unary knowledge base: flatten, translate to exact
/// comparisons, rewrite proportions over atoms, then normalize to DNF with
/// inconsistent disjuncts dropped.
pub fn to_canonical(kb: &Formula, vocab: &Vocabulary) -> Result<CanonicalForm> {
    if let Some(r) = kb.relation_symbols().into_iter().next() {
        return Err(Error::NonUnary(r));
    }
    if kb.has_equality() {
        return Err(Error::Restriction("equality".into()));
    }
    let exact = to_exact(&flatten(kb)?);
    let cx = Ctx { vocab };
    let dnf = cx.dnf(&exact, true)?;
    let mut disjuncts: Vec<Conj> = remove_subsumed(dnf.into_iter().collect());
    for conj in &mut disjuncts {
        if conj.is_empty() {
            conj.insert(Lit::Zero(Poly::zero()));
        }
    }
    Ok(CanonicalForm { vocab: vocab.clone(), disjuncts })
}

type Dnf = BTreeSet<Conj>;

fn truth(b: bool) -> Dnf {
    if b {
        BTreeSet::from([Conj::new()])
    } else {
        Dnf::new()
    }
}

fn single(lit: Lit) -> Dnf {
    normalize(Conj::from([lit])).map_or_else(Dnf::new, |c| BTreeSet::from([c]))
}

fn union(mut a: Dnf, b: Dnf) -> Result<Dnf> {
    a.extend(b);
    check_size(&a)?;
    Ok(a)
}

fn product(a: &Dnf, b: &Dnf) -> Result<Dnf> {
    let mut out = Dnf::new();
    for x in a {
        for y in b {
            let mut c = x.clone();
            c.extend(y.iter().cloned());
            if let Some(c) = normalize(c) {
                out.insert(c);
            }
        }
        check_size(&out)?;
    }
    Ok(out)
}

fn check_size(d: &Dnf) -> Result<()> {
    if d.len() > MAX_DISJUNCTS {
        return Err(Error::Capacity(format!("canonical form exceeds {MAX_DISJUNCTS} disjuncts")));
    }
    Ok(())
}

/// Drops a disjunct when a strict subset of its literals is also a disjunct.
fn remove_subsumed(all: Vec<Conj>) -> Vec<Conj> {
    if all.len() > 5_000 {
        return all;
    }
    all.iter()
        .filter(|c| !all.iter().any(|d| d.len() < c.len() && d.is_subset(c)))
        .cloned()
        .collect()
}

/// Simplifies a conjunction; `None` when it is detectably inconsistent.
fn normalize(conj: Conj) -> Option<Conj> {
    let mut out = Conj::new();
    for lit in conj {
        match &lit {
            Lit::Zero(p) => match p.as_constant() {
                Some(c) if c.is_zero() => continue,
                Some(_) => return None,
                None => {}
            },
            Lit::Positive(p) => match p.as_constant() {
                Some(c) if c.is_positive() => continue,
                Some(_) => return None,
                None if p.is_positive() && p.constant_term().is_positive() => continue,
                None => {}
            },
            _ => {}
        }
        out.insert(lit);
    }
    consistent(&out).then_some(out)
}

/// Cheap sufficient checks for inconsistency, using that every `u_j` is
/// nonnegative and the `Zero`/`Positive` polynomials are positive ones.
fn consistent(conj: &Conj) -> bool {
    let mut member: Vec<(&str, usize)> = Vec::new();
    let mut required: BTreeSet<Var> = BTreeSet::new();
    let mut zero_monos: Vec<BTreeSet<Var>> = Vec::new();
    for lit in conj {
        match lit {
            Lit::Member { c, atom } => {
                if member.iter().any(|(d, a)| *d == c.as_str() && a != atom) {
                    return false;
                }
                member.push((c, *atom));
                required.insert(Var::U(*atom));
            }
            Lit::Exists(j) => {
                required.insert(Var::U(*j));
            }
            Lit::NotExists(j) => zero_monos.push(BTreeSet::from([Var::U(*j)])),
            Lit::Zero(p) if p.is_positive() => zero_monos.extend(p.monomials().map(var_set)),
            Lit::Positive(p) if p.is_positive() && p.len() == 1 => {
                required.extend(p.monomials().flat_map(|m| m.vars()));
            }
            _ => {}
        }
    }
    if zero_monos.iter().any(|z| z.is_subset(&required)) {
        return false;
    }
    let vanishes = |p: &Poly| p.monomials().all(|m| zero_monos.iter().any(|z| z.is_subset(&var_set(m))));
    !conj.iter().any(|lit| matches!(lit, Lit::Positive(p) if p.is_positive() && vanishes(p)))
}

fn var_set(m: &Monomial) -> BTreeSet<Var> {
    m.vars().collect()
}

struct Ctx<'a> {
    vocab: &'a Vocabulary,
}

impl Ctx<'_> {
    /// DNF of `f` when `positive`, of its negation otherwise.
    fn dnf(&self, f: &Formula, positive: bool) -> Result<Dnf> {
        match f {
            Formula::True => Ok(truth(positive)),
            Formula::False => Ok(truth(!positive)),
            Formula::Not(a) => self.dnf(a, !positive),
            Formula::And(a, b) | Formula::Or(a, b) => {
                let (x, y) = (self.dnf(a, positive)?, self.dnf(b, positive)?);
                if matches!(f, Formula::And(..)) == positive {
                    product(&x, &y)
                } else {
                    union(x, y)
                }
            }
            Formula::Implies(a, b) => {
                let (x, y) = (self.dnf(a, !positive)?, self.dnf(b, positive)?);
                if positive {
                    union(x, y)
                } else {
                    product(&x, &y)
                }
            }
            Formula::Atom { pred, args } => {
                let Some(i) = self.vocab.predicate_index(pred).filter(|_| args.len() == 1) else {
                    return Err(Error::NonUnary(pred.clone()));
                };
                let Term::Const(c) = &args[0] else {
                    return Err(Error::Invalid(format!("free variable `{}`", args[0].name())));
                };
                let atoms = (0..self.vocab.num_atoms()).filter(|&j| self.vocab.atom(j).holds(i) == positive);
                Ok(atoms.map(|atom| Conj::from([Lit::Member { c: c.clone(), atom }])).collect())
            }
            Formula::Eq(..) => Err(Error::Restriction("equality".into())),
            Formula::Exists(_, body) | Formula::Forall(_, body) => {
                let inside: BTreeSet<usize> = atom_indices(body, self.vocab)?.into_iter().collect();
                let all = 0..self.vocab.num_atoms();
                // forall x b is !exists x !b.
                let (witnesses, flip): (Vec<usize>, bool) = if matches!(f, Formula::Exists(..)) {
                    (inside.into_iter().collect(), false)
                } else {
                    (all.filter(|j| !inside.contains(j)).collect(), true)
                };
                if positive != flip {
                    Ok(witnesses.into_iter().map(|j| Conj::from([Lit::Exists(j)])).collect())
                } else {
                    let conj: Conj = witnesses.into_iter().map(Lit::NotExists).collect();
                    Ok(normalize(conj).into_iter().collect())
                }
            }
            Formula::Compare { lhs, op, rhs } => {
                let p = self.poly(lhs)?.sub(&self.poly(rhs)?);
                match op {
                    CmpOp::Leq => leq(&p, positive),
                    CmpOp::Eq if positive => product(&leq(&p, true)?, &leq(&p.neg(), true)?),
                    CmpOp::Eq => union(leq(&p, false)?, leq(&p.neg(), false)?),
                    CmpOp::Approx(_) | CmpOp::ApproxLeq(_) => {
                        Err(Error::Invalid("approximate comparison after translation".into()))
                    }
                }
            }
        }
    }

    fn poly(&self, e: &Expr) -> Result<Poly> {
        Ok(match e {
            Expr::Num(r) => Poly::constant(r.clone()),
            Expr::Tol(i) => Poly::var(Var::Eps(*i)),
            Expr::Add(a, b) => self.poly(a)?.add(&self.poly(b)?),
            Expr::Sub(a, b) => self.poly(a)?.sub(&self.poly(b)?),
            Expr::Mul(a, b) => self.poly(a)?.mul(&self.poly(b)?),
            Expr::Prop { body, vars } => self.proportion(body, vars)?,
            Expr::Cond { .. } => return Err(Error::Invalid("conditional proportion after translation".into())),
        })
    }

    /// `||body||_vars` as a sum over atom tuples: variables are independent,
    /// so each satisfying tuple contributes the product of its atoms'
    /// proportions. Bound variables that do not occur contribute a factor 1.
    fn proportion(&self, body: &Formula, vars: &[String]) -> Result<Poly> {
        let free = body.free_vars();
        if let Some(v) = free.iter().find(|v| !vars.contains(v)) {
            return Err(Error::Invalid(format!("proportion body mentions `{v}` outside its binder")));
        }
        if body.has_quantifiers() || body.has_proportions() || !body.constants().is_empty() {
            return Err(Error::Invalid("proportion body is not flat".into()));
        }
        let occ: Vec<&String> = vars.iter().filter(|v| free.contains(*v)).collect();
        let k = self.vocab.num_atoms();
        let tuples = (0..occ.len()).try_fold(1usize, |acc, _| acc.checked_mul(k)).filter(|&t| t <= MAX_TUPLES);
        let Some(tuples) = tuples else {
            return Err(Error::Capacity(format!("{} atoms to the power {}", k, occ.len())));
        };
        let mut out = Poly::zero();
        let mut js = vec![0usize; occ.len()];
        for mut code in 0..tuples {
            for slot in js.iter_mut().rev() {
                *slot = code % k;
                code /= k;
            }
            let atom_of = |t: &Term| -> Result<usize> {
                let pos = occ.iter().position(|v| v.as_str() == t.name());
                pos.map(|p| js[p]).ok_or_else(|| Error::Invalid(format!("unexpected term `{}`", t.name())))
            };
            if eval_unary_qf(body, self.vocab, &atom_of, &|_, _| Err(Error::Restriction("equality".into())))? {
                out = out.add(&js.iter().fold(Poly::int(1), |acc, &j| acc.mul(&Poly::u(j))));
            }
        }
        Ok(out)
    }
}

/// DNF of `p <= 0` (or its negation) over nonnegative `u` and positive
/// tolerances.
fn leq(p: &Poly, positive: bool) -> Result<Dnf> {
    let eps = p.eps_indices();
    if eps.len() > 1 {
        return Err(Error::TolerancePlacement(format!("`{p} <= 0` mixes several tolerance variables")));
    }
    let Some(&i) = eps.iter().next() else {
        return Ok(exact_leq(p, positive));
    };
    let placement = || Error::TolerancePlacement(format!("`{p} <= 0` is not of the form t <= t' * e{i}"));
    let (a, b) = p.split_linear(Var::Eps(i)).ok_or_else(placement)?;
    // p = a + b*eps, so p <= 0 reads a <= t' * eps with t' = -b.
    let tp = b.neg();
    if !tp.is_positive() {
        return Err(placement());
    }
    if a.is_empty() || a.neg().is_positive() {
        return Ok(truth(positive));
    }
    let tol = Lit::Tol { t: a.clone(), tp: tp.clone(), eps: i, holds: positive };
    if tp.as_constant().is_some() {
        return Ok(single(tol));
    }
    let main = single_conj([Lit::Positive(tp.clone()), tol]);
    let mut out = main;
    if !forced_zero(&a, &tp) {
        out = union(out, product(&single(Lit::Zero(tp.clone())), &exact_leq(&a, positive))?)?;
    } else if positive {
        out = union(out, single(Lit::Zero(tp)))?;
    }
    Ok(out)
}

fn single_conj<const N: usize>(lits: [Lit; N]) -> Dnf {
    normalize(Conj::from(lits)).map_or_else(Dnf::new, |c| BTreeSet::from([c]))
}

/// DNF of `p <= 0` for a tolerance-free polynomial.
fn exact_leq(p: &Poly, positive: bool) -> Dnf {
    if let Some(c) = p.as_constant() {
        return truth((!c.is_positive()) == positive);
    }
    if p.is_positive() {
        // A positive polynomial is <= 0 exactly when it is 0.
        return single(if positive { Lit::Zero(p.clone()) } else { Lit::Positive(p.clone()) });
    }
    if p.neg().is_positive() {
        return truth(positive);
    }
    single(Lit::Exact { t: p.clone(), holds: positive })
}

/// Whether `a` vanishes wherever the positive polynomial `b` does, on the
/// nonnegative orthant. `b` vanishes exactly when some set of variables
/// hitting each of its monomials is zero.
fn forced_zero(a: &Poly, b: &Poly) -> bool {
    let monos: Vec<BTreeSet<Var>> = b.monomials().map(var_set).collect();
    let a_monos: Vec<BTreeSet<Var>> = a.monomials().map(var_set).collect();
    let mut budget = MAX_HITTING_NODES;
    fn go(monos: &[BTreeSet<Var>], a: &[BTreeSet<Var>], hit: &mut BTreeSet<Var>, budget: &mut usize) -> bool {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        match monos.iter().find(|m| m.is_disjoint(hit)) {
            None => a.iter().all(|m| !m.is_disjoint(hit)),
            Some(m) => m.iter().all(|v| {
                hit.insert(*v);
                let ok = go(monos, a, hit, budget);
                hit.remove(v);
                ok
            }),
        }
    }
    go(&monos, &a_monos, &mut BTreeSet::new(), &mut budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rational::rat;
    use crate::parser::{parse_formula, Side};

    fn canon(vocab: &Vocabulary, s: &str) -> CanonicalForm {
        to_canonical(&parse_formula(s, vocab, Side::Kb).unwrap(), vocab).unwrap()
    }

    #[test]
    fn universal_plus_scaled_proportion() {
        let v = Vocabulary::unary(["P1", "P2"]).unwrap();
        let cf = canon(&v, "forall x P1(x) & 3 * ||P1(x) & P2(x)||_{x} <~[1] 1");
        assert_eq!(cf.disjuncts().len(), 1);
        let tol = Lit::Tol { t: Poly::u(0).scale(&rat(3, 1)).sub(&Poly::int(1)), tp: Poly::int(1), eps: 1, holds: true };
        let expect: Conj = [Lit::NotExists(2), Lit::NotExists(3), tol].into_iter().collect();
        assert_eq!(cf.disjuncts()[0], expect);
    }

    #[test]
    fn constant_fact_is_one_membership() {
        let v = Vocabulary::unary(["P"]).unwrap().with_constants(["c"]).unwrap();
        let cf = canon(&v, "P(c)");
        assert_eq!(cf.disjuncts(), &[Conj::from([Lit::Member { c: "c".into(), atom: 0 }])]);
    }

    #[test]
    fn truth_and_falsity() {
        let v = Vocabulary::unary(["P"]).unwrap();
        assert_eq!(canon(&v, "true").to_string(), "0 = 0");
        assert!(canon(&v, "exists x P(x) & forall x !P(x)").is_false());
    }

    #[test]
    fn hepatitis_has_four_disjuncts() {
        let v = Vocabulary::unary(["Hepatitis", "Jaundice", "BlueEyed"]).unwrap().with_constants(["Eric"]).unwrap();
        let cf = canon(
            &v,
            "forall x (Hepatitis(x) -> Jaundice(x)) & ||Hepatitis(x) | Jaundice(x)||_{x} ~=[1] 0.8 \
             & ||BlueEyed(x)||_{x} ~=[2] 0.25 & Jaundice(Eric)",
        );
        assert_eq!(cf.disjuncts().len(), 4);
        let jaundiced = Poly::sum_u([0, 1, 4, 5]);
        for d in cf.disjuncts() {
            assert!(d.contains(&Lit::NotExists(2)) && d.contains(&Lit::NotExists(3)));
            assert!(d.contains(&Lit::Positive(jaundiced.clone())));
            assert_eq!(d.iter().filter(|l| matches!(l, Lit::Tol { .. })).count(), 4);
        }
        let eric: BTreeSet<usize> = cf
            .disjuncts()
            .iter()
            .flat_map(|d| d.iter().filter_map(|l| if let Lit::Member { atom, .. } = l { Some(*atom) } else { None }))
            .collect();
        assert_eq!(eric, BTreeSet::from([0, 1, 4, 5]));
    }

    #[test]
    fn reparse_is_idempotent() {
        let v = Vocabulary::unary(["P", "Q"]).unwrap().with_constants(["c"]).unwrap();
        for s in [
            "||P(x) | Q(x)||_{x} ~=[1] 0.3 & !Q(c)",
            "!(||P(x)||_{x} <~[1] 0.5) | exists y (P(y) & Q(c))",
            "||P(x) & Q(y)||_{x,y} <~[2] ||P(x)||_{x} * ||Q(x)||_{x}",
            "forall x (P(x) | Q(x)) & !(||Q(x) | P(x)||_{x} <~[1] 0.2)",
        ] {
            let once = canon(&v, s);
            let twice = to_canonical(&once.to_formula(), &v).unwrap();
            assert_eq!(once, twice, "{s}");
        }
    }

    #[test]
    fn same_worlds_as_the_input() {
        use crate::model::ToleranceVector;
        use crate::semantics::count_worlds;
        let v = Vocabulary::unary(["P", "Q"]).unwrap().with_constants(["c"]).unwrap();
        for s in [
            "||P(x) | Q(x)||_{x} ~=[1] 0.3 & !Q(c)",
            "!(||P(x) & Q(c)||_{x} <~[1] 0.5) | exists y (P(y) & Q(c))",
            "||P(x) & Q(y)||_{x,y} <~[2] ||P(x)||_{x} * ||Q(x)||_{x}",
            "!(||Q(x) | P(x)||_{x} ~=[1] 0.5) & forall x (P(x) | Q(c))",
        ] {
            let kb = parse_formula(s, &v, Side::Kb).unwrap();
            let cf = to_canonical(&kb, &v).unwrap().to_formula();
            let differ = Formula::or(
                Formula::and(kb.clone(), Formula::not(cf.clone())),
                Formula::and(Formula::not(kb.clone()), cf),
            );
            for t in [rat(1, 10), rat(3, 10)] {
                let tau = ToleranceVector::uniform(t).unwrap();
                for n in 1..=4 {
                    let r = count_worlds(&v, n, &tau, &differ, false).unwrap();
                    assert!(r.total.is_zero(), "{s} at N={n}");
                }
            }
        }
    }

    #[test]
    fn misplaced_tolerance_is_reported() {
        let v = Vocabulary::unary(["P"]).unwrap();
        let f = parse_formula("||P(x)||_{x} <= eps[1] * eps[2]", &v, Side::Kb).unwrap();
        assert!(matches!(to_canonical(&f, &v), Err(Error::TolerancePlacement(_))));
    }
}
