use std::collections::BTreeSet;

use num_rational::BigRational;

/// A term: a variable or a constant symbol. There are no function symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Var(n) | Term::Const(n) => n,
        }
    }

    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(name.to_string())
    }
}

/// Comparison operators. `Approx(i)` and `ApproxLeq(i)` carry a tolerance index;
/// `Eq` and `Leq` are the exact comparisons of the translated language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Approx(u32),
    ApproxLeq(u32),
    Eq,
    Leq,
}

impl CmpOp {
    pub fn is_approximate(&self) -> bool {
        matches!(self, CmpOp::Approx(_) | CmpOp::ApproxLeq(_))
    }

    pub fn tolerance_index(&self) -> Option<u32> {
        match self {
            CmpOp::Approx(i) | CmpOp::ApproxLeq(i) => Some(*i),
            _ => None,
        }
    }
}

/// Proportion expressions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Num(BigRational),
    /// Tolerance variable `eps[i]`; only present after translation to exact form.
    Tol(u32),
    /// `||body||_{vars}`
    Prop { body: Box<Formula>, vars: Vec<String> },
    /// `||body | given||_{vars}`
    Cond { body: Box<Formula>, given: Box<Formula>, vars: Vec<String> },
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

/// Formulas of the first-order language extended with proportion comparisons.
///
/// `Or`, `Implies` and `Forall` are kept for faithful printing; the
/// canonicalizer rewrites them away.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    /// Application of a unary predicate or a relation.
    Atom { pred: String, args: Vec<Term> },
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    Compare { lhs: Expr, op: CmpOp, rhs: Expr },
}

impl Formula {
    pub fn pred(name: &str, args: Vec<Term>) -> Formula {
        Formula::Atom { pred: name.to_string(), args }
    }

    pub fn unary(name: &str, arg: Term) -> Formula {
        Formula::pred(name, vec![arg])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(var: &str, body: Formula) -> Formula {
        Formula::Exists(var.to_string(), Box::new(body))
    }

    pub fn forall(var: &str, body: Formula) -> Formula {
        Formula::Forall(var.to_string(), Box::new(body))
    }

    pub fn compare(lhs: Expr, op: CmpOp, rhs: Expr) -> Formula {
        Formula::Compare { lhs, op, rhs }
    }

    /// Left-nested conjunction; `True` when empty.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::True,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Left-nested disjunction; `False` when empty.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::False,
            Some(first) => it.fold(first, Formula::or),
        }
    }

    /// Top-level conjuncts, flattening nested `And`.
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        fn go<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
            match f {
                Formula::And(a, b) => {
                    go(a, out);
                    go(b, out);
                }
                Formula::True => {}
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let term = |t: &Term, bound: &Vec<String>, out: &mut BTreeSet<String>| {
            if let Term::Var(v) = t {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom { args, .. } => args.iter().for_each(|t| term(t, bound, out)),
            Formula::Eq(a, b) => {
                term(a, bound, out);
                term(b, bound, out);
            }
            Formula::Not(a) => a.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Formula::Compare { lhs, rhs, .. } => {
                lhs.collect_free(bound, out);
                rhs.collect_free(bound, out);
            }
        }
    }

    /// Constant symbols mentioned anywhere.
    pub fn constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| {
            if let Term::Const(c) = t {
                out.insert(c.clone());
            }
        });
        out
    }

    /// Predicate and relation symbols mentioned anywhere.
    pub fn predicate_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom { pred, .. } = f {
                out.insert(pred.clone());
            }
        });
        out
    }

    /// Relation symbols (atoms with two or more arguments).
    pub fn relation_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom { pred, args } = f {
                if args.len() != 1 {
                    out.insert(pred.clone());
                }
            }
        });
        out
    }

    /// Tolerance indices of approximate comparisons, with multiplicity.
    pub fn tolerance_indices(&self) -> Vec<u32> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Compare { op, lhs, rhs } = f {
                if let Some(i) = op.tolerance_index() {
                    out.push(i);
                }
                lhs.visit_tol(&mut |i| out.push(i));
                rhs.visit_tol(&mut |i| out.push(i));
            }
        });
        out
    }

    pub fn has_quantifiers(&self) -> bool {
        self.any(&|f| matches!(f, Formula::Exists(..) | Formula::Forall(..)))
    }

    pub fn has_proportions(&self) -> bool {
        self.any(&|f| matches!(f, Formula::Compare { .. }))
    }

    pub fn has_equality(&self) -> bool {
        self.any(&|f| matches!(f, Formula::Eq(..)))
    }

    pub fn has_approximate(&self) -> bool {
        self.any(&|f| matches!(f, Formula::Compare { op, .. } if op.is_approximate()))
    }

    /// Maximum nesting depth of first-order quantifiers and proportion binders.
    pub fn quantifier_rank(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => 0,
            Formula::Not(a) => a.quantifier_rank(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.quantifier_rank().max(b.quantifier_rank())
            }
            Formula::Exists(_, body) | Formula::Forall(_, body) => 1 + body.quantifier_rank(),
            Formula::Compare { lhs, rhs, .. } => lhs.quantifier_rank().max(rhs.quantifier_rank()),
        }
    }

    /// Whether any subformula (including those inside proportion terms) satisfies `pred`.
    pub fn any(&self, pred: &dyn Fn(&Formula) -> bool) -> bool {
        let mut hit = false;
        self.visit(&mut |f| hit |= pred(f));
        hit
    }

    /// Pre-order traversal of every subformula, descending into proportion terms.
    pub fn visit(&self, f: &mut dyn FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Not(a) => a.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Formula::Exists(_, body) | Formula::Forall(_, body) => body.visit(f),
            Formula::Compare { lhs, rhs, .. } => {
                lhs.visit_formulas(f);
                rhs.visit_formulas(f);
            }
            _ => {}
        }
    }

    pub fn visit_terms(&self, f: &mut dyn FnMut(&Term)) {
        self.visit(&mut |g| match g {
            Formula::Atom { args, .. } => args.iter().for_each(&mut *f),
            Formula::Eq(a, b) => {
                f(a);
                f(b);
            }
            _ => {}
        });
    }
}

impl Expr {
    pub fn num(n: i64) -> Expr {
        Expr::Num(BigRational::from_integer(n.into()))
    }

    pub fn rational(r: BigRational) -> Expr {
        Expr::Num(r)
    }

    pub fn prop(body: Formula, vars: &[&str]) -> Expr {
        Expr::Prop { body: Box::new(body), vars: vars.iter().map(|s| s.to_string()).collect() }
    }

    pub fn cond(body: Formula, given: Formula, vars: &[&str]) -> Expr {
        Expr::Cond {
            body: Box::new(body),
            given: Box::new(given),
            vars: vars.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn has_conditional(&self) -> bool {
        match self {
            Expr::Cond { .. } => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.has_conditional() || b.has_conditional()
            }
            _ => false,
        }
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) | Expr::Tol(_) => {}
            Expr::Prop { body, vars } => {
                let n = bound.len();
                bound.extend(vars.iter().cloned());
                body.collect_free(bound, out);
                bound.truncate(n);
            }
            Expr::Cond { body, given, vars } => {
                let n = bound.len();
                bound.extend(vars.iter().cloned());
                body.collect_free(bound, out);
                given.collect_free(bound, out);
                bound.truncate(n);
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
        }
    }

    fn quantifier_rank(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Tol(_) => 0,
            Expr::Prop { body, vars } => vars.len() + body.quantifier_rank(),
            Expr::Cond { body, given, vars } => {
                vars.len() + body.quantifier_rank().max(given.quantifier_rank())
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.quantifier_rank().max(b.quantifier_rank())
            }
        }
    }

    pub fn visit_formulas(&self, f: &mut dyn FnMut(&Formula)) {
        match self {
            Expr::Num(_) | Expr::Tol(_) => {}
            Expr::Prop { body, .. } => body.visit(f),
            Expr::Cond { body, given, .. } => {
                body.visit(f);
                given.visit(f);
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.visit_formulas(f);
                b.visit_formulas(f);
            }
        }
    }

    fn visit_tol(&self, f: &mut dyn FnMut(u32)) {
        match self {
            Expr::Tol(i) => f(*i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.visit_tol(f);
                b.visit_tol(f);
            }
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: &str) -> Formula {
        Formula::unary("P", Term::var(x))
    }

    #[test]
    fn free_variables_respect_binders() {
        let f = Formula::and(Formula::exists("x", p("x")), p("y"));
        assert_eq!(f.free_vars().into_iter().collect::<Vec<_>>(), vec!["y".to_string()]);
        let g = Formula::compare(Expr::prop(Formula::and(p("x"), p("z")), &["x"]), CmpOp::Leq, Expr::num(1));
        assert_eq!(g.free_vars().len(), 1);
    }

    #[test]
    fn rank_counts_proportion_binders() {
        let f = Formula::exists("x", Formula::compare(Expr::prop(p("y"), &["y", "z"]), CmpOp::Leq, Expr::num(1)));
        assert_eq!(f.quantifier_rank(), 3);
    }

    #[test]
    fn conjuncts_flatten() {
        let f = Formula::conj([p("x"), p("y"), p("z")]);
        assert_eq!(f.conjuncts().len(), 3);
        assert_eq!(Formula::conj([]), Formula::True);
    }
}
