use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::Result;
use crate::model::{CmpOp, Expr, Formula, ToleranceVector};

/// Translates approximate comparisons into exact ones over tolerance
/// variables.
///
/// `a <~[i] b` becomes `a - b <= eps[i]` and `a ~=[i] b` the conjunction of
/// both directions. Conditional proportions are multiplied out, so the slack
/// scales with the conditioning proportion: `||p | q|| <~[i] r` becomes
/// `||p & q|| - r * ||q|| <= eps[i] * ||q||`. Exact comparisons are left alone
/// unless they contain a conditional.
pub fn to_exact(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => f.clone(),
        Formula::Not(a) => Formula::not(to_exact(a)),
        Formula::And(a, b) => Formula::and(to_exact(a), to_exact(b)),
        Formula::Or(a, b) => Formula::or(to_exact(a), to_exact(b)),
        Formula::Implies(a, b) => Formula::implies(to_exact(a), to_exact(b)),
        Formula::Exists(v, body) => Formula::exists(v, to_exact(body)),
        Formula::Forall(v, body) => Formula::forall(v, to_exact(body)),
        Formula::Compare { lhs, op, rhs } => {
            let lhs = exact_expr(lhs);
            let rhs = exact_expr(rhs);
            match *op {
                CmpOp::ApproxLeq(i) => tolerance_leq(&lhs, &rhs, i),
                CmpOp::Approx(i) => Formula::and(tolerance_leq(&lhs, &rhs, i), tolerance_leq(&rhs, &lhs, i)),
                CmpOp::Eq | CmpOp::Leq if lhs.has_conditional() || rhs.has_conditional() => {
                    let (num, _) = Frac::of(&lhs).minus(Frac::of(&rhs));
                    Formula::compare(num, *op, Expr::num(0))
                }
                CmpOp::Eq | CmpOp::Leq => Formula::compare(lhs, *op, rhs),
            }
        }
    }
}

/// Replaces every tolerance variable by its value in `tau`.
pub fn substitute_tau(f: &Formula, tau: &ToleranceVector) -> Result<Formula> {
    Ok(match f {
        Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => f.clone(),
        Formula::Not(a) => Formula::not(substitute_tau(a, tau)?),
        Formula::And(a, b) => Formula::and(substitute_tau(a, tau)?, substitute_tau(b, tau)?),
        Formula::Or(a, b) => Formula::or(substitute_tau(a, tau)?, substitute_tau(b, tau)?),
        Formula::Implies(a, b) => Formula::implies(substitute_tau(a, tau)?, substitute_tau(b, tau)?),
        Formula::Exists(v, body) => Formula::exists(v, substitute_tau(body, tau)?),
        Formula::Forall(v, body) => Formula::forall(v, substitute_tau(body, tau)?),
        Formula::Compare { lhs, op, rhs } => {
            Formula::compare(substitute_expr(lhs, tau)?, *op, substitute_expr(rhs, tau)?)
        }
    })
}

/// Approximate-to-exact translation followed by tolerance substitution.
pub fn instantiate(f: &Formula, tau: &ToleranceVector) -> Result<Formula> {
    substitute_tau(&to_exact(f), tau)
}

fn substitute_expr(e: &Expr, tau: &ToleranceVector) -> Result<Expr> {
    Ok(match e {
        Expr::Tol(i) => Expr::Num(tau.require(*i)?.clone()),
        Expr::Num(_) => e.clone(),
        Expr::Prop { body, vars } => Expr::Prop { body: Box::new(substitute_tau(body, tau)?), vars: vars.clone() },
        Expr::Cond { body, given, vars } => Expr::Cond {
            body: Box::new(substitute_tau(body, tau)?),
            given: Box::new(substitute_tau(given, tau)?),
            vars: vars.clone(),
        },
        Expr::Add(a, b) => Expr::add(substitute_expr(a, tau)?, substitute_expr(b, tau)?),
        Expr::Sub(a, b) => Expr::sub(substitute_expr(a, tau)?, substitute_expr(b, tau)?),
        Expr::Mul(a, b) => Expr::mul(substitute_expr(a, tau)?, substitute_expr(b, tau)?),
    })
}

/// Translates formulas nested inside proportion bodies.
fn exact_expr(e: &Expr) -> Expr {
    match e {
        Expr::Num(_) | Expr::Tol(_) => e.clone(),
        Expr::Prop { body, vars } => Expr::Prop { body: Box::new(to_exact(body)), vars: vars.clone() },
        Expr::Cond { body, given, vars } => Expr::Cond {
            body: Box::new(to_exact(body)),
            given: Box::new(to_exact(given)),
            vars: vars.clone(),
        },
        Expr::Add(a, b) => Expr::add(exact_expr(a), exact_expr(b)),
        Expr::Sub(a, b) => Expr::sub(exact_expr(a), exact_expr(b)),
        Expr::Mul(a, b) => Expr::mul(exact_expr(a), exact_expr(b)),
    }
}

fn tolerance_leq(lhs: &Expr, rhs: &Expr, i: u32) -> Formula {
    if !lhs.has_conditional() && !rhs.has_conditional() {
        let diff = if is_zero(rhs) { lhs.clone() } else { Expr::sub(lhs.clone(), rhs.clone()) };
        return Formula::compare(diff, CmpOp::Leq, Expr::Tol(i));
    }
    let (num, den) = Frac::of(lhs).minus(Frac::of(rhs));
    let slack = den.into_iter().fold(Expr::Tol(i), Expr::mul);
    Formula::compare(num, CmpOp::Leq, slack)
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Num(r) if r.is_zero())
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Num(r) if r.is_one())
}

/// A quotient `num / prod(den)` where each denominator is an unconditional
/// proportion term. Denominators form a sorted multiset.
struct Frac {
    num: Expr,
    den: Vec<Expr>,
}

impl Frac {
    fn of(e: &Expr) -> Frac {
        match e {
            Expr::Cond { body, given, vars } => Frac {
                num: Expr::Prop { body: Box::new(Formula::and((**body).clone(), (**given).clone())), vars: vars.clone() },
                den: vec![Expr::Prop { body: given.clone(), vars: vars.clone() }],
            },
            Expr::Add(a, b) => {
                let (num, den) = Frac::of(a).combine(Frac::of(b), false);
                Frac { num, den }
            }
            Expr::Sub(a, b) => {
                let (num, den) = Frac::of(a).minus(Frac::of(b));
                Frac { num, den }
            }
            Expr::Mul(a, b) => {
                let (fa, fb) = (Frac::of(a), Frac::of(b));
                let mut den = fa.den;
                den.extend(fb.den);
                den.sort();
                Frac { num: times(fa.num, fb.num), den }
            }
            _ => Frac { num: e.clone(), den: Vec::new() },
        }
    }

    fn minus(self, other: Frac) -> (Expr, Vec<Expr>) {
        self.combine(other, true)
    }

    /// Sum or difference over the least common multiset of denominators.
    fn combine(self, other: Frac, subtract: bool) -> (Expr, Vec<Expr>) {
        let lcd = multiset_max(&self.den, &other.den);
        let a = scale(self.num, multiset_diff(&lcd, &self.den));
        let b = scale(other.num, multiset_diff(&lcd, &other.den));
        let num = match (subtract, is_zero(&a), is_zero(&b)) {
            (_, _, true) => a,
            (false, true, _) => b,
            (false, false, false) => Expr::add(a, b),
            (true, true, false) => times(Expr::num(-1), b),
            (true, false, false) => Expr::sub(a, b),
        };
        (num, lcd)
    }
}

fn times(a: Expr, b: Expr) -> Expr {
    if is_one(&a) {
        b
    } else if is_one(&b) {
        a
    } else if is_zero(&a) || is_zero(&b) {
        Expr::Num(BigRational::zero())
    } else {
        Expr::mul(a, b)
    }
}

fn scale(e: Expr, factors: Vec<Expr>) -> Expr {
    factors.into_iter().fold(e, times)
}

fn multiset_max(a: &[Expr], b: &[Expr]) -> Vec<Expr> {
    let mut out = a.to_vec();
    out.extend(multiset_diff(b, a));
    out.sort();
    out
}

/// Elements of `a` left after removing one copy of each element of `b`.
fn multiset_diff(a: &[Expr], b: &[Expr]) -> Vec<Expr> {
    let mut rest: Vec<Expr> = b.to_vec();
    let mut out = Vec::new();
    for x in a {
        if let Some(pos) = rest.iter().position(|y| y == x) {
            rest.remove(pos);
        } else {
            out.push(x.clone());
        }
    }
    out
}
