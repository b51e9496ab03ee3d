use crate::error::{Error, Result};
use crate::model::{rename_apart, Expr, Formula, Term};

/// Rewrites a unary formula so that no quantifier or proportion binder has
/// any constant, or any variable it does not bind, within its scope.
///
/// At every binder the maximal subformulas that do not mention the bound
/// variables are collected and the binder is split by cases on their truth
/// values, simplifying each branch. Bound variables are renamed apart first.
pub fn flatten(f: &Formula) -> Result<Formula> {
    flat(&rename_apart(f))
}

/// Scope audit: true when every binder body mentions only variables bound by
/// that binder and no constants.
pub fn is_flat(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => true,
        Formula::Not(a) => is_flat(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => is_flat(a) && is_flat(b),
        Formula::Exists(x, body) | Formula::Forall(x, body) => {
            scoped(body, std::slice::from_ref(x)) && is_flat(body)
        }
        Formula::Compare { lhs, rhs, .. } => expr_is_flat(lhs) && expr_is_flat(rhs),
    }
}

fn scoped(body: &Formula, vars: &[String]) -> bool {
    body.constants().is_empty() && body.free_vars().iter().all(|v| vars.contains(v))
}

fn expr_is_flat(e: &Expr) -> bool {
    match e {
        Expr::Num(_) | Expr::Tol(_) => true,
        Expr::Prop { body, vars } => scoped(body, vars) && is_flat(body),
        Expr::Cond { body, given, vars } => {
            scoped(body, vars) && scoped(given, vars) && is_flat(body) && is_flat(given)
        }
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => expr_is_flat(a) && expr_is_flat(b),
    }
}

fn flat(f: &Formula) -> Result<Formula> {
    Ok(match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom { pred, args } if args.len() != 1 => return Err(Error::NonUnary(pred.clone())),
        Formula::Atom { .. } => f.clone(),
        Formula::Eq(..) => return Err(Error::Restriction("equality".into())),
        Formula::Not(a) => not(flat(a)?),
        Formula::And(a, b) => and(flat(a)?, flat(b)?),
        Formula::Or(a, b) => or(flat(a)?, flat(b)?),
        Formula::Implies(a, b) => or(not(flat(a)?), flat(b)?),
        Formula::Exists(x, body) => {
            let body = flat(body)?;
            let mut basics = Vec::new();
            collect_basic(&body, std::slice::from_ref(x), &mut basics);
            split(&basics, &|asg| exists(x, apply(&body, asg)))
        }
        Formula::Forall(x, body) => {
            let body = flat(body)?;
            let mut basics = Vec::new();
            collect_basic(&body, std::slice::from_ref(x), &mut basics);
            split(&basics, &|asg| forall(x, apply(&body, asg)))
        }
        Formula::Compare { lhs, op, rhs } => {
            let lhs = flat_expr(lhs)?;
            let rhs = flat_expr(rhs)?;
            let mut basics = Vec::new();
            collect_expr_basic(&lhs, &mut basics);
            collect_expr_basic(&rhs, &mut basics);
            let cmp = Formula::Compare { lhs, op: *op, rhs };
            split(&basics, &|asg| apply(&cmp, asg))
        }
    })
}

fn flat_expr(e: &Expr) -> Result<Expr> {
    Ok(match e {
        Expr::Num(_) | Expr::Tol(_) => e.clone(),
        Expr::Prop { body, vars } => Expr::Prop { body: Box::new(flat(body)?), vars: vars.clone() },
        Expr::Cond { body, given, vars } => {
            Expr::Cond { body: Box::new(flat(body)?), given: Box::new(flat(given)?), vars: vars.clone() }
        }
        Expr::Add(a, b) => Expr::add(flat_expr(a)?, flat_expr(b)?),
        Expr::Sub(a, b) => Expr::sub(flat_expr(a)?, flat_expr(b)?),
        Expr::Mul(a, b) => Expr::mul(flat_expr(a)?, flat_expr(b)?),
    })
}

/// Builds the binder formula under a full truth assignment.
type Leaf<'a> = &'a dyn Fn(&[(Formula, bool)]) -> Formula;

/// Case split over the truth values of `basics`, one at a time:
/// `(chi & rest[chi:=true]) | (!chi & rest[chi:=false])`. `leaf` builds the
/// binder formula under a full assignment.
fn split(basics: &[Formula], leaf: Leaf) -> Formula {
    fn go(
        basics: &[Formula],
        assigned: &mut Vec<(Formula, bool)>,
        leaf: Leaf,
    ) -> Formula {
        let Some((chi, rest)) = basics.split_first() else {
            return leaf(assigned);
        };
        let mut branch = |val: bool| {
            assigned.push((chi.clone(), val));
            let inner = go(rest, assigned, leaf);
            assigned.pop();
            let guard = if val { chi.clone() } else { not(chi.clone()) };
            and(guard, inner)
        };
        let yes = branch(true);
        let no = branch(false);
        or(yes, no)
    }
    go(basics, &mut Vec::new(), leaf)
}

fn apply(g: &Formula, assigned: &[(Formula, bool)]) -> Formula {
    assigned.iter().fold(g.clone(), |acc, (chi, val)| replace(&acc, chi, *val))
}

/// Maximal subformulas of `f` that mention none of `bound`.
fn collect_basic(f: &Formula, bound: &[String], out: &mut Vec<Formula>) {
    let push = |g: &Formula, out: &mut Vec<Formula>| {
        if !out.contains(g) {
            out.push(g.clone());
        }
    };
    match f {
        Formula::True | Formula::False => {}
        Formula::Atom { args, .. } => {
            let mentions = args.iter().any(|t| matches!(t, Term::Var(v) if bound.contains(v)));
            if !mentions {
                push(f, out);
            }
        }
        Formula::Eq(..) => push(f, out),
        Formula::Not(a) => collect_basic(a, bound, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            collect_basic(a, bound, out);
            collect_basic(b, bound, out);
        }
        // Once flattened, nested binders only mention their own variables.
        Formula::Exists(..) | Formula::Forall(..) | Formula::Compare { .. } => {
            if f.free_vars().iter().all(|v| !bound.contains(v)) {
                push(f, out);
            } else {
                match f {
                    Formula::Exists(_, b) | Formula::Forall(_, b) => collect_basic(b, bound, out),
                    _ => {}
                }
            }
        }
    }
}

fn collect_expr_basic(e: &Expr, out: &mut Vec<Formula>) {
    match e {
        Expr::Num(_) | Expr::Tol(_) => {}
        Expr::Prop { body, vars } => collect_basic(body, vars, out),
        Expr::Cond { body, given, vars } => {
            collect_basic(body, vars, out);
            collect_basic(given, vars, out);
        }
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
            collect_expr_basic(a, out);
            collect_expr_basic(b, out);
        }
    }
}

/// Replaces every occurrence of `chi` by a truth value and simplifies.
fn replace(f: &Formula, chi: &Formula, val: bool) -> Formula {
    if f == chi {
        return if val { Formula::True } else { Formula::False };
    }
    match f {
        Formula::True | Formula::False | Formula::Atom { .. } | Formula::Eq(..) => f.clone(),
        Formula::Not(a) => not(replace(a, chi, val)),
        Formula::And(a, b) => and(replace(a, chi, val), replace(b, chi, val)),
        Formula::Or(a, b) => or(replace(a, chi, val), replace(b, chi, val)),
        Formula::Implies(a, b) => or(not(replace(a, chi, val)), replace(b, chi, val)),
        Formula::Exists(x, b) => exists(x, replace(b, chi, val)),
        Formula::Forall(x, b) => forall(x, replace(b, chi, val)),
        Formula::Compare { lhs, op, rhs } => {
            Formula::Compare { lhs: replace_expr(lhs, chi, val), op: *op, rhs: replace_expr(rhs, chi, val) }
        }
    }
}

fn replace_expr(e: &Expr, chi: &Formula, val: bool) -> Expr {
    match e {
        Expr::Num(_) | Expr::Tol(_) => e.clone(),
        Expr::Prop { body, vars } => Expr::Prop { body: Box::new(replace(body, chi, val)), vars: vars.clone() },
        Expr::Cond { body, given, vars } => Expr::Cond {
            body: Box::new(replace(body, chi, val)),
            given: Box::new(replace(given, chi, val)),
            vars: vars.clone(),
        },
        Expr::Add(a, b) => Expr::add(replace_expr(a, chi, val), replace_expr(b, chi, val)),
        Expr::Sub(a, b) => Expr::sub(replace_expr(a, chi, val), replace_expr(b, chi, val)),
        Expr::Mul(a, b) => Expr::mul(replace_expr(a, chi, val), replace_expr(b, chi, val)),
    }
}

// Simplifying constructors. Domains are nonempty, so a quantifier over a
// constant body is that constant.

fn not(a: Formula) -> Formula {
    match a {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Not(inner) => *inner,
        other => Formula::not(other),
    }
}

fn and(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::False, _) | (_, Formula::False) => Formula::False,
        (Formula::True, x) | (x, Formula::True) => x,
        (x, y) => Formula::and(x, y),
    }
}

fn or(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::True, _) | (_, Formula::True) => Formula::True,
        (Formula::False, x) | (x, Formula::False) => x,
        (x, y) => Formula::or(x, y),
    }
}

fn exists(x: &str, body: Formula) -> Formula {
    match body {
        Formula::True | Formula::False => body,
        other => Formula::exists(x, other),
    }
}

fn forall(x: &str, body: Formula) -> Formula {
    match body {
        Formula::True | Formula::False => body,
        other => Formula::forall(x, other),
    }
}
