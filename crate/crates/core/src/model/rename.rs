use std::collections::{BTreeSet, HashMap};

use crate::model::{Expr, Formula, Term};

/// Renames bound variables so that no two binders share a name and no binder
/// reuses the name of a free variable or constant. The first binder of each
/// name keeps it; later ones get primes appended.
pub fn rename_apart(f: &Formula) -> Formula {
    let mut taken: BTreeSet<String> = BTreeSet::new();
    f.visit_terms(&mut |t| {
        taken.insert(t.name().to_string());
    });
    f.visit(&mut |g| match g {
        Formula::Exists(v, _) | Formula::Forall(v, _) => {
            taken.insert(v.clone());
        }
        Formula::Compare { lhs, rhs, .. } => {
            for e in [lhs, rhs] {
                collect_binders(e, &mut taken);
            }
        }
        _ => {}
    });
    let mut used: BTreeSet<String> = f.free_vars();
    used.extend(f.constants());
    let mut st = Renamer { taken, used, scope: HashMap::new() };
    st.formula(f)
}

fn collect_binders(e: &Expr, out: &mut BTreeSet<String>) {
    match e {
        Expr::Prop { vars, .. } | Expr::Cond { vars, .. } => out.extend(vars.iter().cloned()),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
            collect_binders(a, out);
            collect_binders(b, out);
        }
        _ => {}
    }
}

struct Renamer {
    taken: BTreeSet<String>,
    used: BTreeSet<String>,
    scope: HashMap<String, Vec<String>>,
}

impl Renamer {
    fn bind(&mut self, v: &str) -> String {
        let fresh = if self.used.contains(v) {
            let mut cand = format!("{v}'");
            while self.taken.contains(&cand) {
                cand.push('\'');
            }
            cand
        } else {
            v.to_string()
        };
        self.taken.insert(fresh.clone());
        self.used.insert(fresh.clone());
        self.scope.entry(v.to_string()).or_default().push(fresh.clone());
        fresh
    }

    fn unbind(&mut self, v: &str) {
        if let Some(stack) = self.scope.get_mut(v) {
            stack.pop();
        }
    }

    fn term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => match self.scope.get(v).and_then(|s| s.last()) {
                Some(n) => Term::Var(n.clone()),
                None => t.clone(),
            },
            Term::Const(_) => t.clone(),
        }
    }

    fn formula(&mut self, f: &Formula) -> Formula {
        match f {
            Formula::True | Formula::False => f.clone(),
            Formula::Atom { pred, args } => {
                Formula::Atom { pred: pred.clone(), args: args.iter().map(|t| self.term(t)).collect() }
            }
            Formula::Eq(a, b) => Formula::Eq(self.term(a), self.term(b)),
            Formula::Not(a) => Formula::not(self.formula(a)),
            Formula::And(a, b) => Formula::and(self.formula(a), self.formula(b)),
            Formula::Or(a, b) => Formula::or(self.formula(a), self.formula(b)),
            Formula::Implies(a, b) => Formula::implies(self.formula(a), self.formula(b)),
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let n = self.bind(v);
                let body = self.formula(body);
                self.unbind(v);
                if matches!(f, Formula::Exists(..)) {
                    Formula::Exists(n, Box::new(body))
                } else {
                    Formula::Forall(n, Box::new(body))
                }
            }
            Formula::Compare { lhs, op, rhs } => {
                Formula::Compare { lhs: self.expr(lhs), op: *op, rhs: self.expr(rhs) }
            }
        }
    }

    fn expr(&mut self, e: &Expr) -> Expr {
        match e {
            Expr::Num(_) | Expr::Tol(_) => e.clone(),
            Expr::Prop { body, vars } => {
                let new_vars: Vec<String> = vars.iter().map(|v| self.bind(v)).collect();
                let body = self.formula(body);
                vars.iter().for_each(|v| self.unbind(v));
                Expr::Prop { body: Box::new(body), vars: new_vars }
            }
            Expr::Cond { body, given, vars } => {
                let new_vars: Vec<String> = vars.iter().map(|v| self.bind(v)).collect();
                let body = self.formula(body);
                let given = self.formula(given);
                vars.iter().for_each(|v| self.unbind(v));
                Expr::Cond { body: Box::new(body), given: Box::new(given), vars: new_vars }
            }
            Expr::Add(a, b) => Expr::add(self.expr(a), self.expr(b)),
            Expr::Sub(a, b) => Expr::sub(self.expr(a), self.expr(b)),
            Expr::Mul(a, b) => Expr::mul(self.expr(a), self.expr(b)),
        }
    }
}

/// Names of all binders, in traversal order, with repetition.
pub fn binder_names(f: &Formula) -> Vec<String> {
    let mut out = Vec::new();
    f.visit(&mut |g| match g {
        Formula::Exists(v, _) | Formula::Forall(v, _) => out.push(v.clone()),
        Formula::Compare { lhs, rhs, .. } => {
            for e in [lhs, rhs] {
                let mut s = Vec::new();
                binders_in_order(e, &mut s);
                out.extend(s);
            }
        }
        _ => {}
    });
    out
}

fn binders_in_order(e: &Expr, out: &mut Vec<String>) {
    match e {
        Expr::Prop { vars, .. } | Expr::Cond { vars, .. } => out.extend(vars.iter().cloned()),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
            binders_in_order(a, out);
            binders_in_order(b, out);
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CmpOp;

    fn p(name: &str, v: &str) -> Formula {
        Formula::unary(name, Term::var(v))
    }

    #[test]
    fn second_binder_is_primed() {
        let f = Formula::and(Formula::exists("x", p("P", "x")), Formula::exists("x", p("Q", "x")));
        let g = rename_apart(&f);
        let expect = Formula::and(Formula::exists("x", p("P", "x")), Formula::exists("x'", p("Q", "x'")));
        assert_eq!(g, expect);
    }

    #[test]
    fn no_reuse_is_identity() {
        let f = Formula::and(Formula::exists("x", p("P", "x")), Formula::exists("y", p("Q", "y")));
        assert_eq!(rename_apart(&f), f);
    }

    #[test]
    fn proportion_binders_are_renamed() {
        let f = Formula::compare(Expr::prop(p("P", "x"), &["x"]), CmpOp::Approx(1), Expr::prop(p("Q", "x"), &["x"]));
        let g = rename_apart(&f);
        let names = binder_names(&g);
        assert_eq!(names.len(), 2);
        assert_ne!(names[0], names[1]);
    }

    #[test]
    fn nested_shadowing_resolves_to_inner_binder() {
        let f = Formula::exists("x", Formula::and(p("P", "x"), Formula::exists("x", p("Q", "x"))));
        let g = rename_apart(&f);
        let expect = Formula::exists("x", Formula::and(p("P", "x"), Formula::exists("x'", p("Q", "x'"))));
        assert_eq!(g, expect);
    }
}
