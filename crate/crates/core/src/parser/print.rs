use crate::model::rational::format_rational;
use crate::model::{CmpOp, Expr, Formula, Term};
use crate::parser::parse::SourceFile;

/// Renders a formula in the concrete syntax accepted by the parser.
pub fn print_formula(f: &Formula) -> String {
    let mut s = String::new();
    formula(f, 0, &mut s);
    s
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    expr(e, 0, &mut s);
    s
}

/// Renders a whole source file.
pub fn print_file(file: &SourceFile) -> String {
    let v = &file.vocab;
    let mut out = String::from("vocab {\n");
    if !v.predicates().is_empty() {
        out.push_str(&format!("  predicates {};\n", v.predicates().join(", ")));
    }
    if !v.constants().is_empty() {
        out.push_str(&format!("  constants {};\n", v.constants().join(", ")));
    }
    if !v.relations().is_empty() {
        let rels: Vec<String> = v.relations().iter().map(|(n, a)| format!("{n}/{a}")).collect();
        out.push_str(&format!("  relations {};\n", rels.join(", ")));
    }
    out.push_str("}\n");
    for (name, stmts) in [("kb", &file.kb), ("query", &file.queries)] {
        if name == "query" && stmts.is_empty() {
            continue;
        }
        out.push_str(&format!("\n{name} {{\n"));
        for s in stmts.iter() {
            out.push_str(&format!("  {};\n", print_formula(&s.formula)));
        }
        out.push_str("}\n");
    }
    out
}

fn term(t: &Term) -> &str {
    t.name()
}

// Precedence levels: 1 implication, 2 disjunction, 3 conjunction, 4 prefix operators, 5 atomic.
fn formula(f: &Formula, ctx: u8, out: &mut String) {
    let prec = match f {
        Formula::Implies(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Not(_) | Formula::Exists(..) | Formula::Forall(..) => 4,
        _ => 5,
    };
    let paren = prec < ctx;
    if paren {
        out.push('(');
    }
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Atom { pred, args } => {
            out.push_str(pred);
            out.push('(');
            out.push_str(&args.iter().map(term).collect::<Vec<_>>().join(", "));
            out.push(')');
        }
        Formula::Eq(a, b) => {
            out.push_str(&format!("{} = {}", term(a), term(b)));
        }
        Formula::Not(a) => match a.as_ref() {
            Formula::Eq(x, y) => out.push_str(&format!("{} != {}", term(x), term(y))),
            Formula::Compare { .. } => {
                out.push_str("!(");
                formula(a, 0, out);
                out.push(')');
            }
            _ => {
                out.push('!');
                formula(a, 4, out);
            }
        },
        Formula::And(a, b) => {
            formula(a, 3, out);
            out.push_str(" & ");
            formula(b, 4, out);
        }
        Formula::Or(a, b) => {
            formula(a, 2, out);
            out.push_str(" | ");
            formula(b, 3, out);
        }
        Formula::Implies(a, b) => {
            formula(a, 2, out);
            out.push_str(" -> ");
            formula(b, 1, out);
        }
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            out.push_str(if matches!(f, Formula::Exists(..)) { "exists " } else { "forall " });
            out.push_str(v);
            out.push(' ');
            formula(body, 4, out);
        }
        Formula::Compare { lhs, op, rhs } => {
            expr(lhs, 0, out);
            out.push_str(&match op {
                CmpOp::Approx(i) => format!(" ~=[{i}] "),
                CmpOp::ApproxLeq(i) => format!(" <~[{i}] "),
                CmpOp::Eq => " = ".to_string(),
                CmpOp::Leq => " <= ".to_string(),
            });
            expr(rhs, 0, out);
        }
    }
    if paren {
        out.push(')');
    }
}

// Precedence levels: 1 sums, 2 products, 3 factors.
fn expr(e: &Expr, ctx: u8, out: &mut String) {
    let prec = match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) => 2,
        _ => 3,
    };
    let paren = prec < ctx;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Num(r) => out.push_str(&format_rational(r)),
        Expr::Tol(i) => out.push_str(&format!("eps[{i}]")),
        Expr::Prop { body, vars } => {
            out.push_str("||");
            formula(body, 3, out);
            out.push_str(&format!("||_{{{}}}", vars.join(",")));
        }
        Expr::Cond { body, given, vars } => {
            out.push_str("||");
            formula(body, 3, out);
            out.push_str(" | ");
            formula(given, 3, out);
            out.push_str(&format!("||_{{{}}}", vars.join(",")));
        }
        Expr::Add(a, b) => {
            expr(a, 1, out);
            out.push_str(" + ");
            expr(b, 2, out);
        }
        Expr::Sub(a, b) => {
            expr(a, 1, out);
            out.push_str(" - ");
            expr(b, 2, out);
        }
        Expr::Mul(a, b) => {
            expr(a, 2, out);
            out.push_str(" * ");
            expr(b, 3, out);
        }
    }
    if paren {
        out.push(')');
    }
}
