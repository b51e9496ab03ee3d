//! Propositional formalisms read as knowledge bases about one anonymous
//! individual: probabilistic constraints on propositions become statistics
//! over unary predicates, and default rules become near-certain conditional
//! statistics.

mod defaults;
mod nilsson;

pub use defaults::{defaults_translate, me_plausible, DefaultRule, DefaultRuleSet, Plausibility, TraceRow, Verdict};
pub use nilsson::{nilsson_believe, nilsson_translate, Bound, NilssonTranslation, PropConstraint, PropConstraintSet};

use std::collections::BTreeSet;

use crate::error::Result;
use crate::model::{Formula, PropFormula, Term, Vocabulary};

/// Name of the individual queries are about.
pub const INDIVIDUAL: &str = "c";

/// Predicate standing for proposition `p`: the name with its first letter
/// upper-cased.
pub fn predicate_name(p: &str) -> String {
    let mut cs = p.chars();
    match cs.next() {
        Some(first) => first.to_uppercase().chain(cs).collect(),
        None => String::new(),
    }
}

/// `xi_beta(t)`: each proposition becomes its predicate applied to `t`.
pub fn lift(beta: &PropFormula, t: &Term) -> Formula {
    match beta {
        PropFormula::True => Formula::True,
        PropFormula::False => Formula::False,
        PropFormula::Var(p) => Formula::unary(&predicate_name(p), t.clone()),
        PropFormula::Not(a) => Formula::not(lift(a, t)),
        PropFormula::And(a, b) => Formula::and(lift(a, t), lift(b, t)),
        PropFormula::Or(a, b) => Formula::or(lift(a, t), lift(b, t)),
    }
}

/// One predicate per proposition, in sorted order, and the individual.
fn vocabulary<'a>(props: impl IntoIterator<Item = &'a PropFormula>) -> Result<Vocabulary> {
    let names: BTreeSet<String> = props.into_iter().flat_map(|p| p.vars()).map(|v| predicate_name(&v)).collect();
    Vocabulary::new(names.into_iter().collect(), vec![INDIVIDUAL.into()], vec![])
}

fn x() -> Term {
    Term::var("x")
}

fn individual() -> Term {
    Term::constant(INDIVIDUAL)
}
