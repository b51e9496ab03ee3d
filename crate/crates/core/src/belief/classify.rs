use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::Result;
use crate::model::{atom_indices, Formula, Term, Vocabulary};
use crate::parser::print_formula;

/// A knowledge base cut into the ground part about the query's constants and
/// the rest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Split {
    /// Top-level conjuncts free of quantifiers and proportions.
    #[serde(serialize_with = "as_text")]
    pub psi: Formula,
    /// Everything else.
    #[serde(serialize_with = "as_text")]
    pub kb_rest: Formula,
    /// Constants of the query and of `psi`, sorted.
    pub z: Vec<String>,
}

fn as_text<S: serde::Serializer>(f: &Formula, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&print_formula(f))
}

/// Which route can answer a query.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "kebab-case")]
// Built once per query; boxing the large variant buys nothing.
#[allow(clippy::large_enum_variant)]
pub enum QueryClass {
    /// `phi(c)` against `psi(c) & kb_rest` with `phi`, `psi` unary and
    /// quantifier-free over the single constant `c`, which `kb_rest` omits.
    Simple {
        split: Split,
        constant: String,
        /// `phi` and `psi` with `c` replaced by the variable `x`.
        #[serde(serialize_with = "as_text")]
        phi_x: Formula,
        #[serde(serialize_with = "as_text")]
        psi_x: Formula,
    },
    /// Quantifier-free query, possibly with relations, equality or several
    /// constants, none of which `kb_rest` mentions.
    Separable(Split),
    /// First-order unary query with quantifiers, separable as above.
    UnaryQuantified(Split),
    /// No exact route applies. `probe` says whether tolerance probes still
    /// carry information.
    Unsupported { reason: String, probe: bool },
}

impl QueryClass {
    pub fn split(&self) -> Option<&Split> {
        match self {
            QueryClass::Simple { split, .. } | QueryClass::Separable(split) | QueryClass::UnaryQuantified(split) => {
                Some(split)
            }
            QueryClass::Unsupported { .. } => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            QueryClass::Simple { .. } => "simple",
            QueryClass::Separable(_) => "separable",
            QueryClass::UnaryQuantified(_) => "unary-quantified",
            QueryClass::Unsupported { .. } => "unsupported",
        }
    }
}

fn is_ground(f: &Formula) -> bool {
    !f.has_quantifiers() && !f.has_proportions()
}

pub fn classify(phi: &Formula, kb: &Formula, vocab: &Vocabulary) -> Result<QueryClass> {
    if phi.has_proportions() {
        return Ok(QueryClass::Unsupported {
            reason: "queries about proportions depend on how the tolerances shrink".into(),
            probe: false,
        });
    }
    if !phi.free_vars().is_empty() {
        return Ok(QueryClass::Unsupported { reason: "the query has free variables".into(), probe: false });
    }
    let (ground, rest): (Vec<&Formula>, Vec<&Formula>) = kb.conjuncts().into_iter().partition(|f| is_ground(f));
    let psi = Formula::conj(ground.into_iter().cloned());
    let kb_rest = Formula::conj(rest.into_iter().cloned());
    let z: BTreeSet<String> = phi.constants().into_iter().chain(psi.constants()).collect();
    if let Some(c) = kb_rest.constants().into_iter().find(|c| z.contains(c)) {
        return Ok(QueryClass::Unsupported {
            reason: format!("not separable: `{c}` occurs under a quantifier or proportion in the knowledge base"),
            probe: true,
        });
    }
    let split = Split { psi, kb_rest, z: z.into_iter().collect() };
    if phi.has_quantifiers() {
        if !phi.relation_symbols().is_empty() {
            return Ok(QueryClass::Unsupported {
                reason: "quantified queries over relations are outside the unary zero-one procedure".into(),
                probe: false,
            });
        }
        return Ok(QueryClass::UnaryQuantified(split));
    }
    let unary = |f: &Formula| !f.has_equality() && f.relation_symbols().is_empty();
    if split.z.len() == 1 && phi.constants().len() == 1 && unary(phi) && unary(&split.psi) {
        let c = split.z[0].clone();
        let phi_x = replace_constant(phi, &c, "x");
        let psi_x = replace_constant(&split.psi, &c, "x");
        if atom_indices(&phi_x, vocab).is_ok() && atom_indices(&psi_x, vocab).is_ok() {
            return Ok(QueryClass::Simple { split, constant: c, phi_x, psi_x });
        }
    }
    Ok(QueryClass::Separable(split))
}

/// `f` with every occurrence of the constant `c` replaced by the variable
/// `var`. Only used on quantifier-free formulas.
pub(crate) fn replace_constant(f: &Formula, c: &str, var: &str) -> Formula {
    let term = |t: &Term| match t {
        Term::Const(n) if n == c => Term::var(var),
        other => other.clone(),
    };
    match f {
        Formula::Atom { pred, args } => Formula::Atom { pred: pred.clone(), args: args.iter().map(term).collect() },
        Formula::Eq(a, b) => Formula::Eq(term(a), term(b)),
        Formula::Not(a) => Formula::not(replace_constant(a, c, var)),
        Formula::And(a, b) => Formula::and(replace_constant(a, c, var), replace_constant(b, c, var)),
        Formula::Or(a, b) => Formula::or(replace_constant(a, c, var), replace_constant(b, c, var)),
        Formula::Implies(a, b) => Formula::implies(replace_constant(a, c, var), replace_constant(b, c, var)),
        Formula::Exists(v, b) => Formula::exists(v, replace_constant(b, c, var)),
        Formula::Forall(v, b) => Formula::forall(v, replace_constant(b, c, var)),
        other => other.clone(),
    }
}
