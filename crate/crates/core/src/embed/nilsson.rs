use num_rational::BigRational;

use super::{individual, lift, vocabulary, x};
use crate::belief::{believe_simple, BeliefConfig, BeliefResult};
use crate::error::Result;
use crate::model::{CmpOp, Expr, Formula, PropFormula, Vocabulary};

/// Constraint on a (conditional) probability.
#[derive(Clone, Debug, PartialEq)]
pub enum Bound {
    Eq(BigRational),
    AtMost(BigRational),
    AtLeast(BigRational),
    Between(BigRational, BigRational),
}

/// `Pr(beta | given) <bound>`, unconditional when `given` is absent.
#[derive(Clone, Debug, PartialEq)]
pub struct PropConstraint {
    pub beta: PropFormula,
    pub given: Option<PropFormula>,
    pub bound: Bound,
}

pub type PropConstraintSet = Vec<PropConstraint>;

/// A constraint set and query rewritten over unary predicates.
#[derive(Clone, Debug, PartialEq)]
pub struct NilssonTranslation {
    pub vocab: Vocabulary,
    /// The translated constraints.
    pub kb: Formula,
    /// `xi_beta(c)`.
    pub phi: Formula,
    /// `xi_beta'(c)`.
    pub psi: Formula,
}

impl NilssonTranslation {
    /// The knowledge base the query is asked against: the evidence about the
    /// individual together with the statistics.
    pub fn full_kb(&self) -> Formula {
        Formula::and(self.psi.clone(), self.kb.clone())
    }
}

/// Rewrites every probability as a proportion over a fresh variable. Exact
/// values become approximate equalities and bounds one-sided approximate
/// comparisons, each with its own tolerance index.
pub fn nilsson_translate(lambda: &[PropConstraint], beta: &PropFormula, beta_prime: &PropFormula) -> Result<NilssonTranslation> {
    let vocab = vocabulary(
        lambda.iter().flat_map(|c| std::iter::once(&c.beta).chain(c.given.as_ref())).chain([beta, beta_prime]),
    )?;
    let mut next = 0u32;
    let mut fresh = || {
        next += 1;
        next
    };
    let mut parts = Vec::new();
    for c in lambda {
        let body = lift(&c.beta, &x());
        let prop = match &c.given {
            Some(g) => Expr::cond(body, lift(g, &x()), &["x"]),
            None => Expr::prop(body, &["x"]),
        };
        let num = |r: &BigRational| Expr::rational(r.clone());
        match &c.bound {
            Bound::Eq(v) => parts.push(Formula::compare(prop, CmpOp::Approx(fresh()), num(v))),
            Bound::AtMost(v) => parts.push(Formula::compare(prop, CmpOp::ApproxLeq(fresh()), num(v))),
            Bound::AtLeast(v) => parts.push(Formula::compare(num(v), CmpOp::ApproxLeq(fresh()), prop)),
            Bound::Between(lo, hi) => {
                parts.push(Formula::compare(num(lo), CmpOp::ApproxLeq(fresh()), prop.clone()));
                parts.push(Formula::compare(prop, CmpOp::ApproxLeq(fresh()), num(hi)));
            }
        }
    }
    Ok(NilssonTranslation {
        vocab,
        kb: Formula::conj(parts),
        phi: lift(beta, &individual()),
        psi: lift(beta_prime, &individual()),
    })
}

/// `Pr(beta | beta')` under the maximum-entropy distribution satisfying
/// `lambda`, computed as a degree of belief about the individual.
pub fn nilsson_believe(
    lambda: &[PropConstraint],
    beta: &PropFormula,
    beta_prime: &PropFormula,
    config: &BeliefConfig,
) -> Result<BeliefResult> {
    let t = nilsson_translate(lambda, beta, beta_prime)?;
    believe_simple(&t.phi, &t.full_kb(), &t.vocab, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::Status;
    use crate::model::rational::rat;
    use crate::parser::print_formula;

    fn p(name: &str) -> PropFormula {
        PropFormula::var(name)
    }

    #[test]
    fn translations() {
        let fly = PropConstraint { beta: p("fly"), given: Some(p("bird")), bound: Bound::AtLeast(rat(7, 10)) };
        let t = nilsson_translate(&[fly], &p("fly"), &PropFormula::True).unwrap();
        assert_eq!(print_formula(&t.kb), "0.7 <~[1] ||Fly(x) | Bird(x)||_{x}");
        let yellow = PropConstraint { beta: p("yellow"), given: None, bound: Bound::AtMost(rat(1, 5)) };
        let t = nilsson_translate(&[yellow], &p("yellow"), &PropFormula::True).unwrap();
        assert_eq!(print_formula(&t.kb), "||Yellow(x)||_{x} <~[1] 0.2");
        let t = nilsson_translate(&[], &p("q"), &PropFormula::True).unwrap();
        assert_eq!(t.kb, Formula::True);
        assert_eq!(t.vocab.predicates(), ["Q"]);
    }

    #[test]
    fn maximum_entropy_values() {
        let cfg = BeliefConfig::default();
        let le = PropConstraint { beta: p("p"), given: None, bound: Bound::AtMost(rat(3, 10)) };
        let r = nilsson_believe(&[le], &p("p"), &PropFormula::True, &cfg).unwrap();
        assert!((r.value.unwrap() - 0.3).abs() < 1e-6);
        let r = nilsson_believe(&[], &p("p"), &PropFormula::True, &cfg).unwrap();
        assert!((r.value.unwrap() - 0.5).abs() < 1e-9);
        let two = [
            PropConstraint { beta: p("p"), given: None, bound: Bound::Eq(rat(3, 10)) },
            PropConstraint { beta: p("q"), given: None, bound: Bound::Eq(rat(1, 4)) },
        ];
        let r = nilsson_believe(&two, &PropFormula::and(p("p"), p("q")), &PropFormula::True, &cfg).unwrap();
        assert!((r.value.unwrap() - 0.075).abs() < 1e-6);
    }

    #[test]
    fn evidence_of_probability_zero() {
        let none = PropConstraint { beta: p("q"), given: None, bound: Bound::Eq(rat(0, 1)) };
        let r = nilsson_believe(&[none], &p("p"), &p("q"), &BeliefConfig::default()).unwrap();
        assert_eq!(r.status, Status::MaxentInapplicable);
    }
}
