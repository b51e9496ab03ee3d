use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::{individual, lift, vocabulary, x};
use crate::belief::{pr_tau, BeliefConfig};
use crate::error::{Error, Result};
use crate::model::{CmpOp, Expr, Formula, PropFormula, ToleranceVector, Vocabulary};
use crate::parser::rules::{Arrow, RawRule};

/// Tolerance index shared by every default.
const DEFAULT_INDEX: u32 = 1;

/// `antecedent -> consequent` as a default, or `=>` as a strict rule.
#[derive(Clone, Debug, PartialEq)]
pub struct DefaultRule {
    pub antecedent: PropFormula,
    pub consequent: PropFormula,
    pub strict: bool,
}

impl From<RawRule> for DefaultRule {
    fn from(r: RawRule) -> Self {
        DefaultRule { antecedent: r.antecedent, consequent: r.consequent, strict: r.arrow == Arrow::Strict }
    }
}

pub type DefaultRuleSet = Vec<DefaultRule>;

/// A default says its consequent holds for almost all individuals meeting
/// its antecedent; a strict rule says it holds for all of them. Every
/// default shares one tolerance.
pub fn defaults_translate(rules: &[DefaultRule]) -> Formula {
    Formula::conj(rules.iter().map(|r| {
        let b = lift(&r.antecedent, &x());
        let c = lift(&r.consequent, &x());
        if r.strict {
            Formula::forall("x", Formula::implies(b, c))
        } else {
            Formula::compare(Expr::cond(c, b, &["x"]), CmpOp::Approx(DEFAULT_INDEX), Expr::num(1))
        }
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    True,
    False,
    /// The antecedent is inconsistent with the rules at every tolerance.
    Undefined,
    /// A solver failed or the values are only partly defined.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub tau: f64,
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plausibility {
    pub query: String,
    pub verdict: Verdict,
    pub trace: Vec<TraceRow>,
    /// `1 - value` over the tolerance at the next-to-last point.
    pub fitted_slope: Option<f64>,
    /// How the verdict was reached.
    pub criterion: &'static str,
}

const CRITERION: &str = "true when every value is defined, 1 - value never grows as the tolerance shrinks, and at the \
                         last tolerance 1 - value is within 1.1 times the slope fitted at the previous one";

/// Tolerances of the shared default index, largest first.
pub const TAU_SEQUENCE: [u32; 4] = [1, 2, 3, 4];

/// Whether `query` follows from `rules` by maximum entropy, judged from the
/// degree of belief in the consequent about an individual known only to meet
/// the antecedent, along a shrinking tolerance.
pub fn me_plausible(rules: &[DefaultRule], query: &DefaultRule, config: &BeliefConfig) -> Result<Plausibility> {
    let vocab: Vocabulary = vocabulary(
        rules.iter().flat_map(|r| [&r.antecedent, &r.consequent]).chain([&query.antecedent, &query.consequent]),
    )?;
    let kb = Formula::and(lift(&query.antecedent, &individual()), defaults_translate(rules));
    let phi = lift(&query.consequent, &individual());
    let mut trace = Vec::new();
    for e in TAU_SEQUENCE {
        let t = BigRational::new(BigInt::from(1), BigInt::from(10).pow(e));
        let tau = ToleranceVector::new([(DEFAULT_INDEX, t)])?;
        let tf = 10f64.powi(-(e as i32));
        let row = match pr_tau(&phi, &kb, &vocab, &tau, &config.maxent) {
            Ok(value) => TraceRow {
                tau: tf,
                value,
                note: value.is_none().then(|| "the antecedent has no mass at the maximum".into()),
            },
            Err(Error::Infeasible(_)) => {
                TraceRow { tau: tf, value: None, note: Some("the antecedent is inconsistent with the rules".into()) }
            }
            Err(e) => TraceRow { tau: tf, value: None, note: Some(e.to_string()) },
        };
        trace.push(row);
    }
    let inconsistent = |r: &TraceRow| r.note.as_deref() == Some("the antecedent is inconsistent with the rules");
    let mut out = Plausibility {
        query: format!("{} -> {}", query.antecedent, query.consequent),
        verdict: Verdict::Inconclusive,
        trace,
        fitted_slope: None,
        criterion: CRITERION,
    };
    if out.trace.iter().all(inconsistent) {
        out.verdict = Verdict::Undefined;
        return Ok(out);
    }
    let Some(values) = out.trace.iter().map(|r| r.value).collect::<Option<Vec<f64>>>() else { return Ok(out) };
    let deficit: Vec<f64> = values.iter().map(|v| (1.0 - v).max(0.0)).collect();
    let taus: Vec<f64> = out.trace.iter().map(|r| r.tau).collect();
    let n = deficit.len();
    let slope = deficit[n - 2] / taus[n - 2];
    out.fitted_slope = Some(slope);
    let monotone = deficit.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    let linear = deficit[n - 1] <= 1.1 * slope * taus[n - 1] + 1e-9;
    out.verdict = if monotone && linear { Verdict::True } else { Verdict::False };
    Ok(out)
}
