use std::collections::BTreeSet;

use num_traits::ToPrimitive;

use super::classify::{classify, QueryClass, Split};
use super::describe::{descriptions, f_cond, f_description, zero_one_limit};
use super::probe::{probe_tau, scale, value_at};
use super::{BeliefConfig, BeliefResult, DirectInference, OracleRow, Status};
use crate::canon::{to_canonical, CanonicalForm, Poly};
use crate::constraints::{check_stability, gamma, is_essentially_positive, solution_space, SizeDescription};
use crate::error::{Error, Result};
use crate::maxent::{bound_statistic, MaxEntResult};
use crate::model::{atom_indices, Formula, ToleranceVector, Vocabulary};
use crate::par;
use crate::semantics::{pr_n_with, CountConfig};

/// Degree of belief in `phi` given `kb`, by whichever route applies.
pub fn believe(phi: &Formula, kb: &Formula, vocab: &Vocabulary, config: &BeliefConfig) -> Result<BeliefResult> {
    let class = classify(phi, kb, vocab)?;
    match &class {
        QueryClass::Simple { split, phi_x, psi_x, .. } => simple(phi, kb, vocab, split, phi_x, psi_x, config),
        QueryClass::Separable(split) | QueryClass::UnaryQuantified(split) => {
            general(phi, kb, vocab, split, class.name(), config)
        }
        QueryClass::Unsupported { reason, probe } => {
            let mut r = BeliefResult::new(phi, class.name(), config);
            r.note = Some(reason.clone());
            if *probe {
                let t = probe_tau(phi, kb, vocab, config)?;
                if t.all_empty() {
                    return Err(Error::Infeasible("the knowledge base has no worlds at any probed tolerance".into()));
                }
                if t.nonrobust {
                    r.status = Status::Nonrobust;
                }
                r.attach(t);
            }
            Ok(r)
        }
    }
}

/// Degree of belief at one fixed positive tolerance, read off the maxima of
/// the whole knowledge base's solution space. No limit is taken, so the
/// status is `Defined` whenever the constants' placements carry mass.
pub fn believe_at(
    phi: &Formula,
    kb: &Formula,
    vocab: &Vocabulary,
    tau: &ToleranceVector,
    config: &BeliefConfig,
) -> Result<BeliefResult> {
    let class = classify(phi, kb, vocab)?;
    let mut r = BeliefResult::new(phi, class.name(), config);
    if let QueryClass::Unsupported { reason, probe: false } = &class {
        r.note = Some(reason.clone());
        return Ok(r);
    }
    let region = solution_space(&gamma(&to_canonical(kb, vocab)?), tau)?;
    let (value, m) = value_at(phi, vocab, &region, &config.maxent)?;
    r.record(&m);
    r.value = value;
    r.status = if value.is_some() { Status::Defined } else { Status::MaxentInapplicable };
    r.note = Some(format!("fixed tolerance {}", tau.describe()));
    Ok(r)
}

/// The route for a query about one constant that the rest of the knowledge
/// base does not mention: the conditional mass of the query given the
/// evidence at the maximum-entropy point.
pub fn believe_simple(phi: &Formula, kb: &Formula, vocab: &Vocabulary, config: &BeliefConfig) -> Result<BeliefResult> {
    match classify(phi, kb, vocab)? {
        QueryClass::Simple { split, phi_x, psi_x, .. } => simple(phi, kb, vocab, &split, &phi_x, &psi_x, config),
        other => Err(Error::Unsupported(format!("not a simple query ({})", other.name()))),
    }
}

/// The route through complete descriptions of the query's constants, for
/// any separable query. Simple queries are accepted too.
pub fn believe_general(phi: &Formula, kb: &Formula, vocab: &Vocabulary, config: &BeliefConfig) -> Result<BeliefResult> {
    let class = classify(phi, kb, vocab)?;
    match class.split() {
        Some(split) => general(phi, kb, vocab, split, class.name(), config),
        None => Err(Error::Unsupported(format!("not separable ({})", class.name()))),
    }
}

/// Maxima of the zero-tolerance space of `kb_rest`, or the result to return
/// when that space cannot be trusted.
fn zero_space(
    r: &mut BeliefResult,
    cf: &CanonicalForm,
    phi: &Formula,
    kb: &Formula,
    vocab: &Vocabulary,
    config: &BeliefConfig,
) -> Result<Option<MaxEntResult>> {
    let ep = is_essentially_positive(cf, &config.maxent)?;
    r.flags.essentially_positive = Some(ep.positive);
    if let (true, Some(m)) = (ep.positive, ep.zero) {
        return Ok(Some(m));
    }
    let t = probe_tau(phi, kb, vocab, config)?;
    if t.all_empty() {
        return Err(Error::Infeasible("the knowledge base has no worlds at any probed tolerance".into()));
    }
    r.status = Status::Nonrobust;
    r.note = Some(if ep.positive {
        "the zero-tolerance space is empty; only positive tolerances have worlds".into()
    } else {
        "the zero-tolerance space is not essentially positive, so its maxima need not be limits".into()
    });
    r.attach(t);
    Ok(None)
}

/// Turns per-maximum values into a verdict. Several distinct values are
/// checked against the probes.
fn settle(
    r: &mut BeliefResult,
    values: &[f64],
    phi: &Formula,
    kb: &Formula,
    vocab: &Vocabulary,
    config: &BeliefConfig,
) -> Result<()> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= config.tie_tolerance {
        r.status = Status::Defined;
        r.value = Some(values.iter().sum::<f64>() / values.len() as f64);
        return Ok(());
    }
    r.interval = Some([lo, hi]);
    let t = probe_tau(phi, kb, vocab, config)?;
    r.status = if t.nonrobust { Status::Nonrobust } else { Status::Interval };
    r.note = Some("several maximum-entropy points give different values".into());
    r.attach(t);
    Ok(())
}

fn simple(
    phi: &Formula,
    kb: &Formula,
    vocab: &Vocabulary,
    split: &Split,
    phi_x: &Formula,
    psi_x: &Formula,
    config: &BeliefConfig,
) -> Result<BeliefResult> {
    let mut r = BeliefResult::new(phi, "simple", config);
    let cf = to_canonical(&split.kb_rest, vocab)?;
    let Some(m) = zero_space(&mut r, &cf, phi, kb, vocab, config)? else { return Ok(r) };
    r.record(&m);
    let values: Vec<Option<f64>> = m.points().map(|v| f_cond(phi_x, psi_x, vocab, v)).collect::<Result<_>>()?;
    if values.iter().any(Option::is_none) {
        r.status = Status::MaxentInapplicable;
        r.note = Some("the maximum puts no mass on the evidence; compare with the finite-size oracle".into());
        if config.direct_inference {
            direct_inference(&mut r, &cf, phi_x, psi_x, vocab, config)?;
        }
        return Ok(r);
    }
    let values: Vec<f64> = values.into_iter().flatten().collect();
    settle(&mut r, &values, phi, kb, vocab, config)?;
    Ok(r)
}

/// Bounds the proportion of `phi_x` among `psi_x` over the positive-tolerance
/// spaces and extrapolates them to zero. A degenerate limit is reported as
/// the value.
fn direct_inference(
    r: &mut BeliefResult,
    cf: &CanonicalForm,
    phi_x: &Formula,
    psi_x: &Formula,
    vocab: &Vocabulary,
    config: &BeliefConfig,
) -> Result<()> {
    let g = gamma(cf);
    let num = Poly::sum_u(atom_indices(&Formula::and(phi_x.clone(), psi_x.clone()), vocab)?);
    let den = Poly::sum_u(atom_indices(psi_x, vocab)?);
    let indices: Vec<u32> = cf.tolerance_indices().into_iter().collect();
    let mut rows = Vec::new();
    for &e in &config.probe_exponents {
        let tau = ToleranceVector::new(indices.iter().map(|&i| (i, scale(e))))?;
        match solution_space(&g, &tau).and_then(|region| bound_statistic(&region, &num, &den)) {
            Ok((lo, hi)) => rows.push((10f64.powi(-(e as i32)), lo, hi)),
            Err(Error::Unsupported(_) | Error::Invalid(_) | Error::Infeasible(_)) => return Ok(()),
            Err(e) => return Err(e),
        }
        if indices.is_empty() {
            break;
        }
    }
    rows.sort_by(|a, b| b.0.total_cmp(&a.0));
    let limit = match rows.as_slice() {
        [] => return Ok(()),
        [.., (t1, l1, h1), (t2, l2, h2)] => {
            let w = t2 / (t1 - t2);
            [l2 - (l1 - l2) * w, h2 - (h1 - h2) * w]
        }
        [(_, l, h)] => [*l, *h],
    };
    let limit = [limit[0].clamp(0.0, 1.0), limit[1].clamp(0.0, 1.0)];
    if limit[1] - limit[0] <= 1e-6 {
        r.value = Some(0.5 * (limit[0] + limit[1]));
        r.note = Some(
            "the maximum puts no mass on the evidence; the knowledge base pins the proportion of the query among the evidence, which gives the value"
                .into(),
        );
    }
    r.interval = Some(limit);
    r.direct_inference = Some(DirectInference { rows, limit });
    Ok(())
}

fn general(
    phi: &Formula,
    kb: &Formula,
    vocab: &Vocabulary,
    split: &Split,
    class: &str,
    config: &BeliefConfig,
) -> Result<BeliefResult> {
    let mut r = BeliefResult::new(phi, class, config);
    let cf = to_canonical(&split.kb_rest, vocab)?;
    let Some(m) = zero_space(&mut r, &cf, phi, kb, vocab, config)? else { return Ok(r) };
    r.record(&m);

    let Some(sigma) = stable_size_description(&cf, config)? else {
        r.flags.stable = Some(false);
        let t = probe_tau(phi, kb, vocab, config)?;
        r.status = Status::Nonrobust;
        r.note = Some("no size description is stable at the probed tolerances".into());
        r.attach(t);
        return Ok(r);
    };
    r.flags.stable = Some(true);
    r.flags.size_description = Some(sigma.to_string());

    let relations: Vec<String> =
        phi.relation_symbols().into_iter().chain(split.psi.relation_symbols()).collect::<BTreeSet<_>>().into_iter().collect();
    let ds = descriptions(&split.z, vocab, &split.psi, &relations, true)?;
    let truth: Vec<bool> = ds.iter().map(|d| zero_one_limit(phi, &sigma, d, vocab)).collect::<Result<_>>()?;
    let mut values = Vec::new();
    for v in m.points() {
        let (mut num, mut den) = (0.0, 0.0);
        for (d, &t) in ds.iter().zip(&truth) {
            let w = f_description(d, v);
            den += w;
            if t {
                num += w;
            }
        }
        if den <= 1e-12 {
            r.status = Status::MaxentInapplicable;
            r.note = Some("the maximum puts no mass on any description of the constants consistent with the evidence".into());
            return Ok(r);
        }
        values.push(num / den);
    }
    settle(&mut r, &values, phi, kb, vocab, config)?;
    Ok(r)
}

/// The size description of the maxima at every probed uniform tolerance,
/// when the space is stable for it at all of them.
fn stable_size_description(cf: &CanonicalForm, config: &BeliefConfig) -> Result<Option<SizeDescription>> {
    let g = gamma(cf);
    let indices: Vec<u32> = cf.tolerance_indices().into_iter().collect();
    let taus: Vec<ToleranceVector> = if indices.is_empty() {
        vec![ToleranceVector::zero()]
    } else {
        config
            .probe_exponents
            .iter()
            .map(|&e| ToleranceVector::new(indices.iter().map(|&i| (i, scale(e)))))
            .collect::<Result<_>>()?
    };
    let checks = par::map(config.maxent.exec, taus, |tau| check_stability(&g, &tau, &config.maxent));
    let mut shared: Option<SizeDescription> = None;
    for c in checks {
        let c = c?;
        match (c.stable, c.sigma) {
            (true, Some(s)) if shared.as_ref().is_none_or(|x| *x == s) => shared = Some(s),
            _ => return Ok(None),
        }
    }
    Ok(shared)
}

/// Finite-size degrees of belief by counting worlds, one row per size.
pub fn oracle_rows(
    phi: &Formula,
    kb: &Formula,
    vocab: &Vocabulary,
    ns: &[usize],
    tau: &ToleranceVector,
    count: &CountConfig,
) -> Result<Vec<OracleRow>> {
    ns.iter()
        .map(|&n| {
            let p = pr_n_with(vocab, n, tau, phi, kb, count)?;
            Ok(OracleRow {
                n,
                tau: tau.describe(),
                value: p.as_ref().and_then(|x| x.to_f64()),
                exact: p.map(|x| x.to_string()),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_formula, Side};

    fn run(v: &Vocabulary, kb: &str, q: &str) -> BeliefResult {
        let kb = parse_formula(kb, v, Side::Kb).unwrap();
        let q = parse_formula(q, v, Side::Query).unwrap();
        believe(&q, &kb, v, &BeliefConfig::default()).unwrap()
    }

    fn pc() -> Vocabulary {
        Vocabulary::unary(["P"]).unwrap().with_constants(["c"]).unwrap()
    }

    fn hep() -> (Vocabulary, &'static str) {
        let v = Vocabulary::unary(["Hep", "Jaun", "Blue"]).unwrap().with_constants(["Eric"]).unwrap();
        (v, "forall x (Hep(x) -> Jaun(x)) & ||Hep(x) | Jaun(x)||_{x} ~=[1] 0.8 & ||Blue(x)||_{x} ~=[2] 0.25 & Jaun(Eric)")
    }

    fn defined(r: &BeliefResult, want: f64, tol: f64) {
        assert_eq!(r.status, Status::Defined, "{r:?}");
        assert!((r.value.unwrap() - want).abs() <= tol, "{} vs {want}", r.value.unwrap());
    }

    #[test]
    fn hepatitis_answers() {
        let (v, kb) = hep();
        defined(&run(&v, kb, "Hep(Eric)"), 0.8, 1e-6);
        defined(&run(&v, kb, "Blue(Eric)"), 0.25, 1e-6);
        defined(&run(&v, kb, "Blue(Eric) & Hep(Eric)"), 0.2, 1e-6);
    }

    #[test]
    fn upper_bound_transfers_to_the_constant() {
        let r = run(&pc(), "||P(x)||_{x} <~[1] 0.3", "P(c)");
        defined(&r, 0.3, 1e-6);
        assert_eq!(r.class, "simple");
        assert_eq!(r.flags.essentially_positive, Some(true));
    }

    #[test]
    fn evidence_without_mass_is_flagged() {
        let v = Vocabulary::unary(["Penguin", "Fly"]).unwrap().with_constants(["Tweety"]).unwrap();
        let r = run(&v, "||Penguin(x)||_{x} ~=[1] 0 & ||Fly(x) | Penguin(x)||_{x} ~=[2] 0 & Penguin(Tweety)", "Fly(Tweety)");
        assert_eq!(r.status, Status::MaxentInapplicable);
        assert!(r.value.unwrap().abs() < 1e-6);
    }

    #[test]
    fn nonrobust_examples() {
        let v = pc();
        let three = run(&v, "(||P(x)||_{x} ~=[1] 0.3 | ||P(x)||_{x} ~=[2] 0.4) & !(||P(x)||_{x} ~=[3] 0.4)", "P(c)");
        assert_eq!(three.status, Status::Nonrobust);
        assert_eq!(three.flags.essentially_positive, Some(false));
        let sixteen = run(&v, "||P(x)||_{x} <~[1] 0.3 | ||P(x)||_{x} >~[2] 0.7", "P(c)");
        assert_eq!(sixteen.status, Status::Nonrobust);
        assert_eq!(sixteen.flags.unique, Some(false));
        assert!(sixteen.interval.is_some());
        let nineteen = run(&v, "(||P(x)||_{x} ~=[1] 0.3 & P(c)) | (||P(x)||_{x} ~=[2] 0.3 & !P(c))", "P(c)");
        assert_eq!(nineteen.status, Status::Nonrobust);
        assert!(nineteen.probe_spread.unwrap() > 0.9);
    }

    #[test]
    fn proportion_query_is_unsupported() {
        let r = run(&pc(), "||P(x)||_{x} ~=[1] 0.3", "||P(x)||_{x} ~=[2] 0.3");
        assert_eq!(r.status, Status::Unsupported);
        assert!(r.probes.is_empty());
    }

    #[test]
    fn existential_depends_on_nearby_worlds() {
        let v = pc();
        defined(&run(&v, "||P(x)||_{x} ~=[1] 0", "exists x P(x)"), 1.0, 1e-12);
        defined(&run(&v, "forall x !P(x)", "exists x P(x)"), 0.0, 1e-12);
    }

    #[test]
    fn unique_names() {
        let v = Vocabulary::unary(["P"]).unwrap().with_constants(["c1", "c2"]).unwrap();
        let r = run(&v, "||P(x)||_{x} ~=[1] 0.4 & P(c1) & !P(c2)", "!(c1 = c2)");
        defined(&r, 1.0, 1e-12);
        assert_eq!(r.class, "separable");
    }

    #[test]
    fn general_agrees_with_simple() {
        let (v, kb) = hep();
        let kb = parse_formula(kb, &v, Side::Kb).unwrap();
        let q = parse_formula("Hep(Eric) | !Blue(Eric)", &v, Side::Query).unwrap();
        let cfg = BeliefConfig::default();
        let a = believe_simple(&q, &kb, &v, &cfg).unwrap().value.unwrap();
        let b = believe_general(&q, &kb, &v, &cfg).unwrap().value.unwrap();
        assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn relations_in_the_query_average_over_tuples() {
        let v = Vocabulary::new(vec!["P".into()], vec!["c".into()], vec![("R".into(), 2)]).unwrap();
        let r = run(&v, "||P(x)||_{x} ~=[1] 0.3", "R(c, c) & P(c)");
        defined(&r, 0.15, 1e-6);
    }

    #[test]
    fn oracle_matches_at_small_sizes() {
        let v = pc();
        let kb = parse_formula("||P(x)||_{x} <~[1] 0.3", &v, Side::Kb).unwrap();
        let q = parse_formula("P(c)", &v, Side::Query).unwrap();
        let tau = ToleranceVector::new([(1, crate::model::rational::rat(1, 20))]).unwrap();
        let rows = oracle_rows(&q, &kb, &v, &[20, 40], &tau, &CountConfig::default()).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| (r.value.unwrap() - 0.35).abs() < 0.05));
    }
}
