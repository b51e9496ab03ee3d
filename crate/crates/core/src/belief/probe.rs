use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::describe::{descriptions, f_description, zero_one_limit, CompleteDescription};
use super::BeliefConfig;
use crate::canon::to_canonical;
use crate::constraints::{gamma, optional, solution_space, ConstraintFormula, RegionDescriptor, SizeDescription};
use crate::error::{Error, Result};
use crate::maxent::{maximize, MaxEntConfig, MaxEntResult};
use crate::model::{Formula, ToleranceVector, Vocabulary};
use crate::par;

/// A maximum lies on a cell when it violates the cell by at most this much.
const ACTIVE_TOL: f64 = 1e-6;

/// One row of a probe table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    /// Tolerance per index.
    pub tau: BTreeMap<String, f64>,
    /// The common scale this vector was derived from.
    pub base: f64,
    /// Degree of belief at this tolerance, when defined.
    pub value: Option<f64>,
    /// Number of maximum-entropy points found.
    pub maxima: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Probe results and their spread at the finest scale.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeTable {
    pub rows: Vec<ProbeRow>,
    /// Largest difference between defined values at the finest scale.
    pub spread: Option<f64>,
    /// The spread exceeds the configured tolerance.
    pub nonrobust: bool,
}

impl ProbeTable {
    /// True when every row found the space empty.
    pub fn all_empty(&self) -> bool {
        self.rows.iter().all(|r| r.maxima == 0 && r.note.as_deref() == Some(EMPTY))
    }
}

const EMPTY: &str = "empty solution space";

/// `10^-e` as an exact rational.
pub(crate) fn scale(e: u32) -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(10).pow(e))
}

/// Tolerance vectors around each scale `b`: all indices at `b`, then each
/// index in turn at `2b` and at `b/2` with the others at `b`. Without
/// indices the only vector is the empty one.
pub fn probe_grid(indices: &[u32], exponents: &[u32]) -> Result<Vec<(f64, ToleranceVector)>> {
    if indices.is_empty() {
        return Ok(vec![(0.0, ToleranceVector::zero())]);
    }
    let mut out = Vec::new();
    for &e in exponents {
        let b = scale(e);
        let bf = 10f64.powi(-(e as i32));
        let at = |i: u32, v: BigRational| ToleranceVector::new(indices.iter().map(|&j| (j, if j == i { v.clone() } else { b.clone() })));
        out.push((bf, ToleranceVector::new(indices.iter().map(|&j| (j, b.clone())))?));
        for &i in indices {
            out.push((bf, at(i, &b * BigInt::from(2))?));
            out.push((bf, at(i, &b / BigInt::from(2))?));
        }
    }
    Ok(out)
}

/// Degree of belief in `phi` at a fixed positive tolerance, read off the
/// maximum-entropy points of the solution space of the whole knowledge base.
///
/// Near a maximum only the cells it lies on carry worlds, so the constants
/// must be placed as one of those cells allows; otherwise they are
/// independent draws from the maximum. Several maxima are averaged.
pub fn pr_tau(phi: &Formula, kb: &Formula, vocab: &Vocabulary, tau: &ToleranceVector, maxent: &MaxEntConfig) -> Result<Option<f64>> {
    let g = gamma(&to_canonical(kb, vocab)?);
    let region = solution_space(&g, tau)?;
    Ok(value_at(phi, vocab, &region, maxent)?.0)
}

/// The value at one tolerance together with the maxima it was read from.
pub(super) fn value_at(
    phi: &Formula,
    vocab: &Vocabulary,
    region: &RegionDescriptor,
    maxent: &MaxEntConfig,
) -> Result<(Option<f64>, MaxEntResult)> {
    let Some(m) = optional(maximize(region, maxent))? else {
        return Err(Error::Infeasible(EMPTY.into()));
    };
    let value = average(phi, vocab, region, &m)?;
    Ok((value, m))
}

fn average(phi: &Formula, vocab: &Vocabulary, region: &RegionDescriptor, m: &MaxEntResult) -> Result<Option<f64>> {
    let relations: Vec<String> = phi.relation_symbols().into_iter().collect();
    let mut total = 0.0;
    for v in m.points() {
        let active: Vec<&Vec<(String, usize)>> =
            region.cells.iter().filter(|c| c.violation(v) <= ACTIVE_TOL).map(|c| &c.members).collect();
        let z: BTreeSet<String> =
            phi.constants().into_iter().chain(active.iter().flat_map(|ms| ms.iter().map(|(c, _)| c.clone()))).collect();
        let z: Vec<String> = z.into_iter().collect();
        let ds = descriptions(&z, vocab, &Formula::True, &relations, true)?;
        let allowed = |d: &CompleteDescription| {
            active.iter().any(|ms| {
                ms.iter().all(|(c, j)| z.iter().position(|x| x == c).is_some_and(|i| d.atoms[d.blocks[i]] == *j))
            })
        };
        let sigma = SizeDescription::of(v);
        let (mut num, mut den) = (0.0, 0.0);
        for d in ds.iter().filter(|d| allowed(d)) {
            let w = f_description(d, v);
            den += w;
            if zero_one_limit(phi, &sigma, d, vocab)? {
                num += w;
            }
        }
        if den <= 1e-12 {
            return Ok(None);
        }
        total += num / den;
    }
    Ok(Some(total / m.maxima.len() as f64))
}

fn row(phi: &Formula, vocab: &Vocabulary, g: &ConstraintFormula, base: f64, tau: ToleranceVector, maxent: &MaxEntConfig) -> ProbeRow {
    let map = tau.explicit().iter().map(|(i, v)| (i.to_string(), crate::model::rational::to_f64(v))).collect();
    let mut out = ProbeRow { tau: map, base, value: None, maxima: 0, note: None };
    match solution_space(g, &tau).and_then(|r| value_at(phi, vocab, &r, maxent)) {
        Ok((value, m)) => {
            out.value = value;
            out.maxima = m.maxima.len();
            if value.is_none() {
                out.note = Some("the constants' atoms have no mass at the maximum".into());
            }
        }
        Err(Error::Infeasible(_)) => out.note = Some(EMPTY.into()),
        Err(e) => out.note = Some(e.to_string()),
    }
    out
}

/// Runs the positive-tolerance pipeline over the probe grid and measures how
/// much the answer moves with the direction in which tolerances shrink.
pub fn probe_tau(phi: &Formula, kb: &Formula, vocab: &Vocabulary, config: &BeliefConfig) -> Result<ProbeTable> {
    let cf = to_canonical(kb, vocab)?;
    let g = gamma(&cf);
    let indices: Vec<u32> = cf.tolerance_indices().into_iter().collect();
    let grid = probe_grid(&indices, &config.probe_exponents)?;
    let rows = par::map(config.maxent.exec, grid, |(base, tau)| row(phi, vocab, &g, base, tau, &config.maxent));
    let finest = rows.iter().map(|r| r.base).fold(f64::INFINITY, f64::min);
    let values: Vec<f64> = rows.iter().filter(|r| r.base == finest).filter_map(|r| r.value).collect();
    let spread = (!values.is_empty()).then(|| {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    });
    let nonrobust = spread.is_some_and(|s| s > config.probe_tolerance);
    Ok(ProbeTable { rows, spread, nonrobust })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_formula, Side};

    fn pc() -> Vocabulary {
        Vocabulary::unary(["P"]).unwrap().with_constants(["c"]).unwrap()
    }

    fn table(kb: &str, q: &str) -> ProbeTable {
        let v = pc();
        let kb = parse_formula(kb, &v, Side::Kb).unwrap();
        let q = parse_formula(q, &v, Side::Query).unwrap();
        probe_tau(&q, &kb, &v, &BeliefConfig::default()).unwrap()
    }

    fn at(t: &ProbeTable, base: f64, tau: &[(u32, f64)]) -> f64 {
        let key: BTreeMap<String, f64> = tau.iter().map(|(i, x)| (i.to_string(), *x)).collect();
        t.rows.iter().find(|r| r.base == base && r.tau == key).and_then(|r| r.value).unwrap()
    }

    #[test]
    fn grid_shape() {
        let g = probe_grid(&[1, 2], &[2, 3]).unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(g[1].1.get_f64(1), Some(0.02));
        assert_eq!(g[1].1.get_f64(2), Some(0.01));
        assert_eq!(probe_grid(&[], &[2]).unwrap().len(), 1);
    }

    #[test]
    fn robust_knowledge_base_converges() {
        let t = table("||P(x)||_{x} <~[1] 0.3", "P(c)");
        assert!(!t.nonrobust);
        assert!((at(&t, 1e-4, &[(1, 1e-4)]) - 0.3001).abs() < 1e-6);
        assert!(t.spread.unwrap() < 1e-3);
    }

    #[test]
    fn overlapping_ranges_follow_the_larger_branch() {
        let t = table("(||P(x)||_{x} ~=[1] 0.3 | ||P(x)||_{x} ~=[2] 0.4) & !(||P(x)||_{x} ~=[3] 0.4)", "P(c)");
        let b = 1e-3;
        assert!((at(&t, b, &[(1, b), (2, 2.0 * b), (3, b)]) - (0.4 + 2.0 * b)).abs() < 1e-6);
        assert!((at(&t, b, &[(1, b), (2, b), (3, 2.0 * b)]) - (0.3 + b)).abs() < 1e-6);
        assert!(t.nonrobust);
    }

    #[test]
    fn non_separable_kb_reaches_every_value() {
        let t = table("(||P(x)||_{x} ~=[1] 0.3 & P(c)) | (||P(x)||_{x} ~=[2] 0.3 & !P(c))", "P(c)");
        let b = 1e-4;
        assert!((at(&t, b, &[(1, 2.0 * b), (2, b)]) - 1.0).abs() < 1e-9);
        assert!(at(&t, b, &[(1, b), (2, 2.0 * b)]).abs() < 1e-9);
        assert!((at(&t, b, &[(1, b), (2, b)]) - 0.3).abs() < 1e-3);
        assert!(t.nonrobust);
    }

    #[test]
    fn quantified_query_at_positive_tolerance() {
        let v = pc();
        let kb = parse_formula("||P(x)||_{x} ~=[1] 0", &v, Side::Kb).unwrap();
        let q = parse_formula("exists x P(x)", &v, Side::Query).unwrap();
        let tau = ToleranceVector::new([(1, scale(2))]).unwrap();
        assert_eq!(pr_tau(&q, &kb, &v, &tau, &MaxEntConfig::default()).unwrap(), Some(1.0));
    }
}
