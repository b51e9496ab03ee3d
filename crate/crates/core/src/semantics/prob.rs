use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::Result;
use crate::model::{Formula, ToleranceVector, Vocabulary};
use crate::semantics::count::{count_pair, CountConfig};

/// `#worlds(phi & kb) / #worlds(kb)` over worlds of size `n`; `None` when no
/// world of that size satisfies `kb`.
pub fn pr_n(
    vocab: &Vocabulary,
    n: usize,
    tau: &ToleranceVector,
    phi: &Formula,
    kb: &Formula,
) -> Result<Option<BigRational>> {
    pr_n_with(vocab, n, tau, phi, kb, &CountConfig::default())
}

pub fn pr_n_with(
    vocab: &Vocabulary,
    n: usize,
    tau: &ToleranceVector,
    phi: &Formula,
    kb: &Formula,
    config: &CountConfig,
) -> Result<Option<BigRational>> {
    let (kb_count, both) = count_pair(vocab, n, tau, phi, kb, config)?;
    Ok(ratio(both, kb_count))
}

fn ratio(num: BigUint, den: BigUint) -> Option<BigRational> {
    (!den.is_zero()).then(|| BigRational::new(BigInt::from(num), BigInt::from(den)))
}

/// One entry of a finite prefix of the sequence `Pr_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct SequencePoint {
    pub n: usize,
    pub value: Option<BigRational>,
    /// Smallest and largest defined value among this and all earlier entries.
    pub running_inf: Option<BigRational>,
    pub running_sup: Option<BigRational>,
}

/// `Pr_N` for each `N` in `ns`, in the given order.
pub fn pr_sequence(
    vocab: &Vocabulary,
    ns: &[usize],
    tau: &ToleranceVector,
    phi: &Formula,
    kb: &Formula,
    config: &CountConfig,
) -> Result<Vec<SequencePoint>> {
    let mut out: Vec<SequencePoint> = Vec::with_capacity(ns.len());
    for &n in ns {
        let value = pr_n_with(vocab, n, tau, phi, kb, config)?;
        let prev = out.last();
        let pick = |old: Option<&BigRational>, better: fn(&BigRational, &BigRational) -> bool| match (old, &value) {
            (Some(o), Some(v)) => Some(if better(v, o) { v.clone() } else { o.clone() }),
            (o, v) => o.cloned().or(v.clone()),
        };
        let running_inf = pick(prev.and_then(|p| p.running_inf.as_ref()), |a, b| a < b);
        let running_sup = pick(prev.and_then(|p| p.running_sup.as_ref()), |a, b| a > b);
        out.push(SequencePoint { n, value, running_inf, running_sup });
    }
    Ok(out)
}
