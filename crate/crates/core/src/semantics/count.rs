use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Formula, ToleranceVector, Vocabulary};
use crate::par::{self, Exec};
use crate::semantics::combin::{
    composition_count, compositions, factorials, falling_factorial, multinomial, pow, set_partitions,
};
use crate::semantics::eval::Evaluator;
use crate::semantics::world::World;

/// How worlds are counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Aggregated when every formula is unary, exhaustive otherwise.
    #[default]
    Auto,
    /// Visit every world. Works for any formula.
    Exhaustive,
    /// Visit one representative per group of worlds that agree on the atom
    /// counts and on where the constants sit. Only for unary formulas.
    Aggregated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountConfig {
    pub backend: Backend,
    pub exec: Exec,
    /// Largest number of worlds the exhaustive backend will visit.
    pub max_worlds: u64,
    /// Largest number of groups the aggregated backend will visit.
    pub max_groups: u64,
}

impl Default for CountConfig {
    fn default() -> Self {
        CountConfig { backend: Backend::Auto, exec: Exec::default(), max_worlds: 10_000_000, max_groups: 5_000_000 }
    }
}

/// Result of counting the worlds of one size that satisfy a formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountReport {
    pub n: usize,
    pub total: BigUint,
    /// Satisfying worlds by atom-count vector; the point of a world is the
    /// vector divided by `n`.
    pub histogram: Option<BTreeMap<Vec<usize>, BigUint>>,
    pub backend: Backend,
}

impl CountReport {
    /// `u1,...,uK,count` rows with exact coordinates, in key order.
    pub fn to_csv(&self, num_atoms: usize) -> String {
        let mut out = (1..=num_atoms).map(|j| format!("u{j}")).collect::<Vec<_>>().join(",");
        out.push_str(",count\n");
        for (counts, c) in self.histogram.iter().flatten() {
            for &x in counts {
                out.push_str(&BigRational::new(BigInt::from(x), BigInt::from(self.n)).to_string());
                out.push(',');
            }
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out
    }
}

/// Counts the worlds of size `n` satisfying the closed formula `f`.
pub fn count_worlds(
    vocab: &Vocabulary,
    n: usize,
    tau: &ToleranceVector,
    f: &Formula,
    want_histogram: bool,
) -> Result<CountReport> {
    count_worlds_with(vocab, n, tau, f, want_histogram, &CountConfig::default())
}

pub fn count_worlds_with(
    vocab: &Vocabulary,
    n: usize,
    tau: &ToleranceVector,
    f: &Formula,
    want_histogram: bool,
    config: &CountConfig,
) -> Result<CountReport> {
    let ev = closed(vocab, f, tau)?;
    let (tally, backend) = tally(vocab, n, &[ev], want_histogram, config)?;
    Ok(CountReport { n, total: tally.levels[0].clone(), histogram: tally.histogram, backend })
}

/// Counts `#worlds(kb)` and `#worlds(kb & phi)` in one pass.
pub fn count_pair(
    vocab: &Vocabulary,
    n: usize,
    tau: &ToleranceVector,
    phi: &Formula,
    kb: &Formula,
    config: &CountConfig,
) -> Result<(BigUint, BigUint)> {
    let evs = [closed(vocab, kb, tau)?, closed(vocab, phi, tau)?];
    let (tally, _) = tally(vocab, n, &evs, false, config)?;
    let mut it = tally.levels.into_iter();
    Ok((it.next().unwrap_or_default(), it.next().unwrap_or_default()))
}

/// Number of worlds of size `n` whose atom proportions are exactly `u`, with
/// constants and relations unconstrained.
pub fn closed_form_count(u: &[BigRational], n: usize, vocab: &Vocabulary) -> Result<BigUint> {
    if u.len() != vocab.num_atoms() {
        return Err(Error::Invalid(format!("point has {} coordinates, expected {}", u.len(), vocab.num_atoms())));
    }
    let scale = BigRational::from_integer(BigInt::from(n));
    let mut parts = Vec::with_capacity(u.len());
    for x in u {
        let c = x * &scale;
        if !c.is_integer() || c < BigRational::zero() {
            return Err(Error::Invalid("point is not a multiple of 1/N".into()));
        }
        parts.push(c.to_integer().to_usize().ok_or_else(|| Error::Invalid("coordinate out of range".into()))?);
    }
    if parts.iter().sum::<usize>() != n {
        return Err(Error::Invalid("coordinates do not sum to 1".into()));
    }
    let fact = factorials(n);
    Ok(relation_factor(vocab, n, &[]) * pow(n, vocab.constants().len()) * multinomial(&parts, &fact))
}

fn closed(vocab: &Vocabulary, f: &Formula, tau: &ToleranceVector) -> Result<Evaluator> {
    let ev = Evaluator::new(vocab, f, tau)?;
    if !ev.is_closed() {
        return Err(Error::Invalid("only closed formulas can be counted".into()));
    }
    Ok(ev)
}

/// `prod 2^(n^arity)` over the relations not in `materialized`.
fn relation_factor(vocab: &Vocabulary, n: usize, materialized: &[usize]) -> BigUint {
    let bits: usize = vocab
        .relations()
        .iter()
        .enumerate()
        .filter(|(r, _)| !materialized.contains(r))
        .map(|(_, (_, a))| n.pow(*a as u32))
        .sum();
    BigUint::one() << bits
}

struct Tally {
    /// Entry `i` counts worlds satisfying evaluators `0..=i`.
    levels: Vec<BigUint>,
    /// Worlds satisfying every evaluator, keyed by atom counts.
    histogram: Option<BTreeMap<Vec<usize>, BigUint>>,
}

fn tally(
    vocab: &Vocabulary,
    n: usize,
    evs: &[Evaluator],
    want_histogram: bool,
    config: &CountConfig,
) -> Result<(Tally, Backend)> {
    if n == 0 {
        return Err(Error::Invalid("domain size must be at least 1".into()));
    }
    let unary = evs.iter().all(|e| e.relations().is_empty());
    let backend = match config.backend {
        Backend::Auto if unary => Backend::Aggregated,
        Backend::Auto => Backend::Exhaustive,
        b => b,
    };
    let tally = match backend {
        Backend::Aggregated if !unary => {
            return Err(Error::Unsupported("aggregated counting needs formulas without relations".into()))
        }
        Backend::Aggregated => aggregated(vocab, n, evs, want_histogram, config)?,
        _ => exhaustive(vocab, n, evs, want_histogram, config)?,
    };
    Ok((tally, backend))
}

#[derive(Default)]
struct Partial<W> {
    levels: Vec<W>,
    histogram: BTreeMap<Vec<usize>, W>,
}

/// Adds the levels reached by `w` with weight `weight`.
fn record<W: Clone + std::ops::AddAssign>(
    evs: &[Evaluator],
    w: &World,
    weight: &W,
    num_atoms: usize,
    want_histogram: bool,
    acc: &mut Partial<W>,
) {
    for (i, ev) in evs.iter().enumerate() {
        if !ev.holds(w) {
            return;
        }
        acc.levels[i] += weight.clone();
    }
    if want_histogram {
        let key = w.atom_counts(num_atoms);
        match acc.histogram.get_mut(&key) {
            Some(c) => *c += weight.clone(),
            None => {
                acc.histogram.insert(key, weight.clone());
            }
        }
    }
}

fn merge<W>(parts: Vec<Partial<W>>, levels: usize, factor: &BigUint, want_histogram: bool) -> Tally
where
    BigUint: From<W>,
{
    let mut total = vec![BigUint::zero(); levels];
    let mut histogram: BTreeMap<Vec<usize>, BigUint> = BTreeMap::new();
    for p in parts {
        for (t, c) in total.iter_mut().zip(p.levels) {
            *t += BigUint::from(c) * factor;
        }
        for (k, c) in p.histogram {
            *histogram.entry(k).or_default() += BigUint::from(c) * factor;
        }
    }
    Tally { levels: total, histogram: want_histogram.then_some(histogram) }
}

fn exhaustive(
    vocab: &Vocabulary,
    n: usize,
    evs: &[Evaluator],
    want_histogram: bool,
    config: &CountConfig,
) -> Result<Tally> {
    let k = vocab.num_atoms();
    let num_consts = vocab.constants().len();
    let mut materialized: Vec<usize> = evs.iter().flat_map(|e| e.relations().iter().copied()).collect();
    materialized.sort();
    materialized.dedup();
    let bits: Vec<usize> = materialized.iter().map(|&r| n.pow(vocab.relations()[r].1 as u32)).collect();
    let capacity = || Error::Capacity(format!("more than {} worlds of size {n}", config.max_worlds));
    let atom_worlds = (k as u64).checked_pow(n as u32).ok_or_else(capacity)?;
    let mut states = atom_worlds.checked_mul((n as u64).checked_pow(num_consts as u32).ok_or_else(capacity)?);
    for &b in &bits {
        states = states.and_then(|s| s.checked_mul(1u64.checked_shl(b as u32).filter(|_| b < 63)?));
    }
    if states.is_none_or(|s| s > config.max_worlds) {
        return Err(capacity());
    }

    let chunks = atom_worlds.min(256) as usize;
    let parts = par::map_range(config.exec, chunks, |ci| {
        let start = atom_worlds * ci as u64 / chunks as u64;
        let end = atom_worlds * (ci as u64 + 1) / chunks as u64;
        let mut acc = Partial { levels: vec![0u64; evs.len()], histogram: BTreeMap::new() };
        let mut digits = vec![0usize; n];
        let mut rest = start;
        for d in digits.iter_mut().rev() {
            *d = (rest % k as u64) as usize;
            rest /= k as u64;
        }
        let mut w = World {
            n,
            atoms: digits,
            constants: vec![0; num_consts],
            relations: vec![Vec::new(); vocab.relations().len()],
        };
        for (&r, &b) in materialized.iter().zip(&bits) {
            w.relations[r] = vec![false; b];
        }
        for _ in start..end {
            loop {
                relation_sweep(&mut w, &materialized, &bits, 0, &mut |w| {
                    record(evs, w, &1u64, k, want_histogram, &mut acc)
                });
                if !odometer(&mut w.constants, n) {
                    break;
                }
            }
            odometer(&mut w.atoms, k);
        }
        acc
    });
    Ok(merge(parts, evs.len(), &relation_factor(vocab, n, &materialized), want_histogram))
}

/// Visits every assignment of the materialized relation tables from index `i` on.
fn relation_sweep(w: &mut World, rels: &[usize], bits: &[usize], i: usize, visit: &mut dyn FnMut(&World)) {
    if i == rels.len() {
        visit(w);
        return;
    }
    let r = rels[i];
    for mask in 0u64..(1u64 << bits[i]) {
        for (b, slot) in w.relations[r].iter_mut().enumerate() {
            *slot = (mask >> b) & 1 == 1;
        }
        relation_sweep(w, rels, bits, i + 1, visit);
    }
}

/// Advances a base-`base` counter, least significant digit last. Returns
/// false after wrapping around to all zeros.
fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

fn aggregated(
    vocab: &Vocabulary,
    n: usize,
    evs: &[Evaluator],
    want_histogram: bool,
    config: &CountConfig,
) -> Result<Tally> {
    let k = vocab.num_atoms();
    let num_consts = vocab.constants().len();
    let partitions = set_partitions(num_consts);
    let groups = composition_count(n, k) * BigUint::from(partitions.len());
    if groups > BigUint::from(config.max_groups) {
        return Err(Error::Capacity(format!("more than {} world groups of size {n}", config.max_groups)));
    }
    let fact = factorials(n);
    let parts = par::map(config.exec, compositions(n, k), |counts| {
        let mut acc = Partial { levels: vec![BigUint::zero(); evs.len()], histogram: BTreeMap::new() };
        let base = multinomial(&counts, &fact);
        let mut starts = vec![0; k];
        let mut atoms = Vec::with_capacity(n);
        for (a, &c) in counts.iter().enumerate() {
            starts[a] = atoms.len();
            atoms.extend(std::iter::repeat_n(a, c));
        }
        let mut w = World { n, atoms, constants: vec![0; num_consts], relations: vec![Vec::new(); vocab.relations().len()] };
        for blocks_of in &partitions {
            let blocks = blocks_of.iter().max().map_or(0, |b| b + 1);
            let mut block_atoms = vec![0usize; blocks];
            loop {
                let mut used = vec![0usize; k];
                let mut position = vec![0usize; blocks];
                for (b, &a) in block_atoms.iter().enumerate() {
                    position[b] = starts[a] + used[a];
                    used[a] += 1;
                }
                if used.iter().zip(&counts).all(|(u, c)| u <= c) {
                    let weight = used.iter().zip(&counts).fold(base.clone(), |acc, (&u, &c)| acc * falling_factorial(c, u));
                    for (ci, &b) in blocks_of.iter().enumerate() {
                        w.constants[ci] = position[b];
                    }
                    record(evs, &w, &weight, k, want_histogram, &mut acc);
                }
                if !odometer(&mut block_atoms, k) {
                    break;
                }
            }
        }
        acc
    });
    Ok(merge(parts, evs.len(), &relation_factor(vocab, n, &[]), want_histogram))
}
