//! Property checks, one per module invariant. Each takes a generated input
//! and fails with a message describing the counterexample.
#![allow(dead_code)]

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use randworlds::belief::{believe, believe_general, believe_simple, pr_tau, BeliefConfig, Status};
use randworlds::canon::{flatten, is_flat, to_canonical, Poly};
use randworlds::constraints::{gamma, is_essentially_positive, realize_world, solution_space, RegionDescriptor};
use randworlds::embed::{defaults_translate, nilsson_believe, DefaultRule};
use randworlds::maxent::{bound_statistic, entropy, maximize, MaxEntConfig, Uniqueness};
use randworlds::model::{atom_indices, CmpOp, Formula, PropFormula, Term, ToleranceVector, Vocabulary};
use randworlds::parser::{parse_formula, print_formula, Side};
use randworlds::semantics::{closed_form_count, count_worlds_with, pr_n_with, Backend, CountConfig, Evaluator};

use super::*;

pub type Check = std::result::Result<(), TestCaseError>;

fn exhaustive() -> CountConfig {
    CountConfig { backend: Backend::Exhaustive, ..CountConfig::default() }
}

fn taus() -> [ToleranceVector; 2] {
    [ToleranceVector::uniform(rat(1, 10)).unwrap(), ToleranceVector::uniform(rat(3, 10)).unwrap()]
}

/// Conjunction and negation act on atom sets as intersection and complement.
pub fn atom_algebra(k: usize, a: &Formula, b: &Formula) -> Check {
    let v = Vocabulary::unary(PREDICATES[..k].iter().copied()).unwrap();
    let sa = atom_indices(a, &v).unwrap();
    let sb = atom_indices(b, &v).unwrap();
    let both = atom_indices(&Formula::and(a.clone(), b.clone()), &v).unwrap();
    let want: Vec<usize> = sa.iter().copied().filter(|j| sb.contains(j)).collect();
    prop_assert_eq!(both, want);
    let neg = atom_indices(&Formula::not(a.clone()), &v).unwrap();
    let want: Vec<usize> = (0..v.num_atoms()).filter(|j| !sa.contains(j)).collect();
    prop_assert_eq!(neg, want);
    Ok(())
}

/// Quantifier-free bodies over `x` with only the given predicates.
pub fn pure_body(k: usize) -> BoxedStrategy<Formula> {
    let leaf = proptest::sample::select(PREDICATES[..k].to_vec()).prop_map(|p| Formula::unary(p, Term::var("x")));
    leaf.prop_recursive(3, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::or(a, b)),
        ]
    })
    .boxed()
}

/// Printing then parsing gives back the same tree, on both sides.
pub fn round_trip(k: usize, f: &Formula, q: &Formula) -> Check {
    let v = vocab(k);
    let text = print_formula(f);
    let back = parse_formula(&text, &v, Side::Kb).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
    prop_assert_eq!(&back, f, "{}", text);
    let text = print_formula(q);
    prop_assert_eq!(&parse_formula(&text, &v, Side::Query).unwrap(), q);
    Ok(())
}

/// A knowledge base mentioning a relation or term equality never gets past
/// the parser or the canonicalizer.
pub fn rejection(k: usize, f: &Formula, which: bool) -> Check {
    let v = Vocabulary::new(PREDICATES[..k].iter().map(|s| s.to_string()).collect(), vec![CONSTANT.into()], vec![
        ("R".into(), 2),
    ])
    .unwrap();
    let c = Term::constant(CONSTANT);
    let bad = if which { Formula::Eq(c.clone(), c) } else { Formula::pred("R", vec![c.clone(), c]) };
    let g = Formula::and(f.clone(), bad);
    prop_assert!(parse_formula(&print_formula(&g), &v, Side::Kb).is_err());
    prop_assert!(to_canonical(&g, &v).is_err());
    Ok(())
}

/// Probabilities lie in `[0, 1]` and the joint count never exceeds the
/// knowledge-base count.
pub fn probability_bounds(k: usize, f: &Formula, q: &Formula) -> Check {
    let v = vocab(k);
    let tau = ToleranceVector::uniform(rat(1, 10)).unwrap();
    for n in 1..=3 {
        let all = count_worlds_with(&v, n, &tau, f, false, &exhaustive()).unwrap().total;
        let both = count_worlds_with(&v, n, &tau, &Formula::and(q.clone(), f.clone()), false, &exhaustive()).unwrap().total;
        prop_assert!(both <= all);
        if let Some(p) = pr_n_with(&v, n, &tau, q, f, &exhaustive()).unwrap() {
            prop_assert!(p >= BigRational::zero() && p <= BigRational::from_integer(1.into()));
        }
    }
    Ok(())
}

/// An unused predicate multiplies every count by `2^N` and leaves the
/// probabilities alone.
pub fn vocabulary_invariance(f: &Formula, q: &Formula) -> Check {
    let small = vocab(1);
    let big = vocab(2);
    let tau = ToleranceVector::uniform(rat(1, 10)).unwrap();
    for n in 1..=4 {
        let a = count_worlds_with(&small, n, &tau, f, false, &exhaustive()).unwrap().total;
        let b = count_worlds_with(&big, n, &tau, f, false, &exhaustive()).unwrap().total;
        prop_assert_eq!(&a * BigUint::from(2u32).pow(n as u32), b);
        let pa = pr_n_with(&small, n, &tau, q, f, &exhaustive()).unwrap();
        let pb = pr_n_with(&big, n, &tau, q, f, &exhaustive()).unwrap();
        prop_assert_eq!(pa, pb);
    }
    Ok(())
}

/// For constant-free knowledge bases each histogram entry is the closed-form
/// count of its lattice point.
pub fn histogram_is_closed_form(k: usize, f: &Formula) -> Check {
    prop_assume!(f.constants().is_empty());
    let v = vocab(k);
    let tau = ToleranceVector::uniform(rat(1, 10)).unwrap();
    for n in 1..=4 {
        let rep = count_worlds_with(&v, n, &tau, f, true, &exhaustive()).unwrap();
        let mut sum = BigUint::zero();
        for (counts, c) in rep.histogram.iter().flatten() {
            let u: Vec<BigRational> = counts.iter().map(|&x| rat(x as i64, n as i64)).collect();
            let closed = closed_form_count(&u, n, &v).unwrap();
            prop_assert_eq!(c, &closed);
            sum += closed;
        }
        prop_assert_eq!(sum, rep.total);
    }
    Ok(())
}

/// The knowledge base and its canonical form hold in the same worlds.
pub fn canonical_equivalence(k: usize, f: &Formula) -> Check {
    let v = vocab(k);
    let cf = to_canonical(f, &v).map_err(|e| TestCaseError::fail(format!("{}: {e}", print_formula(f))))?;
    let g = cf.to_formula();
    for n in 1..=4 {
        let ws = worlds(&v, n);
        for tau in taus() {
            let a = satisfying(&v, f, &tau, &ws);
            let b = satisfying(&v, &g, &tau, &ws);
            if let Some(i) = (0..ws.len()).find(|&i| a[i] != b[i]) {
                return Err(TestCaseError::fail(format!(
                    "{} differs from its canonical form in {:?} at tau {}",
                    print_formula(f),
                    ws[i],
                    tau.describe()
                )));
            }
        }
    }
    Ok(())
}

/// Every satisfying world's point satisfies the instantiated constraints.
pub fn gamma_soundness(k: usize, f: &Formula) -> Check {
    let v = vocab(k);
    let g = gamma(&to_canonical(f, &v).unwrap());
    for tau in taus() {
        let inst = g.instantiate(&tau);
        for n in 1..=4 {
            let ws = worlds(&v, n);
            for (w, ok) in ws.iter().zip(satisfying(&v, f, &tau, &ws)) {
                if !ok {
                    continue;
                }
                let u = w.point(v.num_atoms());
                let holds = inst.cells().iter().any(|c| c.constraints.iter().all(|x| x.holds_exact(&u)));
                prop_assert!(holds, "{} at {:?}", print_formula(f), u);
            }
        }
    }
    Ok(())
}

/// Flattening always passes the scope audit.
pub fn flatness(f: &Formula) -> Check {
    prop_assert!(is_flat(&flatten(f).unwrap()));
    Ok(())
}

/// Canonicalizing the printed canonical form gives it back.
pub fn canonical_idempotence(k: usize, f: &Formula) -> Check {
    let v = vocab(k);
    let cf = to_canonical(f, &v).unwrap();
    let text = cf.to_string();
    let again = to_canonical(&parse_formula(&text, &v, Side::Kb).unwrap(), &v).unwrap();
    prop_assert_eq!(again.to_string(), text);
    Ok(())
}

/// Every lattice point satisfying the constraints strictly is realized by a
/// world of the knowledge base with those atom counts.
pub fn realizability(k: usize, f: &Formula) -> Check {
    let v = vocab(k);
    let g = gamma(&to_canonical(f, &v).unwrap());
    let tau = ToleranceVector::uniform(rat(1, 10)).unwrap();
    let inst = g.instantiate(&tau);
    let ev = Evaluator::new(&v, f, &tau).unwrap();
    for n in 1..=4usize {
        for counts in randworlds::semantics::combin::compositions(n, v.num_atoms()) {
            let u: Vec<BigRational> = counts.iter().map(|&x| rat(x as i64, n as i64)).collect();
            if !inst.cells().iter().any(|c| c.constraints.iter().all(|x| x.holds_exact(&u))) {
                continue;
            }
            let w = realize_world(&g, &v, &tau, &counts).unwrap();
            prop_assert_eq!(w.atom_counts(v.num_atoms()), counts.clone());
            prop_assert!(ev.holds(&w), "{} at {:?}", print_formula(f), counts);
        }
    }
    Ok(())
}

fn max_gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .map(|p| {
            b.iter().map(|q| p.iter().zip(q).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// On essentially positive knowledge bases the maxima approach the
/// zero-tolerance maxima at a linear rate as the tolerance shrinks. The gap
/// need not be monotone: a removed range can pin the maximum at one end for
/// large tolerances and release it for small ones.
pub fn tolerance_convergence(k: usize, f: &Formula) -> Check {
    let v = vocab(k);
    let cf = to_canonical(f, &v).unwrap();
    let config = MaxEntConfig::default();
    let Ok(ep) = is_essentially_positive(&cf, &config) else { return Ok(()) };
    prop_assume!(ep.positive);
    let Some(zero) = ep.zero else { return Ok(()) };
    let zero: Vec<Vec<f64>> = zero.points().map(<[f64]>::to_vec).collect();
    let g = gamma(&cf);
    for e in 2..=4 {
        let t = 10f64.powi(-e);
        let tau = ToleranceVector::uniform(rat(1, 10i64.pow(e as u32))).unwrap();
        // Large tolerances can empty the space; only the tail matters.
        let Ok(m) = maximize(&solution_space(&g, &tau).unwrap(), &config) else { continue };
        let pts: Vec<Vec<f64>> = m.points().map(<[f64]>::to_vec).collect();
        let d = max_gap(&pts, &zero);
        prop_assert!(d <= 100.0 * t + 1e-5, "{}: gap {d} at tau {t}", print_formula(f));
    }
    Ok(())
}

fn region_at(k: usize, f: &Formula, tau: &ToleranceVector) -> Option<RegionDescriptor> {
    let v = vocab(k);
    solution_space(&gamma(&to_canonical(f, &v).ok()?), tau).ok()
}

/// Maxima are feasible, cannot be improved by small feasible moves, and have
/// entropy between 0 and `ln K`.
pub fn maxima_are_local_optima(k: usize, f: &Formula, seed: u64) -> Check {
    let tau = ToleranceVector::uniform(rat(1, 10)).unwrap();
    let Some(region) = region_at(k, f, &tau) else { return Ok(()) };
    let Ok(m) = maximize(&region, &MaxEntConfig::default()) else { return Ok(()) };
    let kk = region.num_atoms;
    prop_assert!(m.residuals.feasibility < 1e-8, "residual {}", m.residuals.feasibility);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in m.points() {
        let h = entropy(p);
        prop_assert!(h >= -1e-12 && h <= (kk as f64).ln() + 1e-12);
        for _ in 0..200 {
            let mut d: Vec<f64> = (0..kk).map(|_| rng.random::<f64>() - 0.5).collect();
            let mean = d.iter().sum::<f64>() / kk as f64;
            d.iter_mut().for_each(|x| *x -= mean);
            let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let q: Vec<f64> = p.iter().zip(&d).map(|(a, b)| a + b * 1e-4 / norm).collect();
            if q.iter().all(|&x| x >= 0.0) && region.contains(&q, 0.0) {
                prop_assert!(entropy(&q) <= h + 1e-10, "{:?} improves on {:?}", q, p);
            }
        }
    }
    Ok(())
}

/// Linear regions give the same maximum from every seed.
pub fn linear_determinism(k: usize, f: &Formula, seed: u64) -> Check {
    let tau = ToleranceVector::uniform(rat(1, 10)).unwrap();
    let Some(region) = region_at(k, f, &tau) else { return Ok(()) };
    prop_assume!(region.is_linear());
    let a = maximize(&region, &MaxEntConfig::default());
    let b = maximize(&region, &MaxEntConfig { seed, linear_starts: 4, ..MaxEntConfig::default() });
    let (Ok(a), Ok(b)) = (a, b) else { return Ok(()) };
    let pa: Vec<Vec<f64>> = a.points().map(<[f64]>::to_vec).collect();
    let pb: Vec<Vec<f64>> = b.points().map(<[f64]>::to_vec).collect();
    prop_assert!(max_gap(&pa, &pb) <= 1e-8 && max_gap(&pb, &pa) <= 1e-8);
    Ok(())
}

/// No point of a grid over the feasible set beats the solver by more than
/// `1e-4`.
pub fn grid_oracle(k: usize, f: &Formula) -> Check {
    let tau = ToleranceVector::uniform(rat(1, 10)).unwrap();
    let Some(region) = region_at(k, f, &tau) else { return Ok(()) };
    let Ok(m) = maximize(&region, &MaxEntConfig::default()) else { return Ok(()) };
    let steps: usize = if region.num_atoms == 2 { 1000 } else { 50 };
    let mut best = f64::NEG_INFINITY;
    let mut point = vec![0usize; region.num_atoms];
    grid(&mut point, 0, steps, &mut |c| {
        let u: Vec<f64> = c.iter().map(|&x| x as f64 / steps as f64).collect();
        if region.contains(&u, 0.0) {
            best = best.max(entropy(&u));
        }
    });
    prop_assert!(best <= m.entropy + 1e-4, "grid {best} beats solver {}", m.entropy);
    Ok(())
}

fn grid(point: &mut Vec<usize>, i: usize, left: usize, visit: &mut dyn FnMut(&[usize])) {
    if i + 1 == point.len() {
        point[i] = left;
        visit(point);
        return;
    }
    for x in 0..=left {
        point[i] = x;
        grid(point, i + 1, left - x, visit);
    }
}

/// A knowledge base split as evidence about the constant plus constant-free
/// statistics, with a ground query.
pub fn simple_case() -> impl Strategy<Value = (usize, Formula, Formula, Formula)> {
    (1usize..=2).prop_flat_map(|k| {
        (kb(k).prop_filter("mentions the constant", |f| f.constants().is_empty()), ground_query(k), ground_query(k))
            .prop_map(move |(rest, psi, phi)| (k, rest, psi, phi))
    })
}

/// Belief in a simple query and in its negation sum to one.
pub fn complementarity(k: usize, rest: &Formula, psi: &Formula, phi: &Formula) -> Check {
    let v = vocab(k);
    let kb = Formula::and(psi.clone(), rest.clone());
    let config = BeliefConfig::default();
    let (Ok(a), Ok(b)) = (believe(phi, &kb, &v, &config), believe(&Formula::not(phi.clone()), &kb, &v, &config)) else {
        return Ok(());
    };
    prop_assume!(a.status == Status::Defined && b.status == Status::Defined && a.direct_inference.is_none());
    let sum = a.value.unwrap() + b.value.unwrap();
    prop_assert!((sum - 1.0).abs() <= 1e-9, "{} + its negation = {sum}", a.query);
    Ok(())
}

/// The value at a positive tolerance lies within the ratio bounds the
/// constant-free statistics allow there.
pub fn direct_inference_consistency(k: usize, rest: &Formula, psi: &Formula, phi: &Formula) -> Check {
    let v = vocab(k);
    let tau = ToleranceVector::uniform(rat(1, 10)).unwrap();
    let Some(region) = region_at(k, rest, &tau) else { return Ok(()) };
    let x = Term::var("x");
    let bare = |f: &Formula| randworlds_replace(f, &x);
    let num = Poly::sum_u(atom_indices(&Formula::and(bare(phi), bare(psi)), &v).unwrap());
    let den = Poly::sum_u(atom_indices(&bare(psi), &v).unwrap());
    let Ok((lo, hi)) = bound_statistic(&region, &num, &den) else { return Ok(()) };
    let kb = Formula::and(psi.clone(), rest.clone());
    let Ok(Some(value)) = pr_tau(phi, &kb, &v, &tau, &MaxEntConfig::default()) else { return Ok(()) };
    prop_assert!(value >= lo - 1e-6 && value <= hi + 1e-6, "{value} outside [{lo}, {hi}]");
    Ok(())
}

/// Replaces the constant by `x`.
fn randworlds_replace(f: &Formula, x: &Term) -> Formula {
    match f {
        Formula::Atom { pred, args } => {
            Formula::pred(pred, args.iter().map(|a| if a.name() == CONSTANT { x.clone() } else { a.clone() }).collect())
        }
        Formula::Not(a) => Formula::not(randworlds_replace(a, x)),
        Formula::And(a, b) => Formula::and(randworlds_replace(a, x), randworlds_replace(b, x)),
        Formula::Or(a, b) => Formula::or(randworlds_replace(a, x), randworlds_replace(b, x)),
        other => other.clone(),
    }
}

/// At a fixed tolerance the exact probability at a large domain is close to
/// the maximum-entropy value at that tolerance. Comparing with the limit
/// instead would mix in an O(tau) shift.
pub fn oracle_agreement(rest: &Formula, psi: &Formula, phi: &Formula) -> Check {
    let v = vocab(1);
    let kb = Formula::and(psi.clone(), rest.clone());
    let Ok(r) = believe(phi, &kb, &v, &BeliefConfig::default()) else { return Ok(()) };
    prop_assume!(r.status == Status::Defined && r.class == "simple" && r.direct_inference.is_none());
    let tau = ToleranceVector::uniform(rat(1, 20)).unwrap();
    let Ok(Some(want)) = pr_tau(phi, &kb, &v, &tau, &MaxEntConfig::default()) else { return Ok(()) };
    let cc = CountConfig { backend: Backend::Aggregated, ..CountConfig::default() };
    let Some(p) = pr_n_with(&v, 200, &tau, phi, &kb, &cc).unwrap() else { return Ok(()) };
    let p = p.to_f64().unwrap();
    prop_assert!((p - want).abs() <= 0.05, "{} | {}: maxent {want} vs exact {p}", r.query, print_formula(&kb));
    Ok(())
}

/// Both routes agree on simple queries.
pub fn general_matches_simple(k: usize, rest: &Formula, psi: &Formula, phi: &Formula) -> Check {
    let v = vocab(k);
    let kb = Formula::and(psi.clone(), rest.clone());
    let config = BeliefConfig::default();
    let (Ok(a), Ok(b)) = (believe_simple(phi, &kb, &v, &config), believe_general(phi, &kb, &v, &config)) else {
        return Ok(());
    };
    prop_assume!(a.status == Status::Defined && b.status == Status::Defined && a.direct_inference.is_none());
    prop_assert!((a.value.unwrap() - b.value.unwrap()).abs() <= 1e-9, "{:?} vs {:?}", a.value, b.value);
    Ok(())
}

/// The unary route agrees with maximum entropy over the outcome space.
pub fn nilsson_agreement(case: &LinearCase) -> Check {
    let Some(want) = direct_answer(case) else { return Err(TestCaseError::reject("oracle did not converge")) };
    let r = nilsson_believe(&case.lambda, &case.beta, &case.given, &BeliefConfig::default()).unwrap();
    prop_assert_eq!(r.status, Status::Defined, "{:?}", case);
    let got = r.value.unwrap();
    prop_assert!((got - want).abs() <= 1e-6, "{got} vs {want} for {:?}", case);
    Ok(())
}

pub fn rule_set() -> impl Strategy<Value = Vec<DefaultRule>> {
    (1usize..=3).prop_flat_map(|k| {
        proptest::collection::vec(
            (prop_formula(k), prop_formula(k), proptest::bool::weighted(0.2))
                .prop_map(|(a, c, strict)| DefaultRule { antecedent: a, consequent: c, strict }),
            1..=4,
        )
    })
}

/// Default rules translate to linear cells with one maximum.
pub fn defaults_are_linear(rules: &[DefaultRule]) -> Check {
    let names: std::collections::BTreeSet<String> = rules
        .iter()
        .flat_map(|r| r.antecedent.vars().into_iter().chain(r.consequent.vars()))
        .map(|p| randworlds::embed::predicate_name(&p))
        .collect();
    let v = Vocabulary::unary(names).unwrap();
    let g = gamma(&to_canonical(&defaults_translate(rules), &v).unwrap());
    let tau = ToleranceVector::uniform(rat(1, 100)).unwrap();
    let inst = g.instantiate(&tau);
    prop_assert!(inst.cells().iter().all(|c| c.is_linear()));
    if let Ok(m) = maximize(&RegionDescriptor::from_formula(&inst).unwrap(), &MaxEntConfig::default()) {
        prop_assert_eq!(m.unique, Uniqueness::ProvenUnique);
    }
    Ok(())
}

/// `Pr_N(c1 != c2) = 1 - 1/N` with no knowledge.
pub fn unique_names(n: usize) -> Check {
    let v = Vocabulary::unary(["P"]).unwrap().with_constants(["c1", "c2"]).unwrap();
    let q = Formula::not(Formula::Eq(Term::constant("c1"), Term::constant("c2")));
    let p = pr_n_with(&v, n, &ToleranceVector::zero(), &q, &Formula::True, &exhaustive()).unwrap().unwrap();
    prop_assert_eq!(p, BigRational::new(BigInt::from(n as i64 - 1), BigInt::from(n as i64)));
    Ok(())
}

/// Exactly one atom holds of every element.
pub fn atoms_partition(k: usize) -> Check {
    let v = Vocabulary::unary(PREDICATES[..k].iter().copied()).unwrap();
    let kk = v.num_atoms();
    for a in 0..kk {
        let w = randworlds::semantics::World::new(&v, 1, vec![a], vec![]).unwrap();
        let holding = (0..kk)
            .filter(|&j| {
                let f = Formula::exists("x", randworlds::model::atom_formula(&v, j, &Term::var("x")));
                Evaluator::exact(&v, &f).unwrap().holds(&w)
            })
            .count();
        prop_assert_eq!(holding, 1);
    }
    Ok(())
}

/// With no knowledge the share of worlds far from one half shrinks with `N`.
pub fn concentration() -> Check {
    let v = Vocabulary::unary(["P"]).unwrap();
    let mut last = f64::INFINITY;
    for n in [50usize, 100, 200, 400] {
        let rep = count_worlds_with(&v, n, &ToleranceVector::zero(), &Formula::True, true, &CountConfig::default()).unwrap();
        let far: BigUint = rep
            .histogram
            .iter()
            .flatten()
            .filter(|(c, _)| (c[0] as f64 / n as f64 - 0.5).abs() > 0.1)
            .map(|(_, x)| x.clone())
            .sum();
        let share = BigRational::new(BigInt::from(far), BigInt::from(rep.total)).to_f64().unwrap();
        prop_assert!(share < last, "share {share} at N={n} after {last}");
        last = share;
    }
    Ok(())
}

/// A comparison on the exact side as an unused helper for generators.
pub fn exact_cmp(op: CmpOp) -> bool {
    !op.is_approximate()
}

pub fn prop_var(name: &str) -> PropFormula {
    PropFormula::var(name)
}
