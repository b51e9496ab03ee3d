//! Generators and independent oracles shared by the integration suites.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use randworlds::embed::{Bound, PropConstraint};
use randworlds::model::{CmpOp, Expr, Formula, PropFormula, Term, ToleranceVector, Vocabulary};
use randworlds::semantics::{Evaluator, World};

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub const PREDICATES: [&str; 3] = ["P", "Q", "R"];
pub const CONSTANT: &str = "c";

/// The first `k` of `P`, `Q`, `R`, with the constant `c`.
pub fn vocab(k: usize) -> Vocabulary {
    Vocabulary::unary(PREDICATES[..k].iter().copied()).unwrap().with_constants([CONSTANT]).unwrap()
}

/// A runner whose sequence of cases depends only on `seed`.
pub fn seeded_runner(cases: u32, seed: u8) -> TestRunner {
    let rng = TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]);
    TestRunner::new_with_rng(Config { cases, failure_persistence: None, ..Config::default() }, rng)
}

/// `count` values drawn from `s`, reproducibly.
pub fn sample<S: Strategy>(s: S, count: usize, seed: u8) -> Vec<S::Value> {
    let mut runner = seeded_runner(1, seed);
    (0..count).map(|_| s.new_tree(&mut runner).unwrap().current()).collect()
}

fn x() -> Term {
    Term::var("x")
}

fn pred_strategy(k: usize) -> impl Strategy<Value = String> {
    proptest::sample::select(PREDICATES[..k].to_vec()).prop_map(String::from)
}

/// Quantifier-free bodies over `x`, sometimes mentioning the constant.
pub fn body(k: usize, depth: u32) -> BoxedStrategy<Formula> {
    let leaf = prop_oneof![
        4 => pred_strategy(k).prop_map(|p| Formula::unary(&p, x())),
        1 => pred_strategy(k).prop_map(|p| Formula::unary(&p, Term::constant(CONSTANT))),
    ];
    leaf.prop_recursive(depth, 8, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::or(a, b)),
        ]
    })
    .boxed()
}

fn value() -> impl Strategy<Value = BigRational> {
    (0i64..=10).prop_map(|n| rat(n, 10))
}

fn proportion(k: usize) -> impl Strategy<Value = Expr> {
    prop_oneof![
        3 => body(k, 1).prop_map(|b| Expr::prop(b, &["x"])),
        2 => (body(k, 1), body(k, 1)).prop_map(|(b, g)| Expr::cond(b, g, &["x"])),
        1 => (body(k, 0), body(k, 0)).prop_map(|(a, b)| Expr::add(Expr::prop(a, &["x"]), Expr::prop(b, &["x"]))),
    ]
}

fn comparison(k: usize) -> impl Strategy<Value = Formula> {
    (proportion(k), value(), 0u8..5, 1u32..=2).prop_map(|(e, v, kind, i)| match kind {
        0 => Formula::compare(e, CmpOp::Approx(i), Expr::rational(v)),
        1 => Formula::compare(e, CmpOp::ApproxLeq(i), Expr::rational(v)),
        2 => Formula::compare(Expr::rational(v), CmpOp::ApproxLeq(i), e),
        3 => Formula::compare(e, CmpOp::Leq, Expr::rational(v)),
        _ => Formula::compare(e, CmpOp::Eq, Expr::rational(v)),
    })
}

/// Knowledge bases over `k` unary predicates and one constant, of
/// connective depth at most 3.
pub fn kb(k: usize) -> BoxedStrategy<Formula> {
    let leaf = prop_oneof![
        3 => comparison(k),
        2 => body(k, 1).prop_map(|b| Formula::exists("x", b)),
        1 => body(k, 1).prop_map(|b| Formula::forall("x", b)),
        2 => (pred_strategy(k), any::<bool>()).prop_map(|(p, pos)| {
            let a = Formula::unary(&p, Term::constant(CONSTANT));
            if pos { a } else { Formula::not(a) }
        }),
    ];
    leaf.prop_recursive(3, 6, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::implies(a, b)),
        ]
    })
    .boxed()
}

/// `(k, kb)` with `k` in `{1, 2}`.
pub fn sized_kb() -> impl Strategy<Value = (usize, Formula)> {
    (1usize..=2).prop_flat_map(|k| kb(k).prop_map(move |f| (k, f)))
}

/// Unary queries about the constant.
pub fn ground_query(k: usize) -> BoxedStrategy<Formula> {
    let leaf = pred_strategy(k).prop_map(|p| Formula::unary(&p, Term::constant(CONSTANT)));
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::or(a, b)),
        ]
    })
    .boxed()
}

/// Every world of size `n` over a unary vocabulary with constants.
pub fn worlds(vocab: &Vocabulary, n: usize) -> Vec<World> {
    let k = vocab.num_atoms();
    let c = vocab.constants().len();
    let mut out = Vec::new();
    let total_atoms = k.pow(n as u32);
    for code in 0..total_atoms {
        let mut atoms = Vec::with_capacity(n);
        let mut r = code;
        for _ in 0..n {
            atoms.push(r % k);
            r /= k;
        }
        for cc in 0..n.pow(c as u32) {
            let mut consts = Vec::with_capacity(c);
            let mut r = cc;
            for _ in 0..c {
                consts.push(r % n);
                r /= n;
            }
            out.push(World::new(vocab, n, atoms.clone(), consts).unwrap());
        }
    }
    out
}

/// Which of `ws` satisfy `f` at `tau`.
pub fn satisfying(vocab: &Vocabulary, f: &Formula, tau: &ToleranceVector, ws: &[World]) -> Vec<bool> {
    let ev = Evaluator::new(vocab, f, tau).unwrap();
    ws.iter().map(|w| ev.holds(w)).collect()
}

/// Entropy with `0 ln 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()
}

/// A linear constraint `a . p = b` over outcome probabilities.
#[derive(Clone, Debug)]
pub struct Row {
    pub a: Vec<f64>,
    pub b: f64,
}

/// Maximum-entropy distribution on `n` outcomes under equality rows, found
/// by Newton's method on the exponential-family dual. Assumes the rows admit
/// a strictly positive solution.
pub fn direct_maxent(n: usize, rows: &[Row]) -> Option<Vec<f64>> {
    let m = rows.len();
    let mut lambda = DVector::<f64>::zeros(m);
    let dist = |lambda: &DVector<f64>| -> (Vec<f64>, f64) {
        let s: Vec<f64> = (0..n).map(|j| (0..m).map(|i| lambda[i] * rows[i].a[j]).sum()).collect();
        let mx = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = s.iter().map(|v| (v - mx).exp()).collect();
        let z: f64 = w.iter().sum();
        let dual = mx + z.ln() - (0..m).map(|i| lambda[i] * rows[i].b).sum::<f64>();
        (w.iter().map(|v| v / z).collect(), dual)
    };
    for _ in 0..500 {
        let (p, g0) = dist(&lambda);
        let mean: Vec<f64> = (0..m).map(|i| (0..n).map(|j| rows[i].a[j] * p[j]).sum()).collect();
        let grad = DVector::from_iterator(m, (0..m).map(|i| mean[i] - rows[i].b));
        if grad.amax() < 1e-13 {
            return Some(p);
        }
        let mut h = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for l in 0..m {
                h[(i, l)] = (0..n).map(|j| p[j] * (rows[i].a[j] - mean[i]) * (rows[l].a[j] - mean[l])).sum();
            }
            h[(i, i)] += 1e-12;
        }
        let step = h.lu().solve(&grad)?;
        let mut t = 1.0;
        loop {
            let cand = &lambda - &step * t;
            if dist(&cand).1 <= g0 - 1e-4 * t * grad.dot(&step) || t < 1e-12 {
                lambda = cand;
                break;
            }
            t *= 0.5;
        }
    }
    None
}

/// A random probability-constraint set over `k` propositions, consistent by
/// construction, with the query pieces.
#[derive(Clone, Debug)]
pub struct LinearCase {
    pub props: Vec<String>,
    pub lambda: Vec<PropConstraint>,
    pub beta: PropFormula,
    pub given: PropFormula,
}

const PROPS: [&str; 3] = ["p", "q", "r"];

pub fn prop_formula(k: usize) -> BoxedStrategy<PropFormula> {
    let leaf = proptest::sample::select(PROPS[..k].to_vec()).prop_map(PropFormula::var);
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(PropFormula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| PropFormula::and(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| PropFormula::or(a, b)),
        ]
    })
    .boxed()
}

/// Truth of `f` at outcome `j`: proposition `i` is true when bit `k-1-i`
/// of `j` is clear, mirroring the atom order.
pub fn truth(f: &PropFormula, k: usize, j: usize) -> bool {
    f.eval(&|name| {
        let i = PROPS.iter().position(|p| *p == name).unwrap();
        (j >> (k - 1 - i)) & 1 == 0
    })
}

fn mass(w: &[i64], f: &PropFormula, k: usize) -> i64 {
    (0..w.len()).filter(|&j| truth(f, k, j)).map(|j| w[j]).sum()
}

pub fn linear_case() -> impl Strategy<Value = LinearCase> {
    (1usize..=3).prop_flat_map(|k| {
        let n = 1 << k;
        let constraint = (prop_formula(k), proptest::option::of(prop_formula(k)), 0u8..6);
        (
            proptest::collection::vec(1i64..10, n),
            proptest::collection::vec(constraint, 1..=3),
            prop_formula(k),
            proptest::option::of(prop_formula(k)),
        )
            .prop_filter_map("evidence without mass", move |(w, cons, beta, given)| {
                let given = given.unwrap_or(PropFormula::True);
                if mass(&w, &given, k) == 0 {
                    return None;
                }
                let mut lambda = Vec::new();
                let mut relaxed = false;
                for (b, g, kind) in cons {
                    let den = g.as_ref().map_or(w.iter().sum(), |g| mass(&w, g, k));
                    if den == 0 {
                        continue;
                    }
                    let num = mass(&w, &g.as_ref().map_or(b.clone(), |g| PropFormula::and(b.clone(), g.clone())), k);
                    let alpha = rat(num, den);
                    // At most one inequality per set, slack at the generating distribution.
                    let bound = match kind {
                        4 if !relaxed => {
                            relaxed = true;
                            Bound::AtMost(alpha + rat(1, 10))
                        }
                        5 if !relaxed => {
                            relaxed = true;
                            Bound::AtLeast(alpha - rat(1, 10))
                        }
                        _ => Bound::Eq(alpha),
                    };
                    lambda.push(PropConstraint { beta: b, given: g, bound });
                }
                Some(LinearCase { props: PROPS[..k].iter().map(|s| s.to_string()).collect(), lambda, beta, given })
            })
    })
}

fn to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap()
}

/// `a . p - b` for a constraint at the given bound value.
fn row_for(c: &PropConstraint, k: usize, v: &BigRational) -> Row {
    let n = 1 << k;
    let v = to_f64(v);
    let a: Vec<f64> = (0..n)
        .map(|j| {
            let b = truth(&c.beta, k, j) as u8 as f64;
            match &c.given {
                Some(g) => {
                    let g = truth(g, k, j) as u8 as f64;
                    b * g - v * g
                }
                None => b,
            }
        })
        .collect();
    let rhs = if c.given.is_some() { 0.0 } else { v };
    Row { a, b: rhs }
}

/// `Pr(beta | given)` under the maximum-entropy distribution satisfying the
/// constraints, computed directly over the `2^k` outcomes. An inequality is
/// dropped when the unconstrained optimum already satisfies it and made
/// tight otherwise, which is exact for a single inequality.
pub fn direct_answer(case: &LinearCase) -> Option<f64> {
    let k = case.props.len();
    let n = 1 << k;
    let mut eqs = Vec::new();
    let mut ineq = None;
    for c in &case.lambda {
        match &c.bound {
            Bound::Eq(v) => eqs.push(row_for(c, k, v)),
            Bound::AtMost(v) => ineq = Some((row_for(c, k, v), true)),
            Bound::AtLeast(v) => ineq = Some((row_for(c, k, v), false)),
            Bound::Between(..) => unreachable!("not generated"),
        }
    }
    let mut p = direct_maxent(n, &eqs)?;
    if let Some((row, upper)) = ineq {
        let lhs: f64 = (0..n).map(|j| row.a[j] * p[j]).sum::<f64>() - row.b;
        if (upper && lhs > 1e-12) || (!upper && lhs < -1e-12) {
            eqs.push(row);
            p = direct_maxent(n, &eqs)?;
        }
    }
    let num: f64 = (0..n).filter(|&j| truth(&case.beta, k, j) && truth(&case.given, k, j)).map(|j| p[j]).sum();
    let den: f64 = (0..n).filter(|&j| truth(&case.given, k, j)).map(|j| p[j]).sum();
    Some(num / den)
}
pub mod props;
