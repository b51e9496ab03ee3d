use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};

use crate::canon::instantiate;
use crate::error::{Error, Result};
use crate::model::{CmpOp, Expr, Formula, Term, ToleranceVector, Vocabulary};
use crate::semantics::world::{Valuation, World};

/// A formula compiled against a vocabulary for repeated evaluation.
///
/// Approximate comparisons are translated to exact ones and tolerance
/// variables replaced by their values at construction time, so evaluation
/// itself never fails.
#[derive(Clone, Debug)]
pub struct Evaluator {
    root: Node,
    num_slots: usize,
    free: Vec<(String, usize)>,
    relations: BTreeSet<usize>,
}

#[derive(Clone, Copy, Debug)]
enum Arg {
    Slot(usize),
    Const(usize),
}

#[derive(Clone, Debug)]
enum Node {
    True,
    False,
    /// Unary predicate: holds when bit `shift` of the element's atom is clear.
    Pred { shift: u32, arg: Arg },
    Rel { r: usize, args: Vec<Arg> },
    Eq(Arg, Arg),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Exists(usize, Box<Node>),
    Forall(usize, Box<Node>),
    Cmp { lhs: Val, rhs: Val, eq: bool },
}

#[derive(Clone, Debug)]
enum Val {
    Num(BigRational, Option<Ratio<i128>>),
    Prop { body: Box<Node>, slots: Vec<usize> },
    Add(Box<Val>, Box<Val>),
    Sub(Box<Val>, Box<Val>),
    Mul(Box<Val>, Box<Val>),
}

impl Evaluator {
    /// Compiles `f` after translating it to exact form under `tau`.
    pub fn new(vocab: &Vocabulary, f: &Formula, tau: &ToleranceVector) -> Result<Evaluator> {
        Evaluator::exact(vocab, &instantiate(f, tau)?)
    }

    /// Compiles a formula that is already exact and free of tolerance variables.
    pub fn exact(vocab: &Vocabulary, f: &Formula) -> Result<Evaluator> {
        let mut c = Compiler { vocab, scope: Vec::new(), num_slots: 0, free: Vec::new(), relations: BTreeSet::new() };
        for v in f.free_vars() {
            let slot = c.fresh();
            c.scope.push((v.clone(), slot));
            c.free.push((v, slot));
        }
        let root = c.formula(f)?;
        Ok(Evaluator { root, num_slots: c.num_slots, free: c.free, relations: c.relations })
    }

    pub fn is_closed(&self) -> bool {
        self.free.is_empty()
    }

    /// Indices of the relations the formula mentions.
    pub fn relations(&self) -> &BTreeSet<usize> {
        &self.relations
    }

    /// Truth value in `w` under `valuation`, which must cover the free variables.
    pub fn eval(&self, w: &World, valuation: &Valuation) -> Result<bool> {
        let mut env = vec![0; self.num_slots];
        for (v, slot) in &self.free {
            let e = *valuation.get(v).ok_or_else(|| Error::Invalid(format!("variable `{v}` has no value")))?;
            if e >= w.n {
                return Err(Error::Invalid(format!("variable `{v}` is sent outside the domain")));
            }
            env[*slot] = e;
        }
        Ok(holds(&self.root, w, &mut env))
    }

    /// Truth value of a closed formula.
    pub fn holds(&self, w: &World) -> bool {
        debug_assert!(self.is_closed());
        let mut env = vec![0; self.num_slots];
        holds(&self.root, w, &mut env)
    }
}

/// Evaluates `f` in `w`: approximate comparisons are read through their exact
/// translation with tolerances taken from `tau`.
pub fn eval(vocab: &Vocabulary, w: &World, valuation: &Valuation, tau: &ToleranceVector, f: &Formula) -> Result<bool> {
    Evaluator::new(vocab, f, tau)?.eval(w, valuation)
}

/// The value of a proportion expression in `w`. Only exact expressions over
/// closed proportion terms are accepted.
pub fn eval_expr(vocab: &Vocabulary, w: &World, e: &Expr) -> Result<BigRational> {
    let mut c = Compiler { vocab, scope: Vec::new(), num_slots: 0, free: Vec::new(), relations: BTreeSet::new() };
    let v = c.expr(e)?;
    let mut env = vec![0; c.num_slots];
    Ok(value::<BigRational>(&v, w, &mut env).expect("big rationals do not overflow"))
}

struct Compiler<'a> {
    vocab: &'a Vocabulary,
    scope: Vec<(String, usize)>,
    num_slots: usize,
    free: Vec<(String, usize)>,
    relations: BTreeSet<usize>,
}

impl Compiler<'_> {
    fn fresh(&mut self) -> usize {
        self.num_slots += 1;
        self.num_slots - 1
    }

    fn arg(&self, t: &Term) -> Result<Arg> {
        match t {
            Term::Var(v) => self
                .scope
                .iter()
                .rev()
                .find(|(name, _)| name == v)
                .map(|(_, s)| Arg::Slot(*s))
                .ok_or_else(|| Error::Invalid(format!("unbound variable `{v}`"))),
            Term::Const(c) => self
                .vocab
                .constants()
                .iter()
                .position(|x| x == c)
                .map(Arg::Const)
                .ok_or_else(|| Error::Vocabulary(format!("undeclared constant `{c}`"))),
        }
    }

    fn bind<T>(&mut self, vars: &[String], f: impl FnOnce(&mut Self) -> Result<T>) -> Result<(Vec<usize>, T)> {
        let mark = self.scope.len();
        let mut slots = Vec::new();
        for v in vars {
            if self.scope[mark..].iter().any(|(name, _)| name == v) {
                continue;
            }
            let s = self.fresh();
            self.scope.push((v.clone(), s));
            slots.push(s);
        }
        let out = f(self);
        self.scope.truncate(mark);
        Ok((slots, out?))
    }

    fn formula(&mut self, f: &Formula) -> Result<Node> {
        Ok(match f {
            Formula::True => Node::True,
            Formula::False => Node::False,
            Formula::Atom { pred, args } => {
                if let (Some(i), 1) = (self.vocab.predicate_index(pred), args.len()) {
                    let shift = (self.vocab.k() - 1 - i) as u32;
                    Node::Pred { shift, arg: self.arg(&args[0])? }
                } else if let Some(r) = self.vocab.relations().iter().position(|(n, _)| n == pred) {
                    if self.vocab.relations()[r].1 != args.len() {
                        return Err(Error::Vocabulary(format!("`{pred}` applied to {} arguments", args.len())));
                    }
                    self.relations.insert(r);
                    Node::Rel { r, args: args.iter().map(|t| self.arg(t)).collect::<Result<_>>()? }
                } else {
                    return Err(Error::Vocabulary(format!("undeclared predicate `{pred}`")));
                }
            }
            Formula::Eq(a, b) => Node::Eq(self.arg(a)?, self.arg(b)?),
            Formula::Not(a) => Node::Not(Box::new(self.formula(a)?)),
            Formula::And(a, b) => Node::And(vec![self.formula(a)?, self.formula(b)?]),
            Formula::Or(a, b) => Node::Or(vec![self.formula(a)?, self.formula(b)?]),
            Formula::Implies(a, b) => Node::Or(vec![Node::Not(Box::new(self.formula(a)?)), self.formula(b)?]),
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                let (slots, inner) = self.bind(std::slice::from_ref(v), |c| c.formula(body))?;
                if matches!(f, Formula::Exists(..)) {
                    Node::Exists(slots[0], Box::new(inner))
                } else {
                    Node::Forall(slots[0], Box::new(inner))
                }
            }
            Formula::Compare { lhs, op, rhs } => {
                let eq = match op {
                    CmpOp::Eq => true,
                    CmpOp::Leq => false,
                    _ => return Err(Error::Invalid("approximate comparison in an exact formula".into())),
                };
                Node::Cmp { lhs: self.expr(lhs)?, rhs: self.expr(rhs)?, eq }
            }
        })
    }

    fn expr(&mut self, e: &Expr) -> Result<Val> {
        Ok(match e {
            Expr::Num(r) => Val::Num(r.clone(), small(r)),
            Expr::Tol(i) => return Err(Error::MissingTolerance(*i)),
            Expr::Prop { body, vars } => {
                let (slots, body) = self.bind(vars, |c| c.formula(body))?;
                Val::Prop { body: Box::new(body), slots }
            }
            Expr::Cond { .. } => {
                return Err(Error::Invalid("conditional proportion in an exact formula".into()));
            }
            Expr::Add(a, b) => Val::Add(Box::new(self.expr(a)?), Box::new(self.expr(b)?)),
            Expr::Sub(a, b) => Val::Sub(Box::new(self.expr(a)?), Box::new(self.expr(b)?)),
            Expr::Mul(a, b) => Val::Mul(Box::new(self.expr(a)?), Box::new(self.expr(b)?)),
        })
    }
}

fn small(r: &BigRational) -> Option<Ratio<i128>> {
    Some(Ratio::new(r.numer().to_i128()?, r.denom().to_i128()?))
}

fn element(a: Arg, w: &World, env: &[usize]) -> usize {
    match a {
        Arg::Slot(s) => env[s],
        Arg::Const(c) => w.constants[c],
    }
}

fn holds(node: &Node, w: &World, env: &mut Vec<usize>) -> bool {
    match node {
        Node::True => true,
        Node::False => false,
        Node::Pred { shift, arg } => (w.atoms[element(*arg, w, env)] >> shift) & 1 == 0,
        Node::Rel { r, args } => {
            let elems: Vec<usize> = args.iter().map(|a| element(*a, w, env)).collect();
            w.relation_holds(*r, &elems)
        }
        Node::Eq(a, b) => element(*a, w, env) == element(*b, w, env),
        Node::Not(a) => !holds(a, w, env),
        Node::And(items) => items.iter().all(|n| holds(n, w, env)),
        Node::Or(items) => items.iter().any(|n| holds(n, w, env)),
        Node::Exists(s, body) => (0..w.n).any(|e| {
            env[*s] = e;
            holds(body, w, env)
        }),
        Node::Forall(s, body) => (0..w.n).all(|e| {
            env[*s] = e;
            holds(body, w, env)
        }),
        Node::Cmp { lhs, rhs, eq } => {
            let sign = compare::<Ratio<i128>>(lhs, rhs, w, env)
                .unwrap_or_else(|| compare::<BigRational>(lhs, rhs, w, env).expect("big rationals do not overflow"));
            if *eq {
                sign == Ordering::Equal
            } else {
                sign != Ordering::Greater
            }
        }
    }
}

fn compare<Q: Exact>(lhs: &Val, rhs: &Val, w: &World, env: &mut Vec<usize>) -> Option<Ordering> {
    let l = value::<Q>(lhs, w, env)?;
    let r = value::<Q>(rhs, w, env)?;
    Some(l.sub(&r)?.sign())
}

/// Number of assignments to `slots` under which `body` holds.
fn count(body: &Node, slots: &[usize], w: &World, env: &mut Vec<usize>) -> u64 {
    match slots.split_first() {
        None => holds(body, w, env) as u64,
        Some((&s, rest)) => {
            let mut total = 0;
            for e in 0..w.n {
                env[s] = e;
                total += count(body, rest, w, env);
            }
            total
        }
    }
}

fn value<Q: Exact>(v: &Val, w: &World, env: &mut Vec<usize>) -> Option<Q> {
    match v {
        Val::Num(big, small) => Q::from_num(big, small),
        Val::Prop { body, slots } => {
            let hits = count(body, slots, w, env);
            let total = (w.n as u128).checked_pow(slots.len() as u32)?;
            Q::fraction(hits as u128, total)
        }
        Val::Add(a, b) => value::<Q>(a, w, env)?.add(&value::<Q>(b, w, env)?),
        Val::Sub(a, b) => value::<Q>(a, w, env)?.sub(&value::<Q>(b, w, env)?),
        Val::Mul(a, b) => value::<Q>(a, w, env)?.mul(&value::<Q>(b, w, env)?),
    }
}

/// Exact arithmetic that may report overflow.
trait Exact: Sized {
    fn from_num(big: &BigRational, small: &Option<Ratio<i128>>) -> Option<Self>;
    fn fraction(num: u128, den: u128) -> Option<Self>;
    fn add(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn sign(&self) -> Ordering;
}

impl Exact for Ratio<i128> {
    fn from_num(_: &BigRational, small: &Option<Ratio<i128>>) -> Option<Self> {
        *small
    }
    fn fraction(num: u128, den: u128) -> Option<Self> {
        Some(Ratio::new(i128::try_from(num).ok()?, i128::try_from(den).ok()?))
    }
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(o)
    }
    fn sign(&self) -> Ordering {
        self.numer().cmp(&0)
    }
}

impl Exact for BigRational {
    fn from_num(big: &BigRational, _: &Option<Ratio<i128>>) -> Option<Self> {
        Some(big.clone())
    }
    fn fraction(num: u128, den: u128) -> Option<Self> {
        Some(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn sign(&self) -> Ordering {
        if self.is_zero() {
            Ordering::Equal
        } else if self.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
}

/// Convenience for tests and tools: a valuation from name/element pairs.
pub fn valuation<'a>(pairs: impl IntoIterator<Item = (&'a str, usize)>) -> Valuation {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<BTreeMap<_, _>>()
}
