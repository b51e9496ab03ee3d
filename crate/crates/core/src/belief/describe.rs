use std::fmt;

use crate::constraints::{SizeDescription, ZERO_THRESHOLD};
use crate::error::{Error, Result};
use crate::model::{atom_indices, Formula, Vocabulary};
use crate::semantics::combin::set_partitions;
use crate::semantics::{Evaluator, World};

/// Largest number of candidate descriptions an enumeration may visit.
pub const MAX_DESCRIPTIONS: u64 = 1 << 20;

/// `F_xi(u)`: the mass `u` puts on the atoms of `xi`.
pub fn f_formula(xi: &Formula, vocab: &Vocabulary, u: &[f64]) -> Result<f64> {
    Ok(atom_indices(xi, vocab)?.into_iter().map(|j| u[j]).sum())
}

/// `F_(phi|psi)(u)`, or `None` when `F_psi(u)` vanishes.
pub fn f_cond(phi: &Formula, psi: &Formula, vocab: &Vocabulary, u: &[f64]) -> Result<Option<f64>> {
    let den = f_formula(psi, vocab, u)?;
    if den <= ZERO_THRESHOLD {
        return Ok(None);
    }
    let num = f_formula(&Formula::and(phi.clone(), psi.clone()), vocab, u)?;
    Ok(Some(num / den))
}

/// `F_D(u)`: constants in distinct blocks are independent draws from `u`.
pub fn f_description(d: &CompleteDescription, u: &[f64]) -> f64 {
    d.atoms.iter().map(|&j| u[j]).product()
}

/// A full quantifier-free account of a set of constants: which are equal,
/// the atom of each, and every relation tuple among them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompleteDescription {
    pub constants: Vec<String>,
    /// Equality block of each constant, numbered in order of first use.
    pub blocks: Vec<usize>,
    /// Atom of each block.
    pub atoms: Vec<usize>,
    /// Relation name, arity and table over blocks, first argument most
    /// significant.
    pub relations: Vec<(String, usize, Vec<bool>)>,
}

impl CompleteDescription {
    pub fn num_blocks(&self) -> usize {
        self.atoms.len()
    }

    /// The model whose elements are the blocks. Vocabulary constants outside
    /// the description denote the first block.
    pub fn world(&self, vocab: &Vocabulary) -> Result<World> {
        self.world_with(vocab, Vec::new())
    }

    fn world_with(&self, vocab: &Vocabulary, extra: Vec<usize>) -> Result<World> {
        let mut atoms = self.atoms.clone();
        atoms.extend(extra);
        let n = atoms.len();
        if n == 0 {
            return Err(Error::Invalid("a world needs at least one element".into()));
        }
        let constants = vocab
            .constants()
            .iter()
            .map(|c| self.constants.iter().position(|z| z == c).map_or(0, |i| self.blocks[i]))
            .collect();
        let mut w = World::new(vocab, n, atoms, constants)?;
        if !self.relations.is_empty() {
            let nb = self.num_blocks();
            for (name, arity, table) in &self.relations {
                let r = vocab
                    .relations()
                    .iter()
                    .position(|(x, _)| x == name)
                    .ok_or_else(|| Error::Invalid(format!("unknown relation `{name}`")))?;
                if n == nb {
                    w.set_relation(vocab, r, table.clone())?;
                } else {
                    // Only reached for quantified queries, which never read relations.
                    w.set_relation(vocab, r, vec![false; n.pow(*arity as u32)])?;
                }
            }
        }
        Ok(w)
    }

    /// The saturated model for size description `sigma`: the blocks of the
    /// description plus `per_atom` fresh elements in every populated atom.
    pub fn saturated_world(&self, vocab: &Vocabulary, sigma: &SizeDescription, per_atom: usize) -> Result<World> {
        let extra = sigma.populated().into_iter().flat_map(|j| std::iter::repeat_n(j, per_atom)).collect();
        self.world_with(vocab, extra)
    }

    fn representative(&self, block: usize) -> &str {
        let i = self.blocks.iter().position(|&b| b == block).unwrap_or(0);
        &self.constants[i]
    }
}

impl fmt::Display for CompleteDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, c) in self.constants.iter().enumerate() {
            parts.push(format!("A{}({c})", self.atoms[self.blocks[i]] + 1));
        }
        for i in 0..self.constants.len() {
            for j in i + 1..self.constants.len() {
                let op = if self.blocks[i] == self.blocks[j] { "=" } else { "!=" };
                parts.push(format!("{} {op} {}", self.constants[i], self.constants[j]));
            }
        }
        let nb = self.num_blocks();
        for (name, arity, table) in &self.relations {
            for (idx, &holds) in table.iter().enumerate() {
                let mut args = vec![0; *arity];
                let mut rest = idx;
                for a in args.iter_mut().rev() {
                    *a = rest % nb;
                    rest /= nb;
                }
                let names: Vec<&str> = args.iter().map(|&b| self.representative(b)).collect();
                parts.push(format!("{}{name}({})", if holds { "" } else { "!" }, names.join(", ")));
            }
        }
        if parts.is_empty() {
            return write!(f, "true");
        }
        write!(f, "{}", parts.join(" & "))
    }
}

/// All complete descriptions of `z` over the unary predicates and every
/// relation of `vocab` that satisfy `constraint`.
pub fn enumerate_descriptions(z: &[String], vocab: &Vocabulary, constraint: &Formula) -> Result<Vec<CompleteDescription>> {
    let relations: Vec<String> = vocab.relations().iter().map(|(n, _)| n.clone()).collect();
    descriptions(z, vocab, constraint, &relations, false)
}

/// Descriptions of `z` over the unary predicates and the named relations.
/// With `distinct`, only the partition into singletons is used.
pub(crate) fn descriptions(
    z: &[String],
    vocab: &Vocabulary,
    constraint: &Formula,
    relations: &[String],
    distinct: bool,
) -> Result<Vec<CompleteDescription>> {
    if let Some(c) = constraint.constants().into_iter().find(|c| !z.contains(c)) {
        return Err(Error::Invalid(format!("constraint mentions `{c}`, which is not described")));
    }
    if let Some(c) = z.iter().find(|c| !vocab.is_constant(c)) {
        return Err(Error::Invalid(format!("`{c}` is not a declared constant")));
    }
    let arities: Vec<(String, usize)> = relations
        .iter()
        .map(|r| vocab.relation_arity(r).map(|a| (r.clone(), a)).ok_or_else(|| Error::Invalid(format!("unknown relation `{r}`"))))
        .collect::<Result<_>>()?;
    let partitions = if distinct { vec![(0..z.len()).collect()] } else { set_partitions(z.len()) };
    let k = vocab.num_atoms() as u64;
    let mut budget = 0u64;
    for p in &partitions {
        let nb = p.iter().max().map_or(0, |m| m + 1);
        let bits: u32 = arities.iter().map(|(_, a)| (nb as u32).pow(*a as u32)).sum();
        let count = k.checked_pow(nb as u32).and_then(|x| x.checked_mul(1u64.checked_shl(bits)?));
        budget = count.and_then(|c| budget.checked_add(c)).unwrap_or(u64::MAX);
    }
    if budget > MAX_DESCRIPTIONS {
        return Err(Error::Capacity(format!("{budget} complete descriptions exceed the limit of {MAX_DESCRIPTIONS}")));
    }
    let check = Evaluator::exact(vocab, constraint)?;
    let mut out = Vec::new();
    for p in partitions {
        let nb = p.iter().max().map_or(0, |m| m + 1);
        let sizes: Vec<usize> = arities.iter().map(|(_, a)| nb.pow(*a as u32)).collect();
        let bits: usize = sizes.iter().sum();
        for a in 0..(k as usize).pow(nb as u32) {
            let mut atoms = vec![0; nb];
            let mut rest = a;
            for slot in atoms.iter_mut().rev() {
                *slot = rest % k as usize;
                rest /= k as usize;
            }
            for mask in 0..1u64 << bits {
                let mut shift = 0;
                let relations = arities
                    .iter()
                    .zip(&sizes)
                    .map(|((name, arity), &size)| {
                        let table = (0..size).map(|i| mask >> (shift + i) & 1 == 1).collect();
                        shift += size;
                        (name.clone(), *arity, table)
                    })
                    .collect();
                let d = CompleteDescription { constants: z.to_vec(), blocks: p.clone(), atoms: atoms.clone(), relations };
                if nb == 0 || check.holds(&d.world(vocab)?) {
                    out.push(d);
                }
            }
        }
    }
    Ok(out)
}

/// The limiting probability, 0 or 1, of `phi` given the size description
/// `sigma` and the description `d` of its constants.
///
/// A quantifier-free `phi` is decided by `d` alone. A quantified unary `phi`
/// is evaluated in a model where every populated atom has more elements than
/// the quantifier rank and the named constants together can tell apart.
pub fn zero_one_limit(phi: &Formula, sigma: &SizeDescription, d: &CompleteDescription, vocab: &Vocabulary) -> Result<bool> {
    if phi.has_proportions() {
        return Err(Error::Unsupported("proportion expressions in the query".into()));
    }
    let eval = Evaluator::exact(vocab, phi)?;
    if !phi.has_quantifiers() {
        if d.num_blocks() == 0 {
            // Only constants outside the description could be mentioned; there are none.
            let empty = CompleteDescription { atoms: vec![0], ..d.clone() };
            return Ok(eval.holds(&empty.world(vocab)?));
        }
        return Ok(eval.holds(&d.world(vocab)?));
    }
    if !phi.relation_symbols().is_empty() {
        return Err(Error::Unsupported("quantified queries over relations".into()));
    }
    let per_atom = phi.quantifier_rank() + d.constants.len() + 1;
    Ok(eval.holds(&d.saturated_world(vocab, sigma, per_atom)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_formula, Side};

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn one_constant_one_predicate() {
        let v = Vocabulary::unary(["P"]).unwrap().with_constants(["c"]).unwrap();
        let ds = enumerate_descriptions(&names(&["c"]), &v, &Formula::True).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds[0].to_string(), "A1(c)");
    }

    #[test]
    fn two_constants_with_equality() {
        let v = Vocabulary::unary(["P"]).unwrap().with_constants(["c1", "c2"]).unwrap();
        let ds = enumerate_descriptions(&names(&["c1", "c2"]), &v, &Formula::True).unwrap();
        assert_eq!(ds.len(), 6);
        assert_eq!(ds.iter().filter(|d| d.num_blocks() == 1).count(), 2);
        let distinct = parse_formula("!(c1 = c2)", &v, Side::Query).unwrap();
        assert_eq!(enumerate_descriptions(&names(&["c1", "c2"]), &v, &distinct).unwrap().len(), 4);
    }

    #[test]
    fn binary_relation_splits_each_atom() {
        let v = Vocabulary::new(names(&["P"]), names(&["c"]), vec![("R".into(), 2)]).unwrap();
        let ds = enumerate_descriptions(&names(&["c"]), &v, &Formula::True).unwrap();
        assert_eq!(ds.len(), 4);
        assert!(ds.iter().any(|d| d.to_string() == "A2(c) & !R(c, c)"));
    }

    #[test]
    fn product_rule() {
        let d = CompleteDescription { constants: names(&["c1", "c2"]), blocks: vec![0, 1], atoms: vec![0, 1], relations: vec![] };
        assert!((f_description(&d, &[0.2, 0.3, 0.5]) - 0.06).abs() < 1e-15);
    }

    #[test]
    fn conditional_of_itself_is_one() {
        let v = Vocabulary::unary(["P", "Q"]).unwrap();
        let lit = |p: &str| Formula::unary(p, crate::model::Term::var("x"));
        let xi = Formula::or(lit("P"), lit("Q"));
        let u = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(f_cond(&xi, &xi, &v, &u).unwrap(), Some(1.0));
        let never = Formula::and(Formula::not(lit("P")), Formula::not(lit("Q")));
        assert_eq!(f_cond(&xi, &never, &v, &[0.5, 0.5, 0.0, 0.0]).unwrap(), None);
    }

    #[test]
    fn zero_one_cases() {
        let v = Vocabulary::unary(["P"]).unwrap().with_constants(["c"]).unwrap();
        let d = CompleteDescription { constants: vec![], blocks: vec![], atoms: vec![], relations: vec![] };
        let some = parse_formula("exists x P(x)", &v, Side::Query).unwrap();
        let all = parse_formula("forall x P(x)", &v, Side::Query).unwrap();
        let both = SizeDescription(vec![true, true]);
        assert!(zero_one_limit(&some, &both, &d, &v).unwrap());
        assert!(!zero_one_limit(&all, &both, &d, &v).unwrap());
        assert!(!zero_one_limit(&some, &SizeDescription(vec![false, true]), &d, &v).unwrap());
        let pc = CompleteDescription { constants: names(&["c"]), blocks: vec![0], atoms: vec![0], relations: vec![] };
        let q = parse_formula("P(c) | !P(c) & P(c)", &v, Side::Query).unwrap();
        assert!(zero_one_limit(&q, &both, &pc, &v).unwrap());
    }

    #[test]
    fn counting_with_many_elements_per_atom() {
        // Two distinct P-elements besides c need at least three populated slots.
        let v = Vocabulary::unary(["P"]).unwrap().with_constants(["c"]).unwrap();
        let phi = parse_formula("exists x exists y (P(x) & P(y) & !(x = y) & !(x = c) & !(y = c))", &v, Side::Query).unwrap();
        let pc = CompleteDescription { constants: names(&["c"]), blocks: vec![0], atoms: vec![0], relations: vec![] };
        assert!(zero_one_limit(&phi, &SizeDescription(vec![true, false]), &pc, &v).unwrap());
    }
}
