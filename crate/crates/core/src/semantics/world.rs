use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::model::Vocabulary;

/// Assignment of domain elements to free variables.
pub type Valuation = BTreeMap<String, usize>;

/// A finite model. Elements are `0..n` internally and shown as `1..=n`.
///
/// Unary predicates are stored through the atom of each element. Relation
/// tables are dense over `n^arity` tuples and may be left empty when no formula
/// evaluated in the world mentions them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct World {
    pub n: usize,
    /// Atom index of each element.
    pub atoms: Vec<usize>,
    /// Denotation of each constant, in vocabulary order.
    pub constants: Vec<usize>,
    /// Per relation in vocabulary order: membership of each tuple, indexed
    /// with the first argument most significant.
    pub relations: Vec<Vec<bool>>,
}

impl World {
    pub fn new(vocab: &Vocabulary, n: usize, atoms: Vec<usize>, constants: Vec<usize>) -> Result<World> {
        if n == 0 {
            return Err(Error::Invalid("domain size must be at least 1".into()));
        }
        if atoms.len() != n || atoms.iter().any(|&a| a >= vocab.num_atoms()) {
            return Err(Error::Invalid("atom assignment must cover every element with a valid atom".into()));
        }
        if constants.len() != vocab.constants().len() || constants.iter().any(|&e| e >= n) {
            return Err(Error::Invalid("every constant must denote an element".into()));
        }
        let relations = vec![Vec::new(); vocab.relations().len()];
        Ok(World { n, atoms, constants, relations })
    }

    /// Sets the full table of relation `r`.
    pub fn set_relation(&mut self, vocab: &Vocabulary, r: usize, tuples: Vec<bool>) -> Result<()> {
        let arity = vocab.relations()[r].1;
        if tuples.len() != self.n.pow(arity as u32) {
            return Err(Error::Invalid("relation table has the wrong size".into()));
        }
        self.relations[r] = tuples;
        Ok(())
    }

    pub fn relation_holds(&self, r: usize, args: &[usize]) -> bool {
        let table = &self.relations[r];
        if table.is_empty() {
            return false;
        }
        let idx = args.iter().fold(0usize, |acc, &e| acc * self.n + e);
        table[idx]
    }

    /// Number of elements in each atom.
    pub fn atom_counts(&self, num_atoms: usize) -> Vec<usize> {
        let mut out = vec![0; num_atoms];
        for &a in &self.atoms {
            out[a] += 1;
        }
        out
    }

    /// The point of the simplex recording the fraction of elements in each atom.
    pub fn point(&self, num_atoms: usize) -> Vec<BigRational> {
        let n = BigInt::from(self.n);
        self.atom_counts(num_atoms)
            .into_iter()
            .map(|c| BigRational::new(BigInt::from(c), n.clone()))
            .collect()
    }
}
