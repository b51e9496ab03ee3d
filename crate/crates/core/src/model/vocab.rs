use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest number of unary predicates accepted; `2^k` atoms must stay enumerable.
pub const MAX_PREDICATES: usize = 12;

/// A finite vocabulary: unary predicates (in declaration order), constants and
/// relations of arity two or more.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Vocabulary {
    predicates: Vec<String>,
    constants: Vec<String>,
    relations: Vec<(String, usize)>,
}

impl Vocabulary {
    pub fn new(
        predicates: Vec<String>,
        constants: Vec<String>,
        relations: Vec<(String, usize)>,
    ) -> Result<Self> {
        if predicates.len() > MAX_PREDICATES {
            return Err(Error::Vocabulary(format!(
                "{} unary predicates declared, at most {MAX_PREDICATES} are supported",
                predicates.len()
            )));
        }
        let mut seen = BTreeSet::new();
        let names = predicates
            .iter()
            .chain(constants.iter())
            .chain(relations.iter().map(|(n, _)| n));
        for name in names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Vocabulary(format!("symbol `{name}` declared twice")));
            }
        }
        if let Some((name, arity)) = relations.iter().find(|(_, a)| *a < 2) {
            return Err(Error::Vocabulary(format!(
                "relation `{name}` has arity {arity}; use a unary predicate instead"
            )));
        }
        Ok(Vocabulary { predicates, constants, relations })
    }

    /// Unary predicates only, no constants or relations.
    pub fn unary<S: Into<String>>(predicates: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::new(predicates.into_iter().map(Into::into).collect(), vec![], vec![])
    }

    pub fn with_constants<S: Into<String>>(mut self, constants: impl IntoIterator<Item = S>) -> Result<Self> {
        self.constants.extend(constants.into_iter().map(Into::into));
        Self::new(self.predicates, self.constants, self.relations)
    }

    pub fn predicates(&self) -> &[String] {
        &self.predicates
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn relations(&self) -> &[(String, usize)] {
        &self.relations
    }

    /// Number of unary predicates.
    pub fn k(&self) -> usize {
        self.predicates.len()
    }

    /// Number of atoms, `2^k`.
    pub fn num_atoms(&self) -> usize {
        1usize << self.k()
    }

    pub fn predicate_index(&self, name: &str) -> Option<usize> {
        self.predicates.iter().position(|p| p == name)
    }

    pub fn is_constant(&self, name: &str) -> bool {
        self.constants.iter().any(|c| c == name)
    }

    pub fn relation_arity(&self, name: &str) -> Option<usize> {
        self.relations.iter().find(|(n, _)| n == name).map(|(_, a)| *a)
    }

    /// Arity of any declared predicate symbol.
    pub fn arity(&self, name: &str) -> Option<usize> {
        if self.predicate_index(name).is_some() {
            Some(1)
        } else {
            self.relation_arity(name)
        }
    }

    pub fn is_unary(&self) -> bool {
        self.relations.is_empty()
    }

    /// Copy of this vocabulary with an extra unary predicate appended.
    pub fn extended_with_predicate(&self, name: &str) -> Result<Self> {
        let mut preds = self.predicates.clone();
        preds.push(name.to_string());
        Self::new(preds, self.constants.clone(), self.relations.clone())
    }

    pub fn atom(&self, index: usize) -> Atom {
        assert!(index < self.num_atoms(), "atom index out of range");
        Atom { index, k: self.k() }
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        (0..self.num_atoms()).map(|index| Atom { index, k: self.k() })
    }
}

/// An atom `A_j`: a complete conjunction of unary literals.
///
/// Stored as a 0-based index whose bit pattern lists the negated predicates,
/// with the first predicate in the most significant position. `A_1` is the
/// all-positive conjunction and `A_K` the all-negative one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Atom {
    pub index: usize,
    pub k: usize,
}

impl Atom {
    /// Whether predicate `i` (0-based declaration order) holds in this atom.
    pub fn holds(&self, i: usize) -> bool {
        debug_assert!(i < self.k);
        (self.index >> (self.k - 1 - i)) & 1 == 0
    }

    /// 1-based label used in printed output.
    pub fn label(&self) -> usize {
        self.index + 1
    }
}

impl std::fmt::Display for Atom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "A{}", self.label())
    }
}
