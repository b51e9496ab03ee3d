//! Vocabularies, atoms, formulas and tolerance vectors.

pub mod atoms;
pub mod formula;
pub mod prop;
pub mod rational;
pub mod rename;
pub mod tolerance;
pub mod vocab;

pub use atoms::{atom_formula, atom_indices, atom_set, atoms_of};
pub use formula::{CmpOp, Expr, Formula, Term};
pub use prop::PropFormula;
pub use rename::rename_apart;
pub use tolerance::ToleranceVector;
pub use vocab::{Atom, Vocabulary};
