//! Translation to exact comparisons, flattening and canonical form.

pub mod canonical;
pub mod flatten;
pub mod poly;
pub mod translate;

pub use canonical::{to_canonical, CanonicalForm, Conj, Lit};
pub use flatten::{flatten, is_flat};
pub use poly::{Monomial, Poly, Var};
pub use translate::{instantiate, substitute_tau, to_exact};
