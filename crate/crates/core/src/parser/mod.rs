//! Concrete syntax for vocabularies, knowledge bases and queries.
//!
//! ```text
//! vocab {
//!   predicates Hepatitis, Jaundice, BlueEyed;
//!   constants Eric;
//! }
//! kb {
//!   forall x (Hepatitis(x) -> Jaundice(x));
//!   ||Hepatitis(x) | Jaundice(x)||_{x} ~=[1] 0.8;
//!   Jaundice(Eric);
//! }
//! query { Hepatitis(Eric); }
//! ```
//!
//! Precedence from tightest: `!` and the quantifiers, `&`, `|`, `->`. Inside a
//! proportion term a top-level `|` separates the conditioning formula, so
//! disjunctions there need parentheses. Exact comparisons `=`, `<=`, `>=`,
//! `<`, `>` and tolerance variables `eps[i]` are accepted so canonical forms
//! can be read back.

mod lexer;
mod parse;
mod print;
pub mod rules;

pub use parse::{duplicate_tolerance_warnings, parse, parse_formula, Side, SourceFile, Statement};
pub use print::{print_expr, print_file, print_formula};
