//! Finite worlds, exact evaluation and world counting.
//!
//! Counting is the ground truth everything else is checked against, so it
//! uses exact integer and rational arithmetic only.

pub mod combin;
pub mod count;
pub mod eval;
pub mod prob;
pub mod world;

pub use count::{closed_form_count, count_pair, count_worlds, count_worlds_with, Backend, CountConfig, CountReport};
pub use eval::{eval, eval_expr, Evaluator};
pub use prob::{pr_n, pr_n_with, pr_sequence, SequencePoint};
pub use world::{Valuation, World};
