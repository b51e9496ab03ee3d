//! Degrees of belief from statistical knowledge bases.
//!
//! A knowledge base mixes first-order facts with approximate statements about
//! proportions. The degree of belief in a query is the limiting fraction of
//! finite worlds satisfying the knowledge base that also satisfy the query.
//! This crate computes that quantity two ways: exactly for small domains by
//! counting worlds, and in the limit by maximizing entropy over the constraint
//! space the knowledge base induces on atom proportions.

pub mod error;
pub mod model;
pub mod canon;
pub mod constraints;
pub mod maxent;
pub mod belief;
pub mod embed;
pub mod parser;
pub mod semantics;
pub mod par;

pub use error::{Error, Result};
