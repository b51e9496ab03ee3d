//! Degrees of belief for a query given a knowledge base.
//!
//! Queries are first classified. Simple and separable queries go through the
//! maximum-entropy point of the zero-tolerance space; everything that might
//! depend on how the tolerances shrink is probed at small positive
//! tolerances instead, and reported as such.

mod classify;
mod describe;
mod engine;
mod probe;

pub use classify::{classify, QueryClass, Split};
pub use describe::{
    enumerate_descriptions, f_cond, f_description, f_formula, zero_one_limit, CompleteDescription, MAX_DESCRIPTIONS,
};
pub use engine::{believe, believe_at, believe_general, believe_simple, oracle_rows};
pub use probe::{pr_tau, probe_grid, probe_tau, ProbeRow, ProbeTable};

use serde::Serialize;

use crate::maxent::{MaxEntConfig, MaxEntResult};
use crate::model::Formula;
use crate::parser::print_formula;

/// Settings shared by every route.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BeliefConfig {
    pub maxent: MaxEntConfig,
    /// Probe scales are `10^-e` for each `e`.
    pub probe_exponents: Vec<u32>,
    /// Probe values further apart than this at the finest scale mark the
    /// answer as nonrobust.
    pub probe_tolerance: f64,
    /// Values at several maxima closer than this count as one value.
    pub tie_tolerance: f64,
    /// Try ratio bounds when the maximum puts no mass on the evidence.
    pub direct_inference: bool,
}

impl Default for BeliefConfig {
    fn default() -> Self {
        BeliefConfig {
            maxent: MaxEntConfig::default(),
            probe_exponents: vec![2, 3, 4],
            probe_tolerance: 1e-2,
            tie_tolerance: 1e-9,
            direct_inference: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Defined,
    Interval,
    Nonrobust,
    MaxentInapplicable,
    Unsupported,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Flags {
    pub essentially_positive: Option<bool>,
    pub unique: Option<bool>,
    pub stable: Option<bool>,
    /// Size description shared by the maxima at the probed tolerances.
    pub size_description: Option<String>,
}

/// Bounds on the conditional proportion implied by the knowledge base.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectInference {
    /// `(tolerance, lower, upper)` per probed scale.
    pub rows: Vec<(f64, f64, f64)>,
    /// Linear extrapolation of the bounds to zero tolerance.
    pub limit: [f64; 2],
}

/// Exact finite-size value for comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleRow {
    pub n: usize,
    pub tau: String,
    pub value: Option<f64>,
    pub exact: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BeliefResult {
    pub query: String,
    pub class: String,
    pub status: Status,
    pub value: Option<f64>,
    pub interval: Option<[f64; 2]>,
    pub maxent_point: Vec<Vec<f64>>,
    pub entropy: Option<f64>,
    pub flags: Flags,
    pub probes: Vec<ProbeRow>,
    pub probe_spread: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct_inference: Option<DirectInference>,
    pub oracle: Vec<OracleRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub config: BeliefConfig,
}

impl BeliefResult {
    /// An unanswered result for `phi`, marked unsupported until a route fills it.
    pub fn new(phi: &Formula, class: &str, config: &BeliefConfig) -> BeliefResult {
        BeliefResult {
            query: print_formula(phi),
            class: class.into(),
            status: Status::Unsupported,
            value: None,
            interval: None,
            maxent_point: Vec::new(),
            entropy: None,
            flags: Flags::default(),
            probes: Vec::new(),
            probe_spread: None,
            direct_inference: None,
            oracle: Vec::new(),
            note: None,
            config: config.clone(),
        }
    }

    fn record(&mut self, m: &MaxEntResult) {
        self.maxent_point = m.points().map(<[f64]>::to_vec).collect();
        self.entropy = Some(m.entropy);
        self.flags.unique = Some(m.maxima.len() == 1);
    }

    fn attach(&mut self, t: ProbeTable) {
        self.probe_spread = t.spread;
        self.probes = t.rows;
    }
}
