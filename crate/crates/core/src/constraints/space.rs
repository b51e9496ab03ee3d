use std::fmt;

use serde::Serialize;

use super::{Constraint, ConstraintFormula};
use crate::error::{Error, Result};
use crate::model::ToleranceVector;

/// One conjunctive cell of a solution space, over `u` only.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionCell {
    pub constraints: Vec<Constraint>,
    /// Every constraint is linear.
    pub linear: bool,
    /// Known to be convex. Only linear cells are certified.
    pub convex: bool,
    /// Index of the cell in the constraint formula it came from.
    pub source: usize,
    pub members: Vec<(String, usize)>,
}

impl RegionCell {
    pub fn new(constraints: Vec<Constraint>, source: usize, members: Vec<(String, usize)>) -> RegionCell {
        let linear = constraints.iter().all(Constraint::is_linear);
        RegionCell { constraints, linear, convex: linear, source, members }
    }

    /// Strict constraints; the solver works over their closure and reports
    /// them separately.
    pub fn strict(&self) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter().filter(|c| c.is_strict())
    }

    /// Membership in the closed relaxation, up to `tol`.
    pub fn contains(&self, u: &[f64], tol: f64) -> bool {
        self.constraints.iter().all(|c| c.holds_at(u, tol))
    }

    pub fn violation(&self, u: &[f64]) -> f64 {
        self.constraints.iter().map(|c| c.violation(u)).fold(0.0, f64::max)
    }

    /// The same cell with one more constraint.
    pub fn with(&self, c: Constraint) -> RegionCell {
        let mut cs = self.constraints.clone();
        cs.push(c);
        RegionCell::new(cs, self.source, self.members.clone())
    }
}

/// A union of cells inside the simplex over `num_atoms` atoms. No cells
/// means the empty set.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionDescriptor {
    pub num_atoms: usize,
    pub cells: Vec<RegionCell>,
}

impl RegionDescriptor {
    /// The whole simplex.
    pub fn simplex(num_atoms: usize) -> RegionDescriptor {
        RegionDescriptor { num_atoms, cells: vec![RegionCell::new(vec![], 0, vec![])] }
    }

    /// Builds a region from plain cells of constraints.
    pub fn from_cells(num_atoms: usize, cells: Vec<Vec<Constraint>>) -> RegionDescriptor {
        let cells = cells.into_iter().enumerate().map(|(i, cs)| RegionCell::new(cs, i, vec![])).collect();
        RegionDescriptor { num_atoms, cells }
    }

    /// A tolerance-free constraint formula read as a region.
    pub fn from_formula(cf: &ConstraintFormula) -> Result<RegionDescriptor> {
        let mut cells = Vec::new();
        for (i, cell) in cf.cells().iter().enumerate() {
            if let Some(&eps) = cell.constraints.iter().flat_map(|c| c.poly.eps_indices()).collect::<Vec<_>>().first() {
                return Err(Error::MissingTolerance(eps));
            }
            cells.push(RegionCell::new(cell.constraints.clone(), i, cell.members.clone()));
        }
        Ok(RegionDescriptor { num_atoms: cf.num_atoms(), cells })
    }

    pub fn is_linear(&self) -> bool {
        self.cells.iter().all(|c| c.linear)
    }

    pub fn has_strict(&self) -> bool {
        self.cells.iter().any(|c| c.strict().next().is_some())
    }

    /// Membership of the closed relaxation of some cell, up to `tol`.
    pub fn contains(&self, u: &[f64], tol: f64) -> bool {
        self.cells.iter().any(|c| c.contains(u, tol))
    }

    /// Closed relaxation of every cell.
    pub fn relaxed(&self) -> RegionDescriptor {
        let cells = self
            .cells
            .iter()
            .map(|c| {
                let cs = c.constraints.iter().map(|k| Constraint::new(k.poly.clone(), k.rel.weakened())).collect();
                RegionCell::new(cs, c.source, c.members.clone())
            })
            .collect();
        RegionDescriptor { num_atoms: self.num_atoms, cells }
    }
}

impl fmt::Display for RegionDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells = self
            .cells
            .iter()
            .map(|c| super::Cell { constraints: c.constraints.clone(), members: c.members.clone() })
            .collect();
        write!(f, "{}", ConstraintFormula::new(self.num_atoms, cells))
    }
}

/// The solution space of `gamma` at `tau`, one cell per disjunct that does
/// not become trivially false. Every tolerance index must have a value.
pub fn solution_space(gamma: &ConstraintFormula, tau: &ToleranceVector) -> Result<RegionDescriptor> {
    RegionDescriptor::from_formula(&gamma.instantiate(tau))
}

#[derive(Serialize)]
struct CellSummary {
    constraints: Vec<String>,
    linear: bool,
    convex: bool,
    strict: usize,
}

impl Serialize for RegionDescriptor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let cells: Vec<CellSummary> = self
            .cells
            .iter()
            .map(|c| CellSummary {
                constraints: c.constraints.iter().map(ToString::to_string).collect(),
                linear: c.linear,
                convex: c.convex,
                strict: c.strict().count(),
            })
            .collect();
        cells.serialize(s)
    }
}
