//! Thin wrapper over the `microlp` simplex solver.

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Cmp {
    Eq,
    Le,
}

/// A linear program over `bounds.len()` variables.
/// Sparse coefficients, comparison, right-hand side.
pub(crate) type Row = (Vec<(usize, f64)>, Cmp, f64);

#[derive(Clone, Debug, Default)]
pub(crate) struct Lp {
    pub bounds: Vec<(f64, f64)>,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
}

pub(crate) enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

impl Lp {
    pub fn new(bounds: Vec<(f64, f64)>) -> Lp {
        let n = bounds.len();
        Lp { bounds, objective: vec![0.0; n], rows: Vec::new() }
    }

    pub fn add_var(&mut self, bound: (f64, f64), obj: f64) -> usize {
        self.bounds.push(bound);
        self.objective.push(obj);
        self.bounds.len() - 1
    }

    /// Adds `sum coef * x rel rhs`, dropping zero coefficients.
    pub fn row(&mut self, coefs: impl IntoIterator<Item = (usize, f64)>, cmp: Cmp, rhs: f64) {
        let coefs: Vec<(usize, f64)> = coefs.into_iter().filter(|(_, c)| *c != 0.0).collect();
        self.rows.push((coefs, cmp, rhs));
    }

    pub fn dense_row(&mut self, a: &[f64], cmp: Cmp, rhs: f64) {
        self.row(a.iter().copied().enumerate(), cmp, rhs);
    }

    pub fn solve(&self, maximize: bool) -> Result<LpOutcome> {
        let dir = if maximize { OptimizationDirection::Maximize } else { OptimizationDirection::Minimize };
        let mut p = Problem::new(dir);
        let vars: Vec<_> = self.bounds.iter().zip(&self.objective).map(|(&b, &c)| p.add_var(c, b)).collect();
        for (coefs, cmp, rhs) in &self.rows {
            if coefs.is_empty() {
                let ok = match cmp {
                    Cmp::Eq => rhs.abs() <= 1e-12,
                    Cmp::Le => *rhs >= -1e-12,
                };
                if !ok {
                    return Ok(LpOutcome::Infeasible);
                }
                continue;
            }
            let expr: Vec<_> = coefs.iter().map(|&(i, c)| (vars[i], c)).collect();
            let op = match cmp {
                Cmp::Eq => ComparisonOp::Eq,
                Cmp::Le => ComparisonOp::Le,
            };
            p.add_constraint(expr.as_slice(), op, *rhs);
        }
        match p.solve() {
            Ok(outcome) => {
                let sol = outcome.into_solution().map_err(|_| Error::Solver("linear program interrupted".into()))?;
                let x = vars.iter().map(|&v| sol.var_value(v)).collect();
                Ok(LpOutcome::Optimal { value: sol.objective(), x })
            }
            Err(microlp::Error::Infeasible) => Ok(LpOutcome::Infeasible),
            Err(microlp::Error::Unbounded) => Ok(LpOutcome::Unbounded),
            Err(e) => Err(Error::Solver(format!("linear program: {e}"))),
        }
    }
}
