use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Constraint, ConstraintFormula, Rel, TolShape};
use crate::canon::{Monomial, Poly};
use crate::model::rational::format_rational;

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(text) = self.shape.as_ref().and_then(|s| tolerance_text(s, self.rel)) {
            return write!(f, "{text}");
        }
        let (lhs, rhs) = sides(&self.poly);
        write!(f, "{lhs} {} {rhs}", self.rel.symbol())
    }
}

impl fmt::Display for ConstraintFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.cells.as_slice() {
            [] => write!(f, "false"),
            [cell] if cell.constraints.is_empty() => write!(f, "true"),
            [cell] => {
                let lines: Vec<String> = cell.constraints.iter().map(ToString::to_string).collect();
                write!(f, "{}", lines.join("\n"))
            }
            cells => {
                let mut lines = Vec::new();
                for (i, cell) in cells.iter().enumerate() {
                    lines.push(format!("cell {}:", i + 1));
                    if cell.constraints.is_empty() {
                        lines.push("  true".into());
                    }
                    lines.extend(cell.constraints.iter().map(|c| format!("  {c}")));
                }
                write!(f, "{}", lines.join("\n"))
            }
        }
    }
}

/// Positive terms on the left, negative terms and constants on the right.
fn sides(p: &Poly) -> (Poly, Poly) {
    let lhs = Poly::from_terms(p.terms().filter(|(m, c)| !m.is_constant() && c.is_positive()));
    (lhs.clone(), lhs.sub(p))
}

/// `L <= (c + e)*(tp)` (upper) or `L >= (c - e)*(tp)` (lower), with `L`
/// free of negative coefficients and constants.
pub(super) struct BoundForm {
    pub lower: bool,
    c: BigRational,
    l: Poly,
}

type Rank = (usize, Vec<Monomial>, bool);

/// Candidate offsets cancel one monomial of `tp` against `t`; the shortest
/// `L` wins, then the one over the lowest atoms, then the upper form.
pub(super) fn bound_form(s: &TolShape) -> Option<BoundForm> {
    // Ranked by (length of L, its monomials, upper form first).
    let mut best: Option<(Rank, BoundForm)> = None;
    for lower in [false, true] {
        let mut cands = vec![BigRational::zero()];
        for (m, b) in s.tp.terms() {
            let a = s.t.coefficient(m);
            cands.push(if lower { a / b } else { -(a / b) });
        }
        for c in cands {
            let scaled = s.tp.scale(&c);
            let l = if lower { scaled.sub(&s.t) } else { s.t.add(&scaled) };
            let valid = !l.is_empty() && l.terms().all(|(m, k)| !m.is_constant() && k.is_positive());
            if !valid {
                continue;
            }
            let key = (l.len(), l.monomials().cloned().collect::<Vec<_>>(), lower);
            if best.as_ref().is_none_or(|(b, _)| key < *b) {
                best = Some((key, BoundForm { lower, c, l }));
            }
        }
    }
    best.map(|(_, f)| f)
}

fn tolerance_text(s: &TolShape, rel: Rel) -> Option<String> {
    let BoundForm { lower, c, l } = bound_form(s)?;
    let upper = !lower;
    let symbol = if upper {
        rel.symbol()
    } else {
        match rel {
            Rel::Eq => "=",
            Rel::Le => ">=",
            Rel::Lt => ">",
            Rel::Ge => "<=",
            Rel::Gt => "<",
        }
    };
    let unit_tp = s.tp.as_constant().is_some_and(|k| k.is_one());
    let bound = match &s.value {
        Some(v) => {
            let n = if upper { &c + v } else { &c - v };
            if unit_tp {
                format_rational(&n)
            } else if n.is_zero() {
                "0".into()
            } else if n.is_one() {
                s.tp.to_string()
            } else {
                format!("{}*{}", format_rational(&n), wrap(&s.tp))
            }
        }
        None => {
            let e = format!("e{}", s.eps);
            let mag = format_rational(&c.abs());
            let factor = match (upper, c.is_zero(), c.is_positive()) {
                (true, true, _) => e,
                (true, false, true) => format!("{mag} + {e}"),
                (true, false, false) => format!("{e} - {mag}"),
                (false, true, _) => format!("-{e}"),
                (false, false, true) => format!("{mag} - {e}"),
                (false, false, false) => format!("-{mag} - {e}"),
            };
            if unit_tp {
                factor
            } else if c.is_zero() && upper {
                format!("{factor}*{}", wrap(&s.tp))
            } else {
                format!("({factor})*{}", wrap(&s.tp))
            }
        }
    };
    Some(format!("{l} {symbol} {bound}"))
}

fn wrap(p: &Poly) -> String {
    if p.len() > 1 {
        format!("({p})")
    } else {
        p.to_string()
    }
}
