use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::{gamma, gamma_weakened, solution_space, Constraint, ConstraintFormula, RegionDescriptor, Rel, SizeDescription};
use crate::canon::{CanonicalForm, Poly};
use crate::error::{Error, Result};
use crate::maxent::{maximize, prepare_cell, MaxEntConfig, MaxEntResult};
use crate::model::rational::format_rational;
use crate::model::{ToleranceVector, Vocabulary};
use crate::semantics::World;

/// Maxima of two spaces count as the same set when every point of each lies
/// this close to a point of the other.
const SAME_POINT: f64 = 1e-6;
/// Residual accepted when testing whether a point lies in a cell.
const MEMBERSHIP_TOL: f64 = 1e-7;
/// Largest domain size tried when looking for a lattice point.
const MAX_LATTICE_N: usize = 2000;

/// Outcome of comparing the weakened and the zero-tolerance spaces.
#[derive(Clone, Debug, Serialize)]
pub struct EssentialPositivity {
    pub positive: bool,
    /// Maxima of the zero-tolerance space, `None` when it is empty.
    pub zero: Option<MaxEntResult>,
    /// Maxima of the weakened space, `None` when it is empty.
    pub weakened: Option<MaxEntResult>,
}

/// True when the weakened space and the zero-tolerance space have the same
/// maximum-entropy points.
pub fn is_essentially_positive(cf: &CanonicalForm, config: &MaxEntConfig) -> Result<EssentialPositivity> {
    let zero = optional(maximize(&solution_space(&gamma(cf), &ToleranceVector::zero())?, config))?;
    let weakened = optional(maximize(&RegionDescriptor::from_formula(&gamma_weakened(cf))?, config))?;
    let positive = match (&zero, &weakened) {
        (None, None) => true,
        (Some(a), Some(b)) => same_points(a, b),
        _ => false,
    };
    Ok(EssentialPositivity { positive, zero, weakened })
}

/// Turns an empty-space error into `None`.
pub(crate) fn optional(r: Result<MaxEntResult>) -> Result<Option<MaxEntResult>> {
    match r {
        Ok(m) => Ok(Some(m)),
        Err(Error::Infeasible(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn same_points(a: &MaxEntResult, b: &MaxEntResult) -> bool {
    let covered = |x: &MaxEntResult, y: &MaxEntResult| {
        x.points().all(|p| y.points().any(|q| p.iter().zip(q).all(|(s, t)| (s - t).abs() <= SAME_POINT)))
    };
    covered(a, b) && covered(b, a)
}

/// True when `v` is not in the closure of the space of `gamma` at `tau`
/// restricted to points whose size description differs from that of `v`.
///
/// Flipping a populated atom of `v` to empty moves at least that atom's
/// proportion away, so only atoms empty at `v` matter: `v` is unsafe when a
/// cell containing it also has points where such an atom is populated. For
/// linear cells that is decided exactly by a feasibility program; a
/// nonlinear cell is judged by its linear part, which can only err towards
/// calling `v` unsafe.
pub fn is_safe(v: &[f64], gamma: &ConstraintFormula, tau: &ToleranceVector) -> Result<bool> {
    let region = solution_space(gamma, tau)?;
    let sigma = SizeDescription::of(v);
    for cell in region.cells.iter().filter(|c| c.violation(v) <= MEMBERSHIP_TOL) {
        for j in (0..v.len()).filter(|&j| !sigma.exists(j)) {
            let flipped = cell.with(Constraint::new(Poly::u(j), Rel::Gt));
            if prepare_cell(&flipped, region.num_atoms)?.is_some() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Stability verdict at one tolerance vector.
#[derive(Clone, Debug, Serialize)]
pub struct Stability {
    /// Every maximum has the same size description and is safe.
    pub stable: bool,
    /// The shared size description, if any.
    pub sigma: Option<SizeDescription>,
    /// Exactly one maximum was found. Reported separately from stability.
    pub unique: bool,
    pub maxima: MaxEntResult,
}

pub fn check_stability(gamma: &ConstraintFormula, tau: &ToleranceVector, config: &MaxEntConfig) -> Result<Stability> {
    let maxima = maximize(&solution_space(gamma, tau)?, config)?;
    let sigmas: Vec<SizeDescription> = maxima.points().map(SizeDescription::of).collect();
    let shared = sigmas.windows(2).all(|w| w[0] == w[1]);
    let mut stable = shared;
    if shared {
        for p in maxima.points() {
            if !is_safe(p, gamma, tau)? {
                stable = false;
                break;
            }
        }
    }
    let sigma = if shared { sigmas.into_iter().next() } else { None };
    Ok(Stability { stable, sigma, unique: maxima.maxima.len() == 1, maxima })
}

/// Feasibility of the constraint system at probe tolerances, and a lattice
/// point witnessing a finite world.
#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyReport {
    /// `(tolerances, feasible)` per probe.
    pub probes: Vec<(String, bool)>,
    /// A domain size and lattice point satisfying the system at the first
    /// feasible probe, strict constraints strictly.
    pub lattice: Option<(usize, Vec<String>)>,
    pub consistent: bool,
}

pub fn check_eventual_consistency(
    gamma: &ConstraintFormula,
    probes: &[ToleranceVector],
    config: &MaxEntConfig,
) -> Result<ConsistencyReport> {
    let mut out = Vec::new();
    let mut lattice = None;
    for tau in probes {
        let region = solution_space(gamma, tau)?;
        let max = optional(maximize(&region, config))?;
        out.push((tau.describe(), max.is_some()));
        if lattice.is_none() {
            if let Some(m) = &max {
                lattice = find_lattice_point(&region, m)?;
            }
        }
    }
    let consistent = !out.is_empty() && out.iter().all(|(_, ok)| *ok) && lattice.is_some();
    let lattice = lattice.map(|(n, u)| (n, u.iter().map(format_rational).collect()));
    Ok(ConsistencyReport { probes: out, lattice, consistent })
}

/// Rounds interior points of each cell to the `1/N` lattice for growing `N`
/// until one satisfies a cell exactly.
fn find_lattice_point(region: &RegionDescriptor, max: &MaxEntResult) -> Result<Option<(usize, Vec<BigRational>)>> {
    let k = region.num_atoms;
    let mut targets: Vec<Vec<f64>> = max.points().map(<[f64]>::to_vec).collect();
    for cell in &region.cells {
        if let Some(p) = prepare_cell(cell, k)? {
            targets.push(p.center.clone());
        }
    }
    for n in 1..=MAX_LATTICE_N {
        for t in &targets {
            let counts = round_to_counts(t, n);
            let u: Vec<BigRational> = counts.iter().map(|&c| BigRational::new(BigInt::from(c), BigInt::from(n))).collect();
            if region.cells.iter().any(|c| c.constraints.iter().all(|k| k.holds_exact(&u))) {
                return Ok(Some((n, u)));
            }
        }
    }
    Ok(None)
}

/// Largest-remainder rounding of `n * u` to counts summing to `n`.
pub(crate) fn round_to_counts(u: &[f64], n: usize) -> Vec<usize> {
    let scaled: Vec<f64> = u.iter().map(|x| x.max(0.0) * n as f64).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&a, &b| (scaled[b] - scaled[b].floor()).total_cmp(&(scaled[a] - scaled[a].floor())).then(a.cmp(&b)));
    let mut left = n.saturating_sub(counts.iter().sum());
    for &j in order.iter().cycle().take(left.max(1) * u.len()) {
        if left == 0 {
            break;
        }
        counts[j] += 1;
        left -= 1;
    }
    counts
}

/// Builds a world of size `sum(counts)` with `counts[j]` elements in atom
/// `j`, and constants placed as the first cell satisfied by the lattice
/// point requires. Fails when no cell holds there, strictly.
pub fn realize_world(gamma: &ConstraintFormula, vocab: &Vocabulary, tau: &ToleranceVector, counts: &[usize]) -> Result<World> {
    let n: usize = counts.iter().sum();
    if counts.len() != vocab.num_atoms() || n == 0 {
        return Err(Error::Invalid("counts must cover every atom and sum to a positive size".into()));
    }
    let u: Vec<BigRational> = counts.iter().map(|&c| BigRational::new(BigInt::from(c), BigInt::from(n))).collect();
    let inst = gamma.instantiate(tau);
    let cell = inst
        .cells()
        .iter()
        .find(|c| c.constraints.iter().all(|k| k.holds_exact(&u)))
        .ok_or_else(|| Error::Invalid("the lattice point satisfies no cell".into()))?;
    let atoms: Vec<usize> = counts.iter().enumerate().flat_map(|(j, &c)| std::iter::repeat_n(j, c)).collect();
    let first: Vec<Option<usize>> = (0..counts.len()).map(|j| atoms.iter().position(|&a| a == j)).collect();
    let mut constants = vec![0; vocab.constants().len()];
    for (c, j) in &cell.members {
        let idx = vocab.constants().iter().position(|x| x == c).ok_or_else(|| Error::Invalid(format!("unknown constant {c}")))?;
        constants[idx] = first[*j].ok_or_else(|| Error::Invalid(format!("atom {} is empty", j + 1)))?;
    }
    World::new(vocab, n, atoms, constants)
}
