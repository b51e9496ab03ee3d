//! Entropy and its maximization over solution spaces.

mod cell;
pub(crate) mod lp;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::canon::Poly;
use crate::constraints::{RegionCell, RegionDescriptor};
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use cell::{prepare, Prepared, Solver, Split, Tolerances};
use lp::{Cmp, Lp, LpOutcome};

pub(crate) use cell::linear_coefs;

/// `-sum u_j ln u_j` with `0 ln 0 = 0`.
pub fn entropy(u: &[f64]) -> f64 {
    -u.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// Solver settings. Defaults match the documented tolerances.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxEntConfig {
    /// Seed for the pseudo-random starting points.
    pub seed: u64,
    /// Random starts per nonlinear cell, besides the center and uniform point.
    pub starts: usize,
    /// Extra random starts per linear cell. The optimum there is unique, so
    /// these only serve as a determinism check.
    pub linear_starts: usize,
    /// Maxima closer than this (max norm) are one cluster.
    pub cluster_radius: f64,
    /// Looser radius for maxima from nonlinear cells, whose local solves are
    /// less accurate.
    pub nonlinear_cluster_radius: f64,
    /// Maxima within this much entropy of the best count as ties.
    pub tie_tolerance: f64,
    /// Largest constraint violation accepted for a reported maximum.
    pub feasibility_tolerance: f64,
    pub max_newton: usize,
    pub max_outer: usize,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for MaxEntConfig {
    fn default() -> Self {
        MaxEntConfig {
            seed: 0x5eed,
            starts: 32,
            linear_starts: 0,
            cluster_radius: 1e-6,
            nonlinear_cluster_radius: 1e-5,
            tie_tolerance: 1e-8,
            feasibility_tolerance: 1e-7,
            max_newton: 200,
            max_outer: 60,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Uniqueness {
    /// One maximum, every cell linear: strict concavity makes it exact.
    ProvenUnique,
    /// One maximum found, but some cell is nonlinear.
    HeuristicallyUnique,
    /// Two or more separated maxima tie.
    Multiple,
}

/// A cluster of maxima.
#[derive(Clone, Debug, Serialize)]
pub struct MaxPoint {
    pub point: Vec<f64>,
    pub entropy: f64,
    /// Indices of the region cells attaining this point.
    pub cells: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Residuals {
    /// Largest constraint violation over the reported maxima.
    pub feasibility: f64,
    /// Largest reduced gradient of the final barrier subproblem.
    pub kkt: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxEntResult {
    #[serde(rename = "points")]
    pub maxima: Vec<MaxPoint>,
    pub entropy: f64,
    pub unique: Uniqueness,
    pub feasible: bool,
    pub residuals: Residuals,
}

impl MaxEntResult {
    /// The maximum when there is exactly one.
    pub fn unique_point(&self) -> Option<&[f64]> {
        match self.maxima.as_slice() {
            [m] => Some(&m.point),
            _ => None,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.maxima.iter().map(|m| m.point.as_slice())
    }
}

struct Candidate {
    point: Vec<f64>,
    entropy: f64,
    cell: usize,
    linear: bool,
    feasibility: f64,
    kkt: f64,
}

/// Maximizes entropy over the closure of `region`.
///
/// Each cell is solved on its own; linear cells have a single maximum, which
/// is found from the cell's center, and nonlinear cells are searched from
/// many starts. Global maxima are the candidates tying the best entropy,
/// clustered by distance. An empty region is an `Infeasible` error.
pub fn maximize(region: &RegionDescriptor, config: &MaxEntConfig) -> Result<MaxEntResult> {
    let k = region.num_atoms;
    let jobs: Vec<(usize, &RegionCell)> = region.cells.iter().enumerate().collect();
    let per_cell = par::map(config.exec, jobs, |(i, c)| solve_cell(c, i, k, config));
    let mut cands = Vec::new();
    for r in per_cell {
        cands.extend(r?);
    }
    if cands.is_empty() {
        return Err(Error::Infeasible("the solution space is empty".into()));
    }
    let best = cands.iter().map(|c| c.entropy).fold(f64::NEG_INFINITY, f64::max);
    cands.retain(|c| c.entropy >= best - config.tie_tolerance);
    cands.sort_by(|a, b| b.entropy.total_cmp(&a.entropy).then(a.cell.cmp(&b.cell)));
    let mut clusters: Vec<(MaxPoint, bool)> = Vec::new();
    let mut residuals = Residuals::default();
    for c in cands {
        residuals.feasibility = residuals.feasibility.max(c.feasibility);
        residuals.kkt = residuals.kkt.max(c.kkt);
        let radius = if c.linear { config.cluster_radius } else { config.nonlinear_cluster_radius };
        let near = clusters.iter_mut().find(|(m, _)| distance(&m.point, &c.point) <= radius);
        match near {
            Some((m, lin)) => {
                if !m.cells.contains(&c.cell) {
                    m.cells.push(c.cell);
                }
                *lin &= c.linear;
            }
            None => clusters.push((MaxPoint { point: c.point, entropy: c.entropy, cells: vec![c.cell] }, c.linear)),
        }
    }
    let all_linear = region.is_linear();
    let unique = match clusters.len() {
        1 if all_linear => Uniqueness::ProvenUnique,
        1 => Uniqueness::HeuristicallyUnique,
        _ => Uniqueness::Multiple,
    };
    let mut maxima: Vec<MaxPoint> = clusters.into_iter().map(|(m, _)| m).collect();
    for m in &mut maxima {
        m.cells.sort();
    }
    Ok(MaxEntResult { entropy: best, maxima, unique, feasible: true, residuals })
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn tolerances(config: &MaxEntConfig) -> Tolerances {
    Tolerances { max_newton: config.max_newton, max_outer: config.max_outer }
}

/// Linear structure of a cell's closure, or `None` when it is empty.
pub(crate) fn prepare_cell(cell: &RegionCell, k: usize) -> Result<Option<Prepared>> {
    prepare(&Split::of(cell, k))
}

fn solve_cell(cell: &RegionCell, index: usize, k: usize, config: &MaxEntConfig) -> Result<Vec<Candidate>> {
    let Some(prep) = prepare_cell(cell, k)? else {
        return Ok(Vec::new());
    };
    let solver = Solver::new(&prep);
    let tol = tolerances(config);
    let linear = prep.nonlinear.is_empty();
    let n_random = if linear { config.linear_starts } else { config.starts };
    let starts = start_points(&prep, n_random, config.seed ^ (index as u64).wrapping_mul(0x9e37_79b9))?;
    let locals = par::map(config.exec, starts, |s| solver.solve_from(&s, &tol));
    let mut out: Vec<Candidate> = locals
        .into_iter()
        .filter(|l| l.feasibility <= config.feasibility_tolerance && l.entropy.is_finite())
        .map(|l| Candidate {
            point: l.point,
            entropy: l.entropy,
            cell: index,
            linear,
            feasibility: l.feasibility,
            kkt: l.kkt,
        })
        .collect();
    if linear && !out.is_empty() {
        // One maximum; keep the best in case a start stalled.
        out.sort_by(|a, b| b.entropy.total_cmp(&a.entropy));
        out.truncate(1);
    }
    Ok(out)
}

/// The center, the uniform point when it is strictly inside, and `n`
/// midpoints between the center and vertices maximizing random objectives.
fn start_points(prep: &Prepared, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let k = prep.k;
    let mut out = vec![prep.center.clone()];
    if n == 0 {
        return Ok(out);
    }
    let uniform = vec![1.0 / k as f64; k];
    let inside = prep.zero.iter().all(|z| !z)
        && prep.eq.iter().all(|(a, b)| (a.iter().sum::<f64>() / k as f64 - b).abs() < 1e-12)
        && prep.ineq.iter().all(|r| r.b - r.a.iter().sum::<f64>() / k as f64 > 1e-9);
    if inside {
        out.push(uniform);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = prep.lp();
    for _ in 0..n {
        let mut lp: Lp = base.clone();
        lp.objective = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        if let LpOutcome::Optimal { x, .. } = lp.solve(true)? {
            out.push(prep.center.iter().zip(&x).map(|(c, v)| 0.5 * c + 0.5 * v).collect());
        }
    }
    Ok(out)
}

/// Range of `numerator / denominator` over the closure of `region`, taken
/// over points where the denominator is positive.
///
/// Each linear cell is turned into a linear program by the Charnes-Cooper
/// substitution. Nonlinear cells are not supported.
pub fn bound_statistic(region: &RegionDescriptor, numerator: &Poly, denominator: &Poly) -> Result<(f64, f64)> {
    if !numerator.is_linear() || !denominator.is_linear() || !numerator.eps_indices().is_empty() {
        return Err(Error::Unsupported("ratio bounds need linear terms over atomic proportions".into()));
    }
    let k = region.num_atoms;
    let (na, nc) = linear_coefs(numerator, k);
    let (da, dc) = linear_coefs(denominator, k);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut nonempty = false;
    for cell in &region.cells {
        if !cell.linear {
            return Err(Error::Unsupported("ratio bounds over a nonlinear cell".into()));
        }
        let Some(prep) = prepare_cell(cell, k)? else { continue };
        nonempty = true;
        // Variables y = s * u and s >= 0.
        let mut lp = Lp::new((0..k).map(|j| if prep.zero[j] { (0.0, 0.0) } else { (0.0, f64::INFINITY) }).collect());
        let s = lp.add_var((0.0, f64::INFINITY), 0.0);
        for (a, b) in &prep.eq {
            let mut row: Vec<(usize, f64)> = a.iter().copied().enumerate().collect();
            row.push((s, -b));
            lp.row(row, Cmp::Eq, 0.0);
        }
        for r in &prep.ineq {
            let mut row: Vec<(usize, f64)> = r.a.iter().copied().enumerate().collect();
            row.push((s, -r.b));
            lp.row(row, Cmp::Le, 0.0);
        }
        let mut den: Vec<(usize, f64)> = da.iter().copied().enumerate().collect();
        den.push((s, dc));
        lp.row(den, Cmp::Eq, 1.0);
        lp.objective = na.iter().copied().chain([nc]).collect();
        for maximize in [false, true] {
            match lp.solve(maximize)? {
                LpOutcome::Optimal { value, .. } => {
                    lo = lo.min(value);
                    hi = hi.max(value);
                }
                LpOutcome::Unbounded if maximize => hi = f64::INFINITY,
                LpOutcome::Unbounded => lo = f64::NEG_INFINITY,
                LpOutcome::Infeasible => break,
            }
        }
    }
    if !nonempty {
        return Err(Error::Infeasible("the solution space is empty".into()));
    }
    if lo > hi {
        return Err(Error::Invalid("the denominator vanishes on the whole region".into()));
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::to_canonical;
    use crate::constraints::{gamma, solution_space, Constraint, Rel};
    use crate::model::rational::rat;
    use crate::model::{ToleranceVector, Vocabulary};
    use crate::parser::{parse_formula, Side};

    fn region(vocab: &Vocabulary, kb: &str, tau: &ToleranceVector) -> RegionDescriptor {
        let f = parse_formula(kb, vocab, Side::Kb).unwrap();
        solution_space(&gamma(&to_canonical(&f, vocab).unwrap()), tau).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        distance(a, b) <= tol
    }

    #[test]
    fn entropy_values() {
        assert!((entropy(&[0.5, 0.5]) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(entropy(&[1.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn unconstrained_is_uniform() {
        let r = maximize(&RegionDescriptor::simplex(8), &MaxEntConfig::default()).unwrap();
        assert_eq!(r.unique, Uniqueness::ProvenUnique);
        assert!(close(r.unique_point().unwrap(), &[0.125; 8], 1e-12));
        assert!((r.entropy - 8f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn upper_bound_is_active() {
        let c = Constraint::new(Poly::u(0).sub(&Poly::constant(rat(3, 10))), Rel::Le);
        let r = maximize(&RegionDescriptor::from_cells(2, vec![vec![c]]), &MaxEntConfig::default()).unwrap();
        assert!(close(r.unique_point().unwrap(), &[0.3, 0.7], 1e-9));
        assert!(r.residuals.feasibility < 1e-8);
    }

    #[test]
    fn disjoint_ranges_have_two_maxima() {
        let v = Vocabulary::unary(["P"]).unwrap();
        let r = region(&v, "||P(x)||_{x} <~[1] 0.3 | ||P(x)||_{x} >~[2] 0.7", &ToleranceVector::zero());
        let out = maximize(&r, &MaxEntConfig::default()).unwrap();
        assert_eq!(out.unique, Uniqueness::Multiple);
        assert_eq!(out.maxima.len(), 2);
        let pts: Vec<&[f64]> = out.points().collect();
        assert!(pts.iter().any(|p| close(p, &[0.3, 0.7], 1e-9)));
        assert!(pts.iter().any(|p| close(p, &[0.7, 0.3], 1e-9)));
    }

    #[test]
    fn hepatitis_closed_form() {
        let v = Vocabulary::unary(["Hep", "Jaun", "Blue"]).unwrap().with_constants(["Eric"]).unwrap();
        let kb = "forall x (Hep(x) -> Jaun(x)) & ||Hep(x) | Jaun(x)||_{x} ~=[1] 0.8 \
                  & ||Blue(x)||_{x} ~=[2] 0.25 & Jaun(Eric)";
        let r = region(&v, kb, &ToleranceVector::zero());
        let out = maximize(&r, &MaxEntConfig::default()).unwrap();
        assert_eq!(out.unique, Uniqueness::ProvenUnique);
        let g = 2f64.powf(1.6);
        let expect: Vec<f64> =
            [1.0, 3.0, 0.0, 0.0, 0.25, 0.75, g / 4.0, 3.0 * g / 4.0].iter().map(|x| x / (5.0 + g)).collect();
        assert!(close(out.unique_point().unwrap(), &expect, 1e-8), "{:?}", out.unique_point());
    }

    #[test]
    fn linear_cells_are_seed_independent() {
        let v = Vocabulary::unary(["P", "Q"]).unwrap();
        let r = region(&v, "||P(x) | Q(x)||_{x} ~=[1] 0.9 & ||Q(x)||_{x} <~[2] 0.2", &ToleranceVector::zero());
        let a = maximize(&r, &MaxEntConfig::default()).unwrap();
        let cfg = MaxEntConfig { linear_starts: 8, seed: 99, ..MaxEntConfig::default() };
        let b = maximize(&r, &cfg).unwrap();
        assert!(close(a.unique_point().unwrap(), b.unique_point().unwrap(), 1e-8));
    }

    #[test]
    fn empty_region_is_infeasible() {
        let v = Vocabulary::unary(["P"]).unwrap();
        let r = region(&v, "||P(x)||_{x} <~[1] 0.3 & ||P(x)||_{x} >~[2] 0.7", &ToleranceVector::zero());
        assert!(matches!(maximize(&r, &MaxEntConfig::default()), Err(Error::Infeasible(_))));
    }

    #[test]
    fn ratio_bounds() {
        let v = Vocabulary::unary(["P1", "P2"]).unwrap();
        let tau = ToleranceVector::new([(1, rat(1, 10))]).unwrap();
        let r = region(&v, "forall x P1(x) & 3 * ||P1(x) & P2(x)||_{x} <~[1] 1", &tau);
        let (lo, hi) = bound_statistic(&r, &Poly::u(0), &Poly::int(1)).unwrap();
        assert!(lo.abs() < 1e-9 && (hi - 1.1 / 3.0).abs() < 1e-9);
        let t = Poly::sum_u([0, 1]);
        let (lo, hi) = bound_statistic(&r, &t, &t).unwrap();
        assert!((lo - 1.0).abs() < 1e-9 && (hi - 1.0).abs() < 1e-9);
        let hv = Vocabulary::unary(["Hep", "Jaun", "Blue"]).unwrap();
        let hr = region(&hv, "forall x (Hep(x) -> Jaun(x)) & ||Hep(x) | Jaun(x)||_{x} ~=[1] 0.8", &ToleranceVector::zero());
        let (lo, hi) = bound_statistic(&hr, &Poly::sum_u([0, 1]), &Poly::sum_u([0, 1, 4, 5])).unwrap();
        assert!((lo - 0.8).abs() < 1e-9 && (hi - 0.8).abs() < 1e-9, "{lo} {hi}");
    }
}
