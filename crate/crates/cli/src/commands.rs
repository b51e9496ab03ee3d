use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use randworlds::belief::{
    believe, believe_at, classify, oracle_rows, probe_tau, BeliefConfig, BeliefResult, OracleRow, ProbeTable, Status,
};
use randworlds::canon::to_canonical;
use randworlds::constraints::{gamma, solution_space};
use randworlds::embed::{me_plausible, DefaultRule, Plausibility};
use randworlds::maxent::{maximize, MaxEntConfig, MaxEntResult};
use randworlds::model::rational::parse_rational;
use randworlds::model::{Formula, ToleranceVector};
use randworlds::par::Exec;
use randworlds::parser::rules::{parse_rule, parse_rules};
use randworlds::parser::{parse, parse_formula, print_formula, Side, SourceFile};
use randworlds::semantics::{count_worlds_with, Backend, CountConfig};
use serde::Serialize;

use crate::args::{self, BackendArg, Format, Mode, Output, Tau};

/// What a subcommand prints: text for people, or one JSON document.
pub struct Rendered {
    pub text: String,
    pub json: serde_json::Value,
}

impl Rendered {
    fn new(text: String, json: impl Serialize) -> Result<Rendered> {
        Ok(Rendered { text, json: serde_json::to_value(json)? })
    }

    pub fn emit(&self, format: Format) -> Result<String> {
        Ok(match format {
            Format::Json => serde_json::to_string_pretty(&self.json)? + "\n",
            Format::Text | Format::Csv => self.text.clone(),
        })
    }
}

fn load(path: &Path) -> Result<SourceFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file = parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    for w in &file.warnings {
        eprintln!("warning: {w}");
    }
    Ok(file)
}

pub fn maxent_config(out: &Output) -> MaxEntConfig {
    let mut c = MaxEntConfig { seed: out.seed, ..MaxEntConfig::default() };
    if out.sequential {
        c.exec = Exec::Sequential;
    }
    if let Some(s) = out.starts {
        c.starts = s;
    }
    if let Some(n) = out.max_newton {
        c.max_newton = n;
    }
    if let Some(n) = out.max_outer {
        c.max_outer = n;
    }
    if let Some(t) = out.feasibility_tol {
        c.feasibility_tolerance = t;
    }
    c
}

fn belief_config(out: &Output) -> BeliefConfig {
    BeliefConfig { maxent: maxent_config(out), ..BeliefConfig::default() }
}

fn count_config(out: &Output, backend: BackendArg) -> CountConfig {
    CountConfig {
        backend: match backend {
            BackendArg::Auto => Backend::Auto,
            BackendArg::Exhaustive => Backend::Exhaustive,
            BackendArg::Aggregated => Backend::Aggregated,
        },
        exec: if out.sequential { Exec::Sequential } else { Exec::Parallel },
        ..CountConfig::default()
    }
}

/// `None` when neither flag is given.
pub fn parse_tau(t: &Tau) -> Result<Option<ToleranceVector>> {
    if let Some(all) = &t.tau_all {
        return Ok(Some(ToleranceVector::uniform(parse_rational(all)?)?));
    }
    let Some(text) = &t.tau else { return Ok(None) };
    let mut pairs = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let Some((i, v)) = part.split_once('=') else { bail!("expected `index=value` in --tau, found `{part}`") };
        let i: u32 = i.trim().parse().with_context(|| format!("bad tolerance index `{i}`"))?;
        pairs.push((i, parse_rational(v)?));
    }
    Ok(Some(ToleranceVector::new(pairs)?))
}

fn queries(file: &SourceFile, given: &[String]) -> Result<Vec<Formula>> {
    let qs: Vec<Formula> = if given.is_empty() {
        file.queries.iter().map(|s| s.formula.clone()).collect()
    } else {
        given.iter().map(|q| parse_formula(q, &file.vocab, Side::Query)).collect::<randworlds::Result<_>>()?
    };
    if qs.is_empty() {
        bail!("no query: pass --query or add a query block");
    }
    Ok(qs)
}

/// One object for one item, an array otherwise.
fn one_or_many<T: Serialize>(items: &[T]) -> Result<serde_json::Value> {
    Ok(match items {
        [one] => serde_json::to_value(one)?,
        many => serde_json::to_value(many)?,
    })
}

fn fmt_point(u: &[f64]) -> String {
    let parts: Vec<String> = u.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

#[derive(Serialize)]
struct CheckOut<'a> {
    predicates: &'a [String],
    constants: &'a [String],
    relations: Vec<String>,
    kb: Vec<String>,
    queries: Vec<String>,
    warnings: &'a [String],
}

pub fn check(a: &args::Common) -> Result<Rendered> {
    let f = load(&a.input)?;
    let out = CheckOut {
        predicates: f.vocab.predicates(),
        constants: f.vocab.constants(),
        relations: f.vocab.relations().iter().map(|(r, n)| format!("{r}/{n}")).collect(),
        kb: f.kb.iter().map(|s| print_formula(&s.formula)).collect(),
        queries: f.queries.iter().map(|s| print_formula(&s.formula)).collect(),
        warnings: &f.warnings,
    };
    let text = format!(
        "ok: {} predicates, {} constants, {} relations; {} knowledge-base statements, {} queries\n",
        out.predicates.len(),
        out.constants.len(),
        out.relations.len(),
        out.kb.len(),
        out.queries.len()
    );
    Rendered::new(text, out)
}

#[derive(Serialize)]
struct CanonOut {
    canonical: String,
    disjuncts: usize,
    tolerance_indices: Vec<u32>,
}

pub fn canon(a: &args::Common) -> Result<Rendered> {
    let f = load(&a.input)?;
    let cf = to_canonical(&f.kb_formula(), &f.vocab)?;
    let out = CanonOut {
        canonical: cf.to_string(),
        disjuncts: cf.disjuncts().len(),
        tolerance_indices: cf.tolerance_indices().into_iter().collect(),
    };
    Rendered::new(format!("{}\n", out.canonical), out)
}

#[derive(Serialize)]
struct ConstraintsOut {
    tau: Option<String>,
    cells: usize,
    constraints: String,
}

pub fn constraints(a: &args::WithTau) -> Result<Rendered> {
    let f = load(&a.common.input)?;
    let g = gamma(&to_canonical(&f.kb_formula(), &f.vocab)?);
    let tau = parse_tau(&a.tau)?;
    let shown = match &tau {
        Some(t) => g.instantiate(t),
        None => g,
    };
    let out = ConstraintsOut { tau: tau.map(|t| t.describe()), cells: shown.cells().len(), constraints: shown.to_string() };
    Rendered::new(format!("{}\n", out.constraints), out)
}

#[derive(Serialize)]
struct MaxentOut {
    #[serde(flatten)]
    result: MaxEntResult,
    tau: String,
    config: MaxEntConfig,
}

pub fn maxent(a: &args::WithTau) -> Result<Rendered> {
    let f = load(&a.common.input)?;
    let g = gamma(&to_canonical(&f.kb_formula(), &f.vocab)?);
    let tau = parse_tau(&a.tau)?.unwrap_or_else(ToleranceVector::zero);
    let config = maxent_config(&a.common.out);
    let result = maximize(&solution_space(&g, &tau)?, &config)?;
    let mut text = String::new();
    for m in &result.maxima {
        writeln!(text, "u = {}", fmt_point(&m.point))?;
    }
    writeln!(text, "entropy = {:.9}", result.entropy)?;
    writeln!(text, "unique = {}", serde_json::to_value(result.unique)?.as_str().unwrap_or_default())?;
    Rendered::new(text, MaxentOut { result, tau: tau.describe(), config })
}

fn belief_text(r: &BeliefResult) -> String {
    let mut t = format!("{}: ", r.query);
    match (r.value, r.interval) {
        (Some(v), _) => t += &format!("{v:.6}"),
        (None, Some([lo, hi])) => t += &format!("[{lo:.6}, {hi:.6}]"),
        (None, None) => t += "-",
    }
    let status = serde_json::to_value(r.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    t += &format!(" ({status}, {})\n", r.class);
    if let Some(n) = &r.note {
        t += &format!("  note: {n}\n");
    }
    if r.status == Status::Nonrobust || !r.probes.is_empty() {
        for p in &r.probes {
            t += &format!("  probe {}: {}\n", tau_text(&p.tau), p.value.map_or("-".into(), |v| format!("{v:.6}")));
        }
    }
    for o in &r.oracle {
        t += &format!("  N={} tau={}: {}\n", o.n, o.tau, oracle_value(o));
    }
    t
}

fn tau_text(tau: &std::collections::BTreeMap<String, f64>) -> String {
    if tau.is_empty() {
        return "0".into();
    }
    tau.iter().map(|(i, v)| format!("{i}={v}")).collect::<Vec<_>>().join(",")
}

fn oracle_value(o: &OracleRow) -> String {
    match (&o.exact, o.value) {
        (Some(e), Some(v)) => format!("{v:.6} ({e})"),
        _ => "undefined".into(),
    }
}

/// The oracle needs explicit tolerances unless the knowledge base has none.
fn oracle_tau(kb: &Formula, tau: Option<ToleranceVector>) -> Result<ToleranceVector> {
    match tau {
        Some(t) => Ok(t),
        None if kb.tolerance_indices().is_empty() => Ok(ToleranceVector::zero()),
        None => bail!("the exact oracle needs tolerances: pass --tau or --tau-all"),
    }
}

pub fn believe_cmd(a: &args::Believe) -> Result<Rendered> {
    let f = load(&a.common.input)?;
    let kb = f.kb_formula();
    let qs = queries(&f, &a.query)?;
    let tau = parse_tau(&a.tau)?;
    let config = belief_config(&a.common.out);
    let mode = a.mode.unwrap_or(if a.n.is_empty() { Mode::Maxent } else { Mode::Both });
    if mode != Mode::Maxent && a.n.is_empty() {
        bail!("--mode {mode:?} needs domain sizes: pass --N");
    }
    let mut results = Vec::new();
    for q in &qs {
        let mut r = match (mode, &tau) {
            (Mode::Oracle, _) => {
                let class = classify(q, &kb, &f.vocab)?;
                BeliefResult::new(q, class.name(), &config)
            }
            (_, Some(t)) => believe_at(q, &kb, &f.vocab, t, &config)?,
            (_, None) => believe(q, &kb, &f.vocab, &config)?,
        };
        if mode != Mode::Maxent {
            let t = oracle_tau(&kb, tau.clone())?;
            r.oracle = oracle_rows(q, &kb, &f.vocab, &a.n, &t, &count_config(&a.common.out, a.backend))?;
            if mode == Mode::Oracle {
                r.value = r.oracle.last().and_then(|o| o.value);
                r.status = if r.value.is_some() { Status::Defined } else { Status::Unsupported };
                r.note = Some("exact value at the largest domain size".into());
            }
        }
        results.push(r);
    }
    let text = results.iter().map(belief_text).collect();
    Rendered::new(text, one_or_many(&results)?)
}

#[derive(Serialize)]
struct Histogram {
    n: usize,
    total: String,
    backend: Backend,
    rows: Vec<(Vec<String>, String)>,
}

#[derive(Serialize)]
struct OracleOut {
    query: String,
    rows: Vec<OracleRow>,
}

pub fn oracle(a: &args::Oracle) -> Result<Rendered> {
    let f = load(&a.common.input)?;
    let kb = f.kb_formula();
    let tau = oracle_tau(&kb, parse_tau(&a.tau)?)?;
    let cc = count_config(&a.common.out, a.backend);
    if a.histogram {
        let k = f.vocab.num_atoms();
        let mut text = String::new();
        let mut out = Vec::new();
        for &n in &a.n {
            let rep = count_worlds_with(&f.vocab, n, &tau, &kb, true, &cc)?;
            if a.n.len() > 1 {
                writeln!(text, "# N={n}")?;
            }
            text += &rep.to_csv(k);
            let rows = rep
                .histogram
                .iter()
                .flatten()
                .map(|(counts, c)| (counts.iter().map(|x| format!("{x}/{n}")).collect(), c.to_string()))
                .collect();
            out.push(Histogram { n, total: rep.total.to_string(), backend: rep.backend, rows });
        }
        return Rendered::new(text, one_or_many(&out)?);
    }
    let mut text = String::new();
    let mut out = Vec::new();
    for q in queries(&f, &a.query)? {
        let rows = oracle_rows(&q, &kb, &f.vocab, &a.n, &tau, &cc)?;
        writeln!(text, "{}", print_formula(&q))?;
        for o in &rows {
            writeln!(text, "  N={}: {}", o.n, oracle_value(o))?;
        }
        out.push(OracleOut { query: print_formula(&q), rows });
    }
    Rendered::new(text, one_or_many(&out)?)
}

#[derive(Serialize)]
struct ProbeOut {
    query: String,
    #[serde(flatten)]
    table: ProbeTable,
    config: BeliefConfig,
}

pub fn probe(a: &args::Probe) -> Result<Rendered> {
    let f = load(&a.common.input)?;
    let kb = f.kb_formula();
    let mut config = belief_config(&a.common.out);
    if !a.exponents.is_empty() {
        config.probe_exponents = a.exponents.clone();
    }
    let mut text = String::new();
    let mut out = Vec::new();
    for q in queries(&f, &a.query)? {
        let table = probe_tau(&q, &kb, &f.vocab, &config)?;
        writeln!(text, "{}", print_formula(&q))?;
        for r in &table.rows {
            let v = r.value.map_or("-".into(), |v| format!("{v:.6}"));
            let note = r.note.as_deref().map(|n| format!("  ({n})")).unwrap_or_default();
            writeln!(text, "  {}: {v}{note}", tau_text(&r.tau))?;
        }
        let spread = table.spread.map_or("-".into(), |s| format!("{s:.6}"));
        writeln!(text, "  spread {spread}{}", if table.nonrobust { ", nonrobust" } else { "" })?;
        out.push(ProbeOut { query: print_formula(&q), table, config: config.clone() });
    }
    Rendered::new(text, one_or_many(&out)?)
}

#[derive(Serialize)]
struct DefaultsOut {
    #[serde(flatten)]
    plausibility: Plausibility,
    config: BeliefConfig,
}

pub fn defaults(a: &args::Defaults) -> Result<Rendered> {
    let text = fs::read_to_string(&a.rules).with_context(|| format!("reading {}", a.rules.display()))?;
    let rules: Vec<DefaultRule> = parse_rules(&text)?.into_iter().map(DefaultRule::from).collect();
    let config = belief_config(&a.out);
    let mut out_text = String::new();
    let mut out = Vec::new();
    for q in &a.query {
        let query: DefaultRule = parse_rule(q)?.into();
        let p = me_plausible(&rules, &query, &config)?;
        let verdict = serde_json::to_value(p.verdict)?.as_str().unwrap_or_default().to_uppercase();
        writeln!(out_text, "{}: {verdict}", p.query)?;
        for r in &p.trace {
            let v = r.value.map_or("-".into(), |v| format!("{v:.6}"));
            writeln!(out_text, "  tau={}: {v}", r.tau)?;
        }
        out.push(DefaultsOut { plausibility: p, config: config.clone() });
    }
    Rendered::new(out_text, one_or_many(&out)?)
}
