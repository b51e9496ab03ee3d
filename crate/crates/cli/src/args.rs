use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "rw", version, about = "Degrees of belief from statistical knowledge bases")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a knowledge base and report its vocabulary and warnings.
    Check(Common),
    /// Print the canonical form of the knowledge base.
    Canon(Common),
    /// Print the constraint formula, symbolic or at the given tolerances.
    Constraints(WithTau),
    /// Maximum-entropy points of the solution space.
    Maxent(WithTau),
    /// Degree of belief in each query.
    Believe(Believe),
    /// Exact finite-size probabilities or satisfying-world histograms.
    Oracle(Oracle),
    /// Values at a grid of small tolerances and their spread.
    Probe(Probe),
    /// Maximum-entropy plausibility of default rules.
    Defaults(Defaults),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Maxent,
    Oracle,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Auto,
    Exhaustive,
    Aggregated,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output format.
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// Shorthand for `--format json`.
    #[arg(long)]
    pub json: bool,
    /// Seed for the solver's random starts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run every batch on the current thread.
    #[arg(long)]
    pub sequential: bool,
    /// Random starts per nonlinear cell.
    #[arg(long)]
    pub starts: Option<usize>,
    /// Newton iterations per barrier step.
    #[arg(long)]
    pub max_newton: Option<usize>,
    /// Outer barrier iterations.
    #[arg(long)]
    pub max_outer: Option<usize>,
    /// Largest constraint violation accepted at a maximum.
    #[arg(long)]
    pub feasibility_tol: Option<f64>,
}

impl Output {
    pub fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Knowledge base in `.rwkb` syntax.
    pub input: PathBuf,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Debug, Args)]
pub struct Tau {
    /// Tolerances per index, as in `1=0.05,2=0.01`.
    #[arg(long, conflicts_with = "tau_all")]
    pub tau: Option<String>,
    /// One tolerance for every index.
    #[arg(long)]
    pub tau_all: Option<String>,
}

#[derive(Debug, Args)]
pub struct WithTau {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub tau: Tau,
}

#[derive(Debug, Args)]
pub struct Believe {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub tau: Tau,
    /// Query to ask instead of the file's queries. Repeatable.
    #[arg(long)]
    pub query: Vec<String>,
    /// Domain sizes for the exact comparison, as in `20,40`.
    #[arg(long = "N", value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Which values to compute; defaults to both when sizes are given.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, value_enum, default_value = "auto")]
    pub backend: BackendArg,
}

#[derive(Debug, Args)]
pub struct Oracle {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub tau: Tau,
    #[arg(long)]
    pub query: Vec<String>,
    /// Domain sizes, as in `20,40,80`.
    #[arg(long = "N", value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Print the satisfying worlds per atom-count vector instead.
    #[arg(long)]
    pub histogram: bool,
    #[arg(long, value_enum, default_value = "auto")]
    pub backend: BackendArg,
}

#[derive(Debug, Args)]
pub struct Probe {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub query: Vec<String>,
    /// Probe scales `10^-e`, as in `2,3,4`.
    #[arg(long, value_delimiter = ',')]
    pub exponents: Vec<u32>,
}

#[derive(Debug, Args)]
pub struct Defaults {
    /// Rules such as `Bird -> Fly;` and `Penguin => Bird;`.
    pub rules: PathBuf,
    /// Rule to judge, such as `Penguin -> !Fly`. Repeatable.
    #[arg(long, required = true)]
    pub query: Vec<String>,
    #[command(flatten)]
    pub out: Output,
}
