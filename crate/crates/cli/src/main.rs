//! `hypertree`: command line front end for sampling determinantal hypertrees,
//! the skeleton-tree limit, and the exact oracles that check them.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypertree::boundary::Mode;
use hypertree::enumerate::DEFAULT_BUDGET;
use hypertree::harness::{Roots, Source};
use hypertree::sampler::{Verify, DEFAULT_EXACT_THRESHOLD};
use hypertree::skeleton::{MatchChoice, DEFAULT_MAX_DEPTH};
use serde::Serialize;

use output::{CliError, CliResult, Format};

#[derive(Parser, Serialize)]
#[command(name = "hypertree", version, about)]
pub struct RunConfig {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand. Thread count and output path do not
/// affect results, so they are left out of the echoed configuration.
#[derive(Args, Serialize)]
pub struct Global {
    /// Master seed; every random choice derives from it.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    /// Largest n sampled with exact arithmetic under `--mode auto`.
    #[arg(long, global = true, default_value_t = DEFAULT_EXACT_THRESHOLD)]
    pub exact_threshold: usize,
    /// Cap on candidate face sets for exhaustive enumeration.
    #[arg(long, global = true, env = "HYPERTREE_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl Global {
    pub fn mode_for(&self, n: usize) -> Mode {
        match self.mode {
            ModeArg::Auto => Mode::auto(n, self.exact_threshold),
            ModeArg::Exact => Mode::Exact,
            ModeArg::Float => Mode::Float,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Auto,
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceArg {
    Auto,
    Dpp,
    Wilson,
}

impl From<SourceArg> for Source {
    fn from(s: SourceArg) -> Source {
        match s {
            SourceArg::Auto => Source::Auto,
            SourceArg::Dpp => Source::Dpp,
            SourceArg::Wilson => Source::Wilson,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyArg {
    Always,
    /// Every exact draw and every hundredth float draw.
    Default,
    Never,
}

impl From<VerifyArg> for Verify {
    fn from(v: VerifyArg) -> Verify {
        match v {
            VerifyArg::Always => Verify::Always,
            VerifyArg::Default => Verify::Default,
            VerifyArg::Never => Verify::Never,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChoiceArg {
    Uniform,
    First,
}

impl From<ChoiceArg> for MatchChoice {
    fn from(c: ChoiceArg) -> MatchChoice {
        match c {
            ChoiceArg::Uniform => MatchChoice::Uniform,
            ChoiceArg::First => MatchChoice::First,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Reference {
    /// The skeleton-tree limit law.
    Limit,
    /// The exact law at this n, by enumeration.
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixArg {
    Boundary,
    Reduced,
    Kernel,
}

fn parse_roots(s: &str) -> Result<Roots, String> {
    if s == "all" {
        return Ok(Roots::All);
    }
    match s.parse::<u64>() {
        Ok(m) if m > 0 => Ok(Roots::Random(m)),
        _ => Err(format!("expected a positive count or `all`, got `{s}`")),
    }
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Every hypertree with its homology order.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Draws from the determinantal hypertree measure, one JSON line per trial.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        /// Which draws get an exact determinant (and so a homology order).
        #[arg(long, value_enum, default_value_t = VerifyArg::Always)]
        verify: VerifyArg,
    },
    /// Ball-shape histogram of the skeleton tree.
    Skeleton {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, value_enum, default_value_t = ChoiceArg::Uniform)]
        choice: ChoiceArg,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: usize,
    },
    /// Limit probability of a rooted tree given as a JSON parent array.
    LimitProb {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        tree: PathBuf,
    },
    /// Annealed ball histogram at finite n against a reference law.
    Compare {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Roots per sampled complex: a count, or `all`.
        #[arg(long, default_value = "1", value_parser = parse_roots)]
        roots: Roots,
        #[arg(long, value_enum, default_value_t = SourceArg::Auto)]
        source: SourceArg,
        #[arg(long, value_enum, default_value_t = Reference::Limit)]
        reference: Reference,
        /// Enumerated limit shapes: largest even-level branching.
        #[arg(long, default_value_t = 10)]
        max_children: usize,
        /// Enumerated limit shapes: largest vertex count.
        #[arg(long, default_value_t = 40)]
        max_vertices: usize,
    },
    /// Per-trial fraction of all roots whose ball has a given shape.
    Quenched {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        /// Target shape as a canonical code.
        #[arg(long, conflicts_with_all = ["star", "tree"])]
        target: Option<String>,
        /// Target shape: the depth-2 star with this many arms.
        #[arg(long, conflicts_with = "tree")]
        star: Option<usize>,
        /// Target shape as a JSON parent array.
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = SourceArg::Auto)]
        source: SourceArg,
    },
    /// Sylow-subgroup statistics of the homology beside the Cohen-Lenstra prediction.
    CohenLenstra {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
    /// Compares the enumerated total weight with the closed-form count.
    KalaiCheck {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Writes the boundary matrix, its reduced form, or the kernel as CSV.
    Dump {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum)]
        matrix: MatrixArg,
    },
}

impl RunConfig {
    /// Rejects inconsistent parameters before any work starts.
    pub fn validate(&self) -> CliResult<()> {
        let usage = |msg: String| Err(CliError::Usage(msg));
        let (nk, depth, trials) = match &self.command {
            Command::Enumerate { n, k }
            | Command::KalaiCheck { n, k }
            | Command::Dump { n, k, .. } => (Some((*n, *k)), None, None),
            Command::Sample { n, k, trials, .. } | Command::CohenLenstra { n, k, trials, .. } => {
                (Some((*n, *k)), None, Some(*trials))
            }
            Command::Compare { n, k, depth, trials, .. } | Command::Quenched { n, k, depth, trials, .. } => {
                (Some((*n, *k)), Some(*depth), Some(*trials))
            }
            Command::Skeleton { k, depth, trials, .. } => {
                if *k == 0 {
                    return usage("k must be positive".to_string());
                }
                (None, Some(*depth), Some(*trials))
            }
            Command::LimitProb { k, .. } => {
                if *k == 0 {
                    return usage("k must be positive".to_string());
                }
                (None, None, None)
            }
        };
        if let Some((n, k)) = nk {
            if k == 0 || k >= n {
                return usage(format!("need 1 <= k < n, got n={n}, k={k}"));
            }
        }
        if let Some(d) = depth {
            if d % 2 == 1 {
                return usage(format!("depth must be even, got {d}"));
            }
        }
        if trials == Some(0) {
            return usage("trials must be positive".to_string());
        }
        if let Command::Quenched { target, star, tree, .. } = &self.command {
            if target.is_none() && star.is_none() && tree.is_none() {
                return usage("quenched needs one of --target, --star or --tree".to_string());
            }
        }
        if self.global.threads == Some(0) {
            return usage("threads must be positive".to_string());
        }
        Ok(())
    }
}

fn run(config: &RunConfig) -> CliResult<()> {
    config.validate()?;
    if let Some(t) = config.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {t} threads: {e}")))?;
    }
    commands::dispatch(config)
}

fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
