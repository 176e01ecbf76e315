use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use collisionless::impact::GridSpec;
use collisionless::model::N2Family;
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[serde(rename_all = "camelCase")]
#[command(
    name = "collisionless",
    version,
    about = "Collisionless periodic trajectories of linear mechanical systems with one ground contact",
    after_help = "Exit codes: 0 success, 1 error, 2 no solution can exist (lambda'_{N-1} <= 0), \
                  3 no converged root, 4 validation failed, 5 reproduction mismatch."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Global {
    /// Model or spectra JSON file; takes precedence over --model.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory receiving artifacts and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for randomized studies.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Single tolerance replacing every default validation threshold.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelArgs {
    /// Built-in model: armed-biped, hopper, juggler, rimless or rocker.
    #[arg(long, default_value = "armed-biped")]
    pub model: String,
    /// Leg half-angle of the armed biped (sets the scale of the solution).
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    /// Unstable rate of the rimless and rocker families.
    #[arg(long, default_value_t = 1.0)]
    pub nu1: f64,
    /// Unconstrained frequency of the two-degree-of-freedom families.
    #[arg(long, default_value_t = 2.0)]
    pub omega2: f64,
    /// Constrained frequency of the two-degree-of-freedom families.
    #[arg(long, default_value_t = 1.0)]
    pub omega1p: f64,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GridArgs {
    /// Upper end of the o_N axis.
    #[arg(long, default_value_t = 4.0 * PI)]
    pub o_max: f64,
    /// Upper end of the o'_{N-1} axis.
    #[arg(long, default_value_t = 2.0 * PI)]
    pub op_max: f64,
    /// Grid step in phase units.
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
}

impl GridArgs {
    pub fn spec(&self) -> GridSpec {
        GridSpec::positive(self.o_max, self.op_max, self.step)
    }
}

/// Which refined roots a command reports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pick {
    LowestRow,
    All,
    Nearest { o_n: f64, o_prime: f64 },
}

impl FromStr for Pick {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lowest-row" => Ok(Pick::LowestRow),
            "all" => Ok(Pick::All),
            _ => {
                let rest = s
                    .strip_prefix("nearest=")
                    .ok_or_else(|| format!("expected lowest-row, all or nearest=O_N,O_PRIME; got `{s}`"))?;
                let rest = rest.trim_start_matches('(').trim_end_matches(')');
                let (a, b) = rest.split_once(',').ok_or("nearest needs two comma-separated phases")?;
                let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("bad phase `{v}`: {e}"));
                Ok(Pick::Nearest {
                    o_n: parse(a)?,
                    o_prime: parse(b)?,
                })
            }
        }
    }
}

impl fmt::Display for Pick {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pick::LowestRow => write!(f, "lowest-row"),
            Pick::All => write!(f, "all"),
            Pick::Nearest { o_n, o_prime } => write!(f, "nearest={o_n},{o_prime}"),
        }
    }
}

/// Inclusive range of branch indices, written `a..b` or `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BranchRange {
    pub start: usize,
    pub end: usize,
}

impl BranchRange {
    pub fn iter(self) -> std::ops::RangeInclusive<usize> {
        self.start..=self.end
    }
}

impl FromStr for BranchRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad branch index `{v}`: {e}"))
        };
        let (start, end) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if start == 0 || end < start {
            return Err(format!("branch range `{s}` must satisfy 1 <= start <= end"));
        }
        Ok(BranchRange { start, end })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotFormat {
    Csv,
    Svg,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryFormat {
    Csv,
    Svg,
    Json,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReproduceTarget {
    #[value(name = "appendix-e")]
    #[serde(rename = "appendix-e")]
    ArmedBipedReference,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// List the built-in models.
    ListModels,
    /// Find impact-equation roots and solve for the mode weights.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// lowest-row, all, or nearest=O_N,O_PRIME.
        #[arg(long, default_value = "lowest-row")]
        pick: Pick,
        /// Samples per phase used to validate each root.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Scan the impact-equation determinants over a phase grid.
    Contour {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Overlay large-tau asymptotic points for branches a..b.
        #[arg(long)]
        asymptotes: Option<BranchRange>,
        #[arg(long, value_enum, default_value = "both")]
        format: PlotFormat,
    },
    /// Solve, then sample and export the trajectory from P to P'.
    Trajectory {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// lowest-row or nearest=O_N,O_PRIME.
        #[arg(long, default_value = "lowest-row")]
        pick: Pick,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, value_enum, default_value = "all")]
        format: TrajectoryFormat,
    },
    /// Check a trajectory JSON file against its model.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        /// Trajectory written by the trajectory command.
        #[arg(long)]
        trajectory: PathBuf,
    },
    /// Closed-form branches of the two-degree-of-freedom families.
    Analytic2 {
        #[arg(long)]
        family: N2Family,
        #[arg(long, default_value_t = 1.0)]
        nu1: f64,
        #[arg(long, default_value_t = 2.0)]
        omega2: f64,
        #[arg(long, default_value_t = 1.0)]
        omega1p: f64,
        /// Branch indices, e.g. 1..5.
        #[arg(long = "n", default_value = "1..5")]
        branches: BranchRange,
    },
    /// Critical-region analysis, the c0 sampling study, or a near-critical sample.
    Critical {
        #[command(flatten)]
        model: ModelArgs,
        /// Run the randomized c0 positivity study instead of analysing a model.
        #[arg(long)]
        study_c0: bool,
        /// Write a random near-critical spectrum (lambda'_{N-1} = --epsilon) to spectra.json.
        #[arg(long, conflicts_with = "study_c0")]
        sample_spectra: bool,
        /// Degrees of freedom for the study and the sample.
        #[arg(long = "n", default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        /// Search window for critical roots, in units of o_N.
        #[arg(long, default_value_t = 4.0 * PI)]
        o_max: f64,
        /// Branches of the large-tau grid.
        #[arg(long, default_value = "3..6")]
        branches: BranchRange,
    },
    /// Recompute the reference armed-biped values and diff them.
    Reproduce {
        #[arg(long, value_enum, default_value = "appendix-e")]
        target: ReproduceTarget,
        #[arg(long, hide = true, default_value_t = 0.0)]
        perturb: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ListModels => "list-models",
            Command::Solve { .. } => "solve",
            Command::Contour { .. } => "contour",
            Command::Trajectory { .. } => "trajectory",
            Command::Validate { .. } => "validate",
            Command::Analytic2 { .. } => "analytic2",
            Command::Critical { .. } => "critical",
            Command::Reproduce { .. } => "reproduce",
        }
    }
}
