//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mint_core::WeightMode;
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "mint", version, about = "Mutual-information tests of independence and goodness of fit")]
pub struct Cli {
    /// Worker threads; overrides MINT_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Seed for all randomness; drawn from system entropy when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Result file; results go to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Where to write the run manifest. Defaults to `<out>.manifest.json`,
    /// or stderr when there is no output file.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Estimate the differential entropy of selected columns.
    Entropy(EntropyArgs),
    /// Test independence of column blocks.
    Test(TestArgs),
    /// Goodness-of-fit test for a linear model.
    Regression(RegressionArgs),
    /// Monte Carlo rejection rates over a grid of simulated scenarios.
    Power(PowerArgs),
    /// Write a simulated sample as CSV.
    Gen(GenArgs),
    /// Repeat a run recorded in a manifest.
    Rerun(RerunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Entropy(_) => "entropy",
            Command::Test(_) => "test",
            Command::Regression(_) => "regression",
            Command::Power(_) => "power",
            Command::Gen(_) => "gen",
            Command::Rerun(_) => "rerun",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weights {
    /// Bias-cancelling weights for d ≥ 4, plain estimator below.
    Auto,
    Unweighted,
}

impl From<Weights> for WeightMode {
    fn from(w: Weights) -> Self {
        match w {
            Weights::Auto => WeightMode::AutoSolve,
            Weights::Unweighted => WeightMode::Unweighted,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EntropyArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Columns by name or 1-based index; all columns when absent.
    #[arg(long)]
    pub columns: Option<String>,
    /// Neighbour order; defaults to max(3, ⌊n^0.35⌋).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value_t = Weights::Auto)]
    pub weights: Weights,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestVariant {
    Known,
    Unknown,
    Auto,
    Av,
    Multi,
}

impl TestVariant {
    pub fn name(&self) -> &'static str {
        match self {
            TestVariant::Known => "known",
            TestVariant::Unknown => "unknown",
            TestVariant::Auto => "auto",
            TestVariant::Av => "av",
            TestVariant::Multi => "multi",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TestArgs {
    #[arg(value_enum)]
    pub variant: TestVariant,
    #[arg(long)]
    pub input: PathBuf,
    /// X-block columns.
    #[arg(long)]
    pub x_cols: Option<String>,
    /// Y-block columns.
    #[arg(long)]
    pub y_cols: Option<String>,
    /// Blocks for `multi`, separated by `;`, e.g. `a,b;c;d`.
    #[arg(long)]
    pub blocks: Option<String>,
    /// Order of the joint estimator.
    #[arg(long)]
    pub k: Option<usize>,
    /// Order of the Y estimator (known marginal only).
    #[arg(long)]
    pub k_y: Option<usize>,
    /// Orders for `auto` and `av`, e.g. `1-20` or `1,3,5`.
    #[arg(long)]
    pub k_grid: Option<String>,
    /// Permutation pairs used by `auto` to select k.
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    /// Number of null resamples.
    #[arg(long, default_value_t = 999)]
    pub b: usize,
    #[arg(long, default_value_t = 0.05)]
    pub q: f64,
    /// Defaults to `auto`, or `unweighted` for `auto` and `av`.
    #[arg(long, value_enum)]
    pub weights: Option<Weights>,
    /// Known Y-marginal, e.g. `normal(0,1)` or `uniform(0,1);normal(2,4)` (mean, variance).
    #[arg(long)]
    pub marginal: Option<String>,
    /// CSV of draws from the known Y-marginal; pseudo-sample b uses rows (b−1)n+1 to bn.
    #[arg(long)]
    pub marginal_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegressionVariant {
    Full,
    Split,
    Partitioned,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RegressionArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Response column.
    #[arg(long)]
    pub response: String,
    /// Covariate columns.
    #[arg(long)]
    pub design: String,
    /// Covariates kept in the entropy terms of the partitioned test.
    #[arg(long)]
    pub star_cols: Option<String>,
    #[arg(long, value_enum, default_value_t = RegressionVariant::Full)]
    pub variant: RegressionVariant,
    /// Order of the residual entropy estimator.
    #[arg(long, default_value_t = 6)]
    pub k_eta: usize,
    /// Order of the joint estimator.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 999)]
    pub b: usize,
    #[arg(long, default_value_t = 0.05)]
    pub q: f64,
    /// Error law under the null: `normal`, `t(ν)` or `logistic`.
    #[arg(long, default_value = "normal")]
    pub noise: String,
    /// Fit an intercept in addition to the covariates.
    #[arg(long)]
    pub intercept: bool,
    #[arg(long, value_enum, default_value_t = Weights::Auto)]
    pub weights: Weights,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerVariant {
    Known,
    Unknown,
    Auto,
    Av,
}

impl PowerVariant {
    pub fn name(&self) -> &'static str {
        match self {
            PowerVariant::Known => "known",
            PowerVariant::Unknown => "unknown",
            PowerVariant::Auto => "auto",
            PowerVariant::Av => "av",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PowerArgs {
    /// sinusoidal, circular, multiplicative, gaussian-null or gaussian-corr.
    #[arg(long)]
    pub setting: String,
    /// Parameter values, e.g. `1-6` or `0,0.5,1`.
    #[arg(long)]
    pub params: Option<String>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "unknown")]
    pub variants: Vec<PowerVariant>,
    /// Orders for `known` and `unknown`, one row each; defaults to max(3, ⌊n^0.35⌋).
    #[arg(long)]
    pub ks: Option<String>,
    /// Grid for `auto` and `av`.
    #[arg(long, default_value = "1-20")]
    pub k_grid: String,
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long, default_value_t = 99)]
    pub b: usize,
    #[arg(long, default_value_t = 0.05)]
    pub q: f64,
    /// Append an independent U(0,1) coordinate to X and to Y.
    #[arg(long)]
    pub multivariate: bool,
    #[arg(long, value_enum)]
    pub weights: Option<Weights>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    /// Scenario, e.g. `sinusoidal(2)`, `multiplicative(0.5)` or `gaussian-null`.
    #[arg(long)]
    pub setting: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub multivariate: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RerunArgs {
    /// Manifest written by an earlier run.
    pub from: PathBuf,
}

/// Parses `1-20`, `1,3,5` or a mix such as `1-3;7`.
pub fn parse_k_list(spec: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::args(format!("cannot parse k list '{spec}'"));
    let mut ks = Vec::new();
    for item in spec.split([',', ';']).map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once('-') {
            Some((lo, hi)) => {
                let lo: usize = lo.trim().parse().map_err(|_| bad())?;
                let hi: usize = hi.trim().parse().map_err(|_| bad())?;
                if lo > hi {
                    return Err(bad());
                }
                ks.extend(lo..=hi);
            }
            None => ks.push(item.parse().map_err(|_| bad())?),
        }
    }
    if ks.is_empty() {
        return Err(bad());
    }
    Ok(ks)
}

/// Parses a list of real parameters; integer ranges `a-b` are expanded.
pub fn parse_params(spec: &str) -> CliResult<Vec<String>> {
    let mut out = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once('-') {
            Some((lo, hi)) if !lo.is_empty() => {
                let ks = parse_k_list(&format!("{lo}-{hi}"))?;
                out.extend(ks.iter().map(usize::to_string));
            }
            _ => {
                item.parse::<f64>()
                    .map_err(|_| CliError::args(format!("cannot parse parameter '{item}'")))?;
                out.push(item.to_string());
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::args("empty parameter list"));
    }
    Ok(out)
}
