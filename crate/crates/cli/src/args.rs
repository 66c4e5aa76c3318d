use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Deserialize;

use sandwichpost::bayes_sandwich::ChainConfig;
use sandwichpost::stochastics::SymMatrix;
use sandwichpost::study::{BPriorKind, ThetaPriorKind};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Sandwich and Bayesian sandwich inference on one CSV dataset.
    Fit,
    /// The coverage study on simulated heteroscedastic data.
    Study,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Markdown,
    Csv,
    Json,
}

/// Bayesian sandwich inference for misspecified regression models.
#[derive(Debug, Parser)]
#[command(name = "sandwichpost", version)]
pub struct Args {
    /// `fit` or `study`.
    #[arg(value_enum)]
    pub command_pos: Option<Command>,

    /// Same as the positional command.
    #[arg(long = "command", value_enum)]
    pub command_flag: Option<Command>,

    /// Sample sizes for `study`, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "10,500")]
    pub n: Vec<usize>,

    /// Replicates per sample size.
    #[arg(long, default_value_t = 2_000)]
    pub reps: usize,

    /// Interval credibility / confidence level.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,

    #[arg(long, env = "SANDWICHPOST_SEED", default_value_t = 1)]
    pub seed: u64,

    /// Total Gibbs iterations per chain, burn-in included.
    #[arg(long, default_value_t = 5_500)]
    pub gibbs_iters: usize,

    #[arg(long, default_value_t = 500)]
    pub burn_in: usize,

    /// `uniform`, `informative`, or `custom:FILE.json` with `{"mean": [..], "cov": [[..], ..]}`.
    /// Defaults to both standard priors for `study` and to `uniform` for `fit`.
    #[arg(long)]
    pub prior_beta: Option<String>,

    /// `jeffreys`, `plugin`, or `inverse-wishart:FILE.json` with `{"dof": .., "scale": [[..], ..]}`.
    /// Defaults to both standard priors for `study` and to `jeffreys` for `fit`.
    #[arg(long)]
    pub prior_b: Option<String>,

    /// CSV dataset for `fit`, header `y,x`.
    #[arg(long)]
    pub input: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = OutputFormat::Markdown)]
    pub output_format: OutputFormat,

    /// Write the report in `--output-format` to this file. For `study` the
    /// Markdown table is still printed to stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,

    /// Per-replicate interval dump for `study` (CSV).
    #[arg(long)]
    pub trace: Option<PathBuf>,

    /// Also run the uncorrected working-model posterior in `study`.
    #[arg(long)]
    pub with_naive: bool,
}

impl Args {
    pub fn command(&self) -> Result<Command, CliError> {
        match (self.command_pos, self.command_flag) {
            (Some(a), Some(b)) if a != b => {
                Err(CliError::usage("positional command and --command disagree"))
            }
            (Some(c), _) | (None, Some(c)) => Ok(c),
            (None, None) => Err(CliError::usage(
                "missing command: expected `fit` or `study`",
            )),
        }
    }

    /// Checks the numeric invariants shared by both commands.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.reps == 0 {
            return Err(CliError::usage("--reps must be at least 1"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(CliError::usage(format!(
                "--level must lie in (0, 1), got {}",
                self.level
            )));
        }
        if self.n.is_empty() {
            return Err(CliError::usage("--n needs at least one sample size"));
        }
        if self.threads == Some(0) {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        self.chain().map(|_| ())
    }

    pub fn chain(&self) -> Result<ChainConfig, CliError> {
        ChainConfig::new(self.gibbs_iters, self.burn_in).map_err(|_| {
            CliError::usage(format!(
                "--gibbs-iters ({}) must exceed --burn-in ({})",
                self.gibbs_iters, self.burn_in
            ))
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NormalPriorFile {
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WishartPriorFile {
    dof: f64,
    scale: Vec<Vec<f64>>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<SymMatrix, CliError> {
    SymMatrix::from_rows(rows).map_err(|e| CliError::parse(format!("{what}: {e}")))
}

pub fn parse_prior_beta(spec: &str) -> Result<ThetaPriorKind, CliError> {
    match spec {
        "uniform" => Ok(ThetaPriorKind::Uniform),
        "informative" => Ok(ThetaPriorKind::Informative),
        _ => match spec.strip_prefix("custom:") {
            Some(path) => {
                let f: NormalPriorFile = read_json(Path::new(path))?;
                Ok(ThetaPriorKind::Custom {
                    mean: f.mean,
                    cov: matrix(&f.cov, "prior covariance")?,
                })
            }
            None => Err(CliError::usage(format!(
                "unknown --prior-beta `{spec}`: expected uniform, informative or custom:FILE"
            ))),
        },
    }
}

pub fn parse_prior_b(spec: &str) -> Result<BPriorKind, CliError> {
    match spec {
        "jeffreys" => Ok(BPriorKind::Jeffreys),
        "plugin" | "plug-in" => Ok(BPriorKind::PlugIn),
        _ => match spec.strip_prefix("inverse-wishart:") {
            Some(path) => {
                let f: WishartPriorFile = read_json(Path::new(path))?;
                Ok(BPriorKind::InverseWishart {
                    dof: f.dof,
                    scale: matrix(&f.scale, "inverse-Wishart scale")?,
                })
            }
            None => Err(CliError::usage(format!(
                "unknown --prior-b `{spec}`: expected jeffreys, plugin or inverse-wishart:FILE"
            ))),
        },
    }
}
