//! Coverage study for the slope of a heteroscedastic regression.
//!
//! Each replicate draws one dataset and evaluates every requested interval
//! procedure on it. All randomness is addressed by `(seed, n, replicate,
//! procedure)`, so results do not depend on scheduling or thread count, and
//! a procedure run alone sees exactly the datasets it would see inside a
//! full table.

mod dgp;
mod naive;

pub use dgp::{generate_dataset, DgpConfig, NoiseLaw};
pub use naive::naive_model_interval;

use rayon::prelude::*;
use serde::Serialize;

use crate::bayes_sandwich::{
    plugin_posterior_interval, posterior_interval, run_gibbs_from_fit, BPrior, ChainConfig,
    PriorSpec, ThetaPrior,
};
use crate::error::{Error, Result};
use crate::sandwich::{check_level, sandwich_cov, wald_interval, SandwichFit};
use crate::stochastics::{RngStream, SymMatrix};
use crate::working_model::{NormalRegression, RegressionObs, WorkingModel};

/// Coefficient whose intervals are scored.
pub const SLOPE: usize = 1;

const DATA_TAG: u64 = 0;

/// Center of the informative prior.
pub const INFORMATIVE_MEAN: [f64; 2] = [1.0, 1.0];

/// `N(m₀, n (Σ xxᵀ)⁻¹)` with `m₀ = (1, 1)`: prior precision equal to the
/// average information of one observation.
pub fn informative_prior(data: &[RegressionObs]) -> Result<ThetaPrior> {
    informative_prior_at(data, &INFORMATIVE_MEAN)
}

pub fn informative_prior_at(data: &[RegressionObs], mean: &[f64]) -> Result<ThetaPrior> {
    let n = data.len();
    let p = data.first().ok_or(Error::EmptyInput)?.x().len();
    if mean.len() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: mean.len(),
        });
    }
    let mut xtx = SymMatrix::zeros(p);
    for o in data {
        xtx.add_outer(o.x(), 1.0);
    }
    if n < p {
        return Err(Error::SingularDesign { n, p });
    }
    let inv = xtx.inverse().map_err(|_| Error::SingularDesign { n, p })?;
    Ok(ThetaPrior::Normal {
        mean: mean.to_vec(),
        cov: inv.scaled(n as f64),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaPriorKind {
    Informative,
    Uniform,
    Custom { mean: Vec<f64>, cov: SymMatrix },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BPriorKind {
    Jeffreys,
    /// Point mass at the replicate's own `B̂`.
    PlugIn,
    InverseWishart {
        dof: f64,
        scale: SymMatrix,
    },
}

impl ThetaPriorKind {
    pub fn label(&self) -> &'static str {
        match self {
            ThetaPriorKind::Informative => "informative",
            ThetaPriorKind::Uniform => "uniform",
            ThetaPriorKind::Custom { .. } => "custom",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            ThetaPriorKind::Informative => 0,
            ThetaPriorKind::Uniform => 1,
            ThetaPriorKind::Custom { .. } => 2,
        }
    }

    pub fn resolve(&self, data: &[RegressionObs]) -> Result<ThetaPrior> {
        match self {
            ThetaPriorKind::Informative => informative_prior(data),
            ThetaPriorKind::Uniform => Ok(ThetaPrior::ImproperUniform),
            ThetaPriorKind::Custom { mean, cov } => Ok(ThetaPrior::Normal {
                mean: mean.clone(),
                cov: cov.clone(),
            }),
        }
    }
}

impl BPriorKind {
    pub fn label(&self) -> &'static str {
        match self {
            BPriorKind::Jeffreys => "jeffreys",
            BPriorKind::PlugIn => "plugin",
            BPriorKind::InverseWishart { .. } => "inverse-wishart",
        }
    }

    fn tag(&self) -> u64 {
        match self {
            BPriorKind::Jeffreys => 0,
            BPriorKind::PlugIn => 1,
            BPriorKind::InverseWishart { .. } => 2,
        }
    }

    pub fn resolve(&self, fit: &SandwichFit) -> BPrior {
        match self {
            BPriorKind::Jeffreys => BPrior::Jeffreys,
            BPriorKind::PlugIn => BPrior::PointMass(fit.b_hat.clone()),
            BPriorKind::InverseWishart { dof, scale } => BPrior::InverseWishart {
                dof: *dof,
                scale: scale.clone(),
            },
        }
    }
}

/// One interval procedure evaluated per replicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Procedure {
    /// Bayesian sandwich posterior. The uniform × plug-in combination is
    /// evaluated in closed form.
    Bayes {
        theta: ThetaPriorKind,
        b: BPriorKind,
    },
    /// Uniform × plug-in through the Gibbs sampler instead of the closed form.
    PlugInChain,
    /// Plug-in sandwich Wald interval.
    Wald,
    /// Posterior under the misspecified working model itself (unknown σ²).
    Naive { theta: ThetaPriorKind },
}

impl Procedure {
    pub fn bayes(theta: ThetaPriorKind, b: BPriorKind) -> Self {
        Procedure::Bayes { theta, b }
    }

    /// The four prior combinations of the comparison table, in
    /// (informative, uniform) × (Jeffreys, plug-in) order, plus the Wald row.
    pub fn table_default() -> Vec<Procedure> {
        use BPriorKind::*;
        use ThetaPriorKind::*;
        vec![
            Procedure::bayes(Informative, Jeffreys),
            Procedure::bayes(Uniform, Jeffreys),
            Procedure::bayes(Informative, PlugIn),
            Procedure::bayes(Uniform, PlugIn),
            Procedure::Wald,
        ]
    }

    /// `(prior_beta, prior_b)` labels used in reports.
    pub fn labels(&self) -> (&'static str, &'static str) {
        match self {
            Procedure::Bayes { theta, b } => (theta.label(), b.label()),
            Procedure::PlugInChain => ("uniform", "plugin-gibbs"),
            Procedure::Wald => ("wald", "plugin"),
            Procedure::Naive { theta } => (theta.label(), "naive"),
        }
    }

    pub fn name(&self) -> String {
        let (a, b) = self.labels();
        format!("{a}/{b}")
    }

    fn stream_tag(&self) -> u64 {
        match self {
            Procedure::Bayes { theta, b } => 1 + 3 * theta.tag() + b.tag(),
            Procedure::PlugInChain => 100,
            Procedure::Wald => 101,
            Procedure::Naive { theta } => 200 + theta.tag(),
        }
    }

    /// Interval for the slope on one dataset.
    pub fn interval(
        &self,
        rng: &mut RngStream,
        data: &[RegressionObs],
        fit: &SandwichFit,
        s_fn: &dyn Fn(&[f64]) -> Result<SymMatrix>,
        level: f64,
        chain: &ChainConfig,
    ) -> Result<(f64, f64)> {
        match self {
            Procedure::Bayes {
                theta: ThetaPriorKind::Uniform,
                b: BPriorKind::PlugIn,
            } => plugin_posterior_interval(fit, SLOPE, level),
            Procedure::Bayes { theta, b } => {
                let prior = PriorSpec::new(theta.resolve(data)?, b.resolve(fit));
                let chain = run_gibbs_from_fit(rng, fit, s_fn, &prior, chain)?;
                posterior_interval(&chain, SLOPE, level)
            }
            Procedure::PlugInChain => {
                let prior = PriorSpec::new(
                    ThetaPrior::ImproperUniform,
                    BPrior::PointMass(fit.b_hat.clone()),
                );
                let chain = run_gibbs_from_fit(rng, fit, s_fn, &prior, chain)?;
                posterior_interval(&chain, SLOPE, level)
            }
            Procedure::Wald => wald_interval(fit, SLOPE, level),
            Procedure::Naive { theta } => {
                naive_model_interval(rng, data, &theta.resolve(data)?, SLOPE, level, chain)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyCell {
    pub n: usize,
    pub prior_beta: String,
    pub prior_b: String,
    pub coverage: f64,
    pub mean_width: f64,
    pub n_reps: usize,
    pub mc_se_coverage: f64,
}

impl StudyCell {
    fn from_outcomes(n: usize, procedure: &Procedure, outcomes: &[IntervalOutcome]) -> Self {
        let (prior_beta, prior_b) = procedure.labels();
        let reps = outcomes.len();
        let covered = outcomes.iter().filter(|o| o.covered).count();
        // fixed left-to-right reduction
        let width_sum = outcomes.iter().fold(0.0, |acc, o| acc + o.width());
        let coverage = covered as f64 / reps as f64;
        Self {
            n,
            prior_beta: prior_beta.to_string(),
            prior_b: prior_b.to_string(),
            coverage,
            mean_width: width_sum / reps as f64,
            n_reps: reps,
            mc_se_coverage: (coverage * (1.0 - coverage) / reps as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalOutcome {
    pub lower: f64,
    pub upper: f64,
    pub covered: bool,
}

impl IntervalOutcome {
    /// Closed-interval containment of `target`.
    pub fn new(lower: f64, upper: f64, target: f64) -> Self {
        Self {
            lower,
            upper,
            covered: lower <= target && target <= upper,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// One row of the per-replicate trace dump.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub n: usize,
    pub replicate: usize,
    pub cell: String,
    pub lower: f64,
    pub upper: f64,
    pub covered: bool,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub seed: u64,
    pub n_values: Vec<usize>,
    pub n_reps: usize,
    pub level: f64,
    pub chain: ChainConfig,
    pub procedures: Vec<Procedure>,
    pub beta_true: [f64; 2],
    pub noise: NoiseLaw,
    /// Value scored for containment; defaults to the true slope.
    pub target: Option<f64>,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl StudyConfig {
    /// Both sample sizes, the four priors plus Wald, 2,000 replicates.
    pub fn table1(seed: u64) -> Self {
        Self {
            seed,
            n_values: vec![10, 500],
            n_reps: 2_000,
            level: 0.95,
            chain: ChainConfig::default(),
            procedures: Procedure::table_default(),
            beta_true: [1.0, 1.0],
            noise: NoiseLaw::Proportional,
            target: None,
            threads: None,
        }
    }

    fn dgp(&self, n: usize) -> DgpConfig {
        DgpConfig {
            beta_true: self.beta_true,
            n,
            noise: self.noise,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_reps == 0 {
            return Err(Error::InvalidArgument("need at least one replicate".into()));
        }
        if self.procedures.is_empty() {
            return Err(Error::InvalidArgument("no procedures requested".into()));
        }
        check_level(self.level)?;
        for &n in &self.n_values {
            self.dgp(n).validate()?;
        }
        ChainConfig::new(self.chain.n_iter, self.chain.n_burn)?;
        Ok(())
    }
}

/// Per-replicate outcomes for every procedure, indexed `[procedure][replicate]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSizeRun {
    pub n: usize,
    pub outcomes: Vec<Vec<IntervalOutcome>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub runs: Vec<SampleSizeRun>,
}

impl StudyReport {
    /// Cells in `(n, procedure)` order.
    pub fn cells(&self) -> Vec<StudyCell> {
        self.runs
            .iter()
            .flat_map(|run| {
                self.config
                    .procedures
                    .iter()
                    .zip(&run.outcomes)
                    .map(move |(proc, outs)| StudyCell::from_outcomes(run.n, proc, outs))
            })
            .collect()
    }

    pub fn trace(&self) -> Vec<TraceRow> {
        let mut rows = Vec::new();
        for run in &self.runs {
            let reps = run.outcomes.first().map_or(0, Vec::len);
            for r in 0..reps {
                for (proc, outs) in self.config.procedures.iter().zip(&run.outcomes) {
                    let o = outs[r];
                    rows.push(TraceRow {
                        n: run.n,
                        replicate: r,
                        cell: proc.name(),
                        lower: o.lower,
                        upper: o.upper,
                        covered: o.covered,
                        width: o.width(),
                    });
                }
            }
        }
        rows
    }
}

fn replicate_stream(seed: u64, n: usize, replicate: usize) -> RngStream {
    RngStream::new(seed, n as u64).derive(replicate as u64)
}

fn run_replicate(cfg: &StudyConfig, n: usize, replicate: usize) -> Result<Vec<IntervalOutcome>> {
    let wrap = |cell: &str| {
        let cell = cell.to_string();
        move |e: Error| Error::Replicate {
            replicate,
            cell,
            source: Box::new(e),
        }
    };
    let base = replicate_stream(cfg.seed, n, replicate);
    let data = generate_dataset(&mut base.derive(DATA_TAG), &cfg.dgp(n));
    let model = NormalRegression::new(2);
    let fit = sandwich_cov(&model, &data).map_err(wrap("sandwich-fit"))?;
    let s_fn = model.score_outer_fn(&data).map_err(wrap("sandwich-fit"))?;
    let target = cfg.target.unwrap_or(cfg.beta_true[SLOPE]);
    cfg.procedures
        .iter()
        .map(|proc| {
            let mut rng = base.derive(proc.stream_tag());
            let (lo, hi) = proc
                .interval(&mut rng, &data, &fit, &*s_fn, cfg.level, &cfg.chain)
                .map_err(wrap(&proc.name()))?;
            Ok(IntervalOutcome::new(lo, hi, target))
        })
        .collect()
}

fn run_sample_size(cfg: &StudyConfig, n: usize) -> Result<SampleSizeRun> {
    let per_rep: Vec<Result<Vec<IntervalOutcome>>> = (0..cfg.n_reps)
        .into_par_iter()
        .map(|r| run_replicate(cfg, n, r))
        .collect();
    let mut outcomes = vec![Vec::with_capacity(cfg.n_reps); cfg.procedures.len()];
    for rep in per_rep {
        for (slot, o) in outcomes.iter_mut().zip(rep?) {
            slot.push(o);
        }
    }
    Ok(SampleSizeRun { n, outcomes })
}

/// Runs every procedure at every sample size.
pub fn run_table1(cfg: &StudyConfig) -> Result<StudyReport> {
    cfg.validate()?;
    let work = || -> Result<Vec<SampleSizeRun>> {
        cfg.n_values
            .iter()
            .map(|&n| run_sample_size(cfg, n))
            .collect()
    };
    let runs = match cfg.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    Ok(StudyReport {
        config: cfg.clone(),
        runs,
    })
}

/// A single procedure at a single sample size.
pub fn run_cell(
    seed: u64,
    dgp: &DgpConfig,
    procedure: &Procedure,
    n_reps: usize,
    level: f64,
    chain: &ChainConfig,
) -> Result<StudyCell> {
    let cfg = StudyConfig {
        seed,
        n_values: vec![dgp.n],
        n_reps,
        level,
        chain: *chain,
        procedures: vec![procedure.clone()],
        beta_true: dgp.beta_true,
        noise: dgp.noise,
        target: None,
        threads: None,
    };
    Ok(run_table1(&cfg)?.cells().remove(0))
}
