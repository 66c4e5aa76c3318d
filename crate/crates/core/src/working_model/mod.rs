//! Working models: parametric families used to estimate a pseudo-true
//! parameter without assuming they contain the data-generating law.
//!
//! Inference code only ever touches a model through [`WorkingModel`]:
//! per-observation score and Hessian, the MLE, and the score sum of
//! squares `S(θ) = Σ l̇ l̇ᵀ`.

mod expfam;
mod normal_mean;
mod regression;

pub use expfam::{expfam_pseudo_true, kl_divergence, kl_oracle_pseudo_true, FiniteExpFamily};
pub use normal_mean::NormalMean;
pub use regression::{
    regression_fit_mle, regression_hessian, regression_score, NormalRegression, RegressionObs,
};

use crate::error::{Error, Result};
use crate::stochastics::SymMatrix;

/// `θ ↦ S(θ)` over a fixed dataset.
pub type ScoreOuterFn<'a> = Box<dyn Fn(&[f64]) -> Result<SymMatrix> + Send + Sync + 'a>;

pub trait WorkingModel: Sync {
    type Obs: Sync;

    /// Parameter dimension `p`.
    fn dim(&self) -> usize;

    /// Per-observation log-likelihood `l(θ : x)`.
    fn log_lik(&self, theta: &[f64], obs: &Self::Obs) -> Result<f64>;

    /// `l̇(θ : x)`, the exact gradient of [`WorkingModel::log_lik`].
    fn score(&self, theta: &[f64], obs: &Self::Obs) -> Result<Vec<f64>>;

    /// `l̈(θ : x)`.
    fn hessian(&self, theta: &[f64], obs: &Self::Obs) -> Result<SymMatrix>;

    fn fit_mle(&self, data: &[Self::Obs]) -> Result<Vec<f64>>;

    /// Returns `θ ↦ Σᵢ l̇(θ:xᵢ) l̇(θ:xᵢ)ᵀ` for `data`. The default sums
    /// outer products directly; models with polynomial scores may
    /// precompute moments so each evaluation is independent of `n`.
    fn score_outer_fn<'a>(&'a self, data: &'a [Self::Obs]) -> Result<ScoreOuterFn<'a>> {
        Ok(Box::new(move |theta: &[f64]| {
            let mut s = SymMatrix::zeros(self.dim());
            for obs in data {
                s.add_outer(&self.score(theta, obs)?, 1.0);
            }
            Ok(s)
        }))
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
