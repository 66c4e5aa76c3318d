//! Bayesian sandwich posterior.
//!
//! The likelihood treats the MLE and the score sum of squares as the data:
//!
//! ```text
//! p(θ̂, S(θ*) | θ*, B) ≈ N(θ̂ | θ*, n A⁻¹ B A⁻¹) · Wishart(S(θ*) | n, B)
//! ```
//!
//! With a normal prior on `θ*` and an inverse-Wishart prior on `B` both full
//! conditionals are conjugate, giving a two-block Gibbs sampler:
//!
//! ```text
//! θ* | B  ~ N(m₁, V₁),       V₁⁻¹ = V₀⁻¹ + A B⁻¹ A / n
//!                            m₁   = V₁ (V₀⁻¹ m₀ + A B⁻¹ A θ̂ / n)
//! B⁻¹ | θ* ~ Wishart(ν₁, S₁⁻¹), ν₁ = ν₀ + n + 1
//!                            S₁   = S₀ + S(θ*) + A (θ* − θ̂)(θ* − θ̂)ᵀ A / n
//! ```
//!
//! `A` only ever appears as `A X A`, so its sign convention is immaterial.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sandwich::{check_level, invert_bread, sandwich_cov, wald_interval, SandwichFit};
use crate::stochastics::{
    cholesky, quantile_sorted, sample_mvnorm, sample_wishart, RngStream, SymMatrix,
};
use crate::working_model::WorkingModel;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ThetaPrior {
    ImproperUniform,
    Normal { mean: Vec<f64>, cov: SymMatrix },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum BPrior {
    /// `π(B) ∝ |B|^{−(p+1)/2}`; the `ν₀ = 0, S₀ = 0` inverse-Wishart.
    Jeffreys,
    /// Inverse-Wishart with `B⁻¹ ~ Wishart(ν₀, S₀⁻¹)`.
    InverseWishart { dof: f64, scale: SymMatrix },
    /// `B` fixed, typically at the plug-in `B̂`.
    PointMass(SymMatrix),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorSpec {
    pub theta: ThetaPrior,
    pub b: BPrior,
}

impl PriorSpec {
    pub fn new(theta: ThetaPrior, b: BPrior) -> Self {
        Self { theta, b }
    }

    /// Checks dimensions and definiteness against parameter dimension `p`.
    pub fn validate(&self, p: usize) -> Result<()> {
        let dim = |got: usize| {
            if got == p {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected: p, got })
            }
        };
        if let ThetaPrior::Normal { mean, cov } = &self.theta {
            dim(mean.len())?;
            dim(cov.dim())?;
            cholesky(cov)?;
        }
        match &self.b {
            BPrior::Jeffreys => {}
            BPrior::InverseWishart { dof, scale } => {
                dim(scale.dim())?;
                if !(*dof >= 0.0) {
                    return Err(Error::InvalidArgument(format!("prior dof {dof} negative")));
                }
                // S₀ only needs to be positive-semidefinite
                let tol = 1e-12 * scale.norm_inf();
                if scale.diag().iter().any(|&d| d < -tol) {
                    return Err(Error::InvalidArgument(
                        "S0 is not positive-semidefinite".into(),
                    ));
                }
            }
            BPrior::PointMass(b) => {
                dim(b.dim())?;
                cholesky(b)?;
            }
        }
        Ok(())
    }

    /// `(ν₀, S₀)` of the Wishart block, `None` for a point mass.
    fn wishart_hyper(&self, p: usize) -> Option<(f64, SymMatrix)> {
        match &self.b {
            BPrior::Jeffreys => Some((0.0, SymMatrix::zeros(p))),
            BPrior::InverseWishart { dof, scale } => Some((*dof, scale.clone())),
            BPrior::PointMass(_) => None,
        }
    }
}

/// Mean and covariance `(m₁, V₁)` of `θ* | B`.
pub fn theta_conditional(
    prior: &PriorSpec,
    b_current: &SymMatrix,
    a: &SymMatrix,
    theta_hat: &[f64],
    n: usize,
) -> Result<(Vec<f64>, SymMatrix)> {
    let b_inv = b_current.inverse()?;
    let lik_prec = b_inv.sandwiched_by(a).scaled(1.0 / n as f64);
    match &prior.theta {
        ThetaPrior::ImproperUniform => Ok((theta_hat.to_vec(), lik_prec.inverse()?)),
        ThetaPrior::Normal { mean, cov } => {
            let prior_prec = cov.inverse()?;
            let prec = prior_prec.add(&lik_prec);
            let rhs: Vec<f64> = prior_prec
                .mul_vec(mean)
                .iter()
                .zip(lik_prec.mul_vec(theta_hat))
                .map(|(u, v)| u + v)
                .collect();
            let chol = cholesky(&prec)?;
            Ok((chol.solve(&rhs), chol.inverse()))
        }
    }
}

/// Gibbs step 1: one draw of `θ*` given the current `B`.
pub fn gibbs_step_theta(
    rng: &mut RngStream,
    prior: &PriorSpec,
    b_current: &SymMatrix,
    a: &SymMatrix,
    theta_hat: &[f64],
    n: usize,
) -> Result<Vec<f64>> {
    let (m1, v1) = theta_conditional(prior, b_current, a, theta_hat, n)?;
    sample_mvnorm(rng, &m1, &v1)
}

/// `(ν₁, S₁)` of `B⁻¹ | θ*`, `None` under a point-mass prior.
pub fn b_conditional(
    prior: &PriorSpec,
    theta_current: &[f64],
    a: &SymMatrix,
    theta_hat: &[f64],
    s_fn: &dyn Fn(&[f64]) -> Result<SymMatrix>,
    n: usize,
) -> Result<Option<(f64, SymMatrix)>> {
    let Some((dof0, s0)) = prior.wishart_hyper(a.dim()) else {
        return Ok(None);
    };
    let delta: Vec<f64> = theta_current
        .iter()
        .zip(theta_hat)
        .map(|(t, h)| t - h)
        .collect();
    let a_delta = a.mul_vec(&delta);
    let mut s1 = s0;
    s1.add_assign(&s_fn(theta_current)?);
    s1.add_outer(&a_delta, 1.0 / n as f64);
    Ok(Some((dof0 + n as f64 + 1.0, s1)))
}

/// Gibbs step 2: one draw of `B` given `θ*`. A point-mass prior returns its
/// atom without touching `rng`.
pub fn gibbs_step_b(
    rng: &mut RngStream,
    prior: &PriorSpec,
    theta_current: &[f64],
    a: &SymMatrix,
    theta_hat: &[f64],
    s_fn: &dyn Fn(&[f64]) -> Result<SymMatrix>,
    n: usize,
) -> Result<SymMatrix> {
    if let BPrior::PointMass(b) = &prior.b {
        return Ok(b.clone());
    }
    let (dof, s1) = b_conditional(prior, theta_current, a, theta_hat, s_fn, n)?
        .expect("non-point-mass prior has Wishart hyperparameters");
    if dof < a.dim() as f64 {
        return Err(Error::DofTooSmall { dof, dim: a.dim() });
    }
    let precision = sample_wishart(rng, dof, &s1.inverse()?)?;
    precision.inverse()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainConfig {
    pub n_iter: usize,
    pub n_burn: usize,
    pub keep_b: bool,
}

impl ChainConfig {
    pub fn new(n_iter: usize, n_burn: usize) -> Result<Self> {
        if n_iter <= n_burn {
            return Err(Error::InvalidArgument(format!(
                "need more iterations ({n_iter}) than burn-in ({n_burn})"
            )));
        }
        Ok(Self {
            n_iter,
            n_burn,
            keep_b: false,
        })
    }

    pub fn keep_b(mut self, keep: bool) -> Self {
        self.keep_b = keep;
        self
    }
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n_iter: 5_500,
            n_burn: 500,
            keep_b: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsChain {
    pub theta_draws: Vec<Vec<f64>>,
    /// Empty unless the chain was run with `keep_b`.
    pub b_draws: Vec<SymMatrix>,
    pub n_burn: usize,
    pub n_keep: usize,
}

impl GibbsChain {
    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.theta_draws.iter().map(|t| t[j]).collect()
    }

    pub fn mean(&self) -> Vec<f64> {
        let p = self.theta_draws.first().map_or(0, Vec::len);
        let mut m = vec![0.0; p];
        for t in &self.theta_draws {
            m.iter_mut().zip(t).for_each(|(a, b)| *a += b);
        }
        let k = self.n_keep as f64;
        m.iter_mut().for_each(|a| *a /= k);
        m
    }

    /// Sample covariance with divisor `n_keep − 1`.
    pub fn covariance(&self) -> SymMatrix {
        let mean = self.mean();
        let mut c = SymMatrix::zeros(mean.len());
        let mut centered = vec![0.0; mean.len()];
        for t in &self.theta_draws {
            centered
                .iter_mut()
                .zip(t.iter().zip(&mean))
                .for_each(|(c, (a, m))| *c = a - m);
            c.add_outer(&centered, 1.0);
        }
        c.scaled(1.0 / (self.n_keep as f64 - 1.0).max(1.0))
    }
}

/// Fits the sandwich pieces and runs the chain.
pub fn run_gibbs<M: WorkingModel>(
    rng: &mut RngStream,
    model: &M,
    data: &[M::Obs],
    prior: &PriorSpec,
    cfg: &ChainConfig,
) -> Result<GibbsChain> {
    let fit = sandwich_cov(model, data)?;
    let s_fn = model.score_outer_fn(data)?;
    run_gibbs_from_fit(rng, &fit, &*s_fn, prior, cfg)
}

/// Runs the chain from an existing [`SandwichFit`]. `A` stays at its value
/// at `θ̂`; the chain starts from `(θ̂, B̂)` (or the point-mass atom).
pub fn run_gibbs_from_fit(
    rng: &mut RngStream,
    fit: &SandwichFit,
    s_fn: &dyn Fn(&[f64]) -> Result<SymMatrix>,
    prior: &PriorSpec,
    cfg: &ChainConfig,
) -> Result<GibbsChain> {
    if cfg.n_iter <= cfg.n_burn {
        return Err(Error::InvalidArgument(format!(
            "need more iterations ({}) than burn-in ({})",
            cfg.n_iter, cfg.n_burn
        )));
    }
    let p = fit.dim();
    prior.validate(p)?;
    // a singular bread has no sandwich likelihood
    invert_bread(&fit.a, fit.n)?;

    let n_keep = cfg.n_iter - cfg.n_burn;
    let mut theta_draws = Vec::with_capacity(n_keep);
    let mut b_draws = Vec::with_capacity(if cfg.keep_b { n_keep } else { 0 });
    let mut b = match &prior.b {
        BPrior::PointMass(atom) => atom.clone(),
        _ => fit.b_hat.clone(),
    };
    let at = |iteration: usize| {
        move |e: Error| Error::Gibbs {
            iteration,
            source: Box::new(e),
        }
    };
    for s in 0..cfg.n_iter {
        let theta =
            gibbs_step_theta(rng, prior, &b, &fit.a, &fit.theta_hat, fit.n).map_err(at(s))?;
        b = gibbs_step_b(rng, prior, &theta, &fit.a, &fit.theta_hat, s_fn, fit.n).map_err(at(s))?;
        if s >= cfg.n_burn {
            theta_draws.push(theta);
            if cfg.keep_b {
                b_draws.push(b.clone());
            }
        }
    }
    Ok(GibbsChain {
        theta_draws,
        b_draws,
        n_burn: cfg.n_burn,
        n_keep,
    })
}

/// Equal-tailed interval from the retained draws of coordinate `coord`.
pub fn posterior_interval(chain: &GibbsChain, coord: usize, level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    if chain.theta_draws.is_empty() {
        return Err(Error::EmptyInput);
    }
    if chain.theta_draws.iter().any(|t| t.len() <= coord) {
        return Err(Error::DimensionMismatch {
            expected: chain.theta_draws[0].len(),
            got: coord,
        });
    }
    let mut draws = chain.coordinate(coord);
    draws.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - level);
    Ok((
        quantile_sorted(&draws, tail)?,
        quantile_sorted(&draws, 1.0 - tail)?,
    ))
}

/// Exact interval of the uniform × point-mass(`B̂`) posterior,
/// `N(θ̂, n A⁻¹ B̂ A⁻¹)`; pointwise equal to the Wald interval.
pub fn plugin_posterior_interval(
    fit: &SandwichFit,
    coord: usize,
    level: f64,
) -> Result<(f64, f64)> {
    wald_interval(fit, coord, level)
}
