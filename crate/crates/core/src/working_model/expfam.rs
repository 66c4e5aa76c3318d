//! Exponential families on a finite support,
//! `p(x|θ) = h(x) exp{θᵀg(x) − c(θ)}`.
//!
//! The pseudo-true parameter under any population `p₀` on the support
//! matches moments, `E[g | θ*] = E₀[g]`. [`expfam_pseudo_true`] finds it by
//! Newton's method; [`kl_oracle_pseudo_true`] finds it by brute force over a
//! grid, straight from the KL definition.

use super::{check_dim, WorkingModel};
use crate::error::{Error, Result};
use crate::stochastics::{cholesky, dot, SymMatrix};

const MAX_NEWTON_ITERS: usize = 100;
const STEP_NORM_CAP: f64 = 1e3;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteExpFamily {
    support: Vec<f64>,
    stats: Vec<Vec<f64>>,
    log_base: Vec<f64>,
    dim: usize,
}

impl FiniteExpFamily {
    /// `g` maps a support point to its sufficient statistics, `h` to its
    /// (strictly positive) base weight.
    pub fn new(
        support: Vec<f64>,
        g: impl Fn(f64) -> Vec<f64>,
        h: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if support.len() < 2 {
            return Err(Error::InvalidArgument(
                "support needs at least two points".into(),
            ));
        }
        let stats: Vec<Vec<f64>> = support.iter().map(|&x| g(x)).collect();
        let dim = stats[0].len();
        if dim == 0 {
            return Err(Error::InvalidArgument("no sufficient statistics".into()));
        }
        for s in &stats {
            check_dim(dim, s.len())?;
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(
                    "non-finite sufficient statistic".into(),
                ));
            }
        }
        let mut log_base = Vec::with_capacity(support.len());
        for &x in &support {
            let w = h(x);
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "base weight h({x}) = {w} not positive"
                )));
            }
            log_base.push(w.ln());
        }
        let fam = Self {
            support,
            stats,
            log_base,
            dim,
        };
        // identifiability: g must be affinely independent on the support
        if cholesky(&fam.stat_cov(&vec![0.0; dim])).is_err() {
            return Err(Error::InvalidArgument(
                "sufficient statistics are affinely dependent on the support".into(),
            ));
        }
        Ok(fam)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    /// `g(x)` at support index `i`.
    pub fn stats_at(&self, i: usize) -> &[f64] {
        &self.stats[i]
    }

    fn log_weights(&self, theta: &[f64]) -> Vec<f64> {
        self.stats
            .iter()
            .zip(&self.log_base)
            .map(|(g, lh)| lh + dot(theta, g))
            .collect()
    }

    /// `c(θ) = log Σₓ h(x) exp(θᵀg(x))`.
    pub fn log_partition(&self, theta: &[f64]) -> f64 {
        log_sum_exp(&self.log_weights(theta))
    }

    pub fn probabilities(&self, theta: &[f64]) -> Vec<f64> {
        let lw = self.log_weights(theta);
        let c = log_sum_exp(&lw);
        lw.iter().map(|v| (v - c).exp()).collect()
    }

    /// `Σₓ g(x) q(x)` for an arbitrary weight vector `q`.
    pub fn moments(&self, q: &[f64]) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for (g, w) in self.stats.iter().zip(q) {
            for (acc, gj) in m.iter_mut().zip(g) {
                *acc += w * gj;
            }
        }
        m
    }

    pub fn mean_stats(&self, theta: &[f64]) -> Vec<f64> {
        self.moments(&self.probabilities(theta))
    }

    /// `Cov[g | θ]`, the Hessian of `c`.
    pub fn stat_cov(&self, theta: &[f64]) -> SymMatrix {
        let probs = self.probabilities(theta);
        let mean = self.moments(&probs);
        let mut cov = SymMatrix::zeros(self.dim);
        let mut centered = vec![0.0; self.dim];
        for (g, w) in self.stats.iter().zip(&probs) {
            for j in 0..self.dim {
                centered[j] = g[j] - mean[j];
            }
            cov.add_outer(&centered, *w);
        }
        cov
    }

    fn check_population(&self, p0: &[f64]) -> Result<()> {
        check_dim(self.support.len(), p0.len())?;
        if p0.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidArgument(
                "population weights must be nonnegative".into(),
            ));
        }
        let total: f64 = p0.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "population weights sum to {total}, not 1"
            )));
        }
        Ok(())
    }
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `KL(p₀ ‖ p_θ) = Σₓ p₀(x) log(p₀(x)/p(x|θ))`, with `0 log 0 = 0`.
pub fn kl_divergence(fam: &FiniteExpFamily, p0: &[f64], theta: &[f64]) -> f64 {
    let lw = fam.log_weights(theta);
    let c = log_sum_exp(&lw);
    p0.iter()
        .zip(&lw)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, l)| w * (w.ln() - (l - c)))
        .sum()
}

/// Pseudo-true parameter by damped Newton iteration on `c(θ) − θᵀλ`,
/// `λ = E₀[g]`, started at `θ = 0`.
pub fn expfam_pseudo_true(fam: &FiniteExpFamily, p0: &[f64]) -> Result<Vec<f64>> {
    fam.check_population(p0)?;
    let target = fam.moments(p0);
    let objective = |theta: &[f64]| fam.log_partition(theta) - dot(theta, &target);

    let mut theta = vec![0.0; fam.dim];
    let mut value = objective(&theta);
    for _ in 0..MAX_NEWTON_ITERS {
        let probs = fam.probabilities(&theta);
        let grad: Vec<f64> = fam
            .moments(&probs)
            .iter()
            .zip(&target)
            .map(|(m, l)| m - l)
            .collect();
        let hess = fam.stat_cov(&theta);
        let chol = match cholesky(&hess) {
            Ok(c) => c,
            Err(_) => return Err(Error::MomentOnBoundary),
        };
        let step: Vec<f64> = chol.solve(&grad).iter().map(|v| -v).collect();
        let step_norm = norm_inf(&step);
        if !step_norm.is_finite() || step_norm > STEP_NORM_CAP {
            return Err(Error::MomentOnBoundary);
        }
        if step_norm <= 1e-10 * (1.0 + norm_inf(&theta)) {
            theta.iter_mut().zip(&step).for_each(|(t, s)| *t += s);
            return Ok(theta);
        }

        // Close to the optimum the decrease from a small step is below the
        // resolution of the objective, so a step that does not increase it
        // beyond rounding is accepted. Large steps still need a strict
        // decrease: that is what stops the walk towards a boundary moment.
        let terminal = step_norm <= 1e-6 * (1.0 + norm_inf(&theta));
        let slack = 4.0 * f64::EPSILON * (1.0 + value.abs());
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand: Vec<f64> = theta.iter().zip(&step).map(|(a, s)| a + t * s).collect();
            let v = objective(&cand);
            if v < value || (terminal && v <= value + slack) {
                accepted = Some((cand, v));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((cand, v)) => {
                theta = cand;
                value = v;
            }
            // no representable decrease yet a large step: the optimum is at
            // infinity or the objective has flattened out in floating point
            None => return Err(stalled(fam, &theta)),
        }
    }
    Err(stalled(fam, &theta))
}

fn stalled(fam: &FiniteExpFamily, theta: &[f64]) -> Error {
    let min_prob = fam
        .probabilities(theta)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if min_prob < 1e-10 {
        Error::MomentOnBoundary
    } else {
        Error::NoConvergence {
            iterations: MAX_NEWTON_ITERS,
        }
    }
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Exhaustive minimizer of `KL(p₀ ‖ p_θ)` over `grid`; first wins on ties.
pub fn kl_oracle_pseudo_true(
    fam: &FiniteExpFamily,
    p0: &[f64],
    grid: &[Vec<f64>],
) -> Result<Vec<f64>> {
    fam.check_population(p0)?;
    let mut best: Option<(&Vec<f64>, f64)> = None;
    for theta in grid {
        check_dim(fam.dim, theta.len())?;
        let kl = kl_divergence(fam, p0, theta);
        if best.is_none_or(|(_, b)| kl < b) {
            best = Some((theta, kl));
        }
    }
    best.map(|(t, _)| t.clone()).ok_or(Error::EmptyInput)
}

/// Observations are support indices.
impl WorkingModel for FiniteExpFamily {
    type Obs = usize;

    fn dim(&self) -> usize {
        self.dim
    }

    fn log_lik(&self, theta: &[f64], obs: &usize) -> Result<f64> {
        check_dim(self.dim, theta.len())?;
        let g = self.stats.get(*obs).ok_or_else(|| out_of_support(*obs))?;
        Ok(self.log_base[*obs] + dot(theta, g) - self.log_partition(theta))
    }

    fn score(&self, theta: &[f64], obs: &usize) -> Result<Vec<f64>> {
        check_dim(self.dim, theta.len())?;
        let g = self.stats.get(*obs).ok_or_else(|| out_of_support(*obs))?;
        Ok(g.iter()
            .zip(self.mean_stats(theta))
            .map(|(a, m)| a - m)
            .collect())
    }

    fn hessian(&self, theta: &[f64], obs: &usize) -> Result<SymMatrix> {
        check_dim(self.dim, theta.len())?;
        if *obs >= self.support.len() {
            return Err(out_of_support(*obs));
        }
        Ok(self.stat_cov(theta).scaled(-1.0))
    }

    fn fit_mle(&self, data: &[usize]) -> Result<Vec<f64>> {
        if data.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut freq = vec![0.0; self.support.len()];
        for &i in data {
            *freq.get_mut(i).ok_or_else(|| out_of_support(i))? += 1.0;
        }
        let n = data.len() as f64;
        freq.iter_mut().for_each(|f| *f /= n);
        expfam_pseudo_true(self, &freq)
    }
}

fn out_of_support(i: usize) -> Error {
    Error::InvalidArgument(format!("support index {i} out of range"))
}
