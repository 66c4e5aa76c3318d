//! The uncorrected baseline: a posterior under the homoscedastic normal
//! regression model itself, with unknown error variance.

use crate::bayes_sandwich::{ChainConfig, ThetaPrior};
use crate::error::{Error, Result};
use crate::sandwich::check_level;
use crate::stochastics::{cholesky, dot, quantile_sorted, sample_mvnorm, RngStream, SymMatrix};
use crate::working_model::RegressionObs;

/// Equal-tailed interval for coordinate `coord` of `β` under
/// `y = βᵀx + ε, ε ~ N(0, σ²)`, prior `prior_beta` on `β` and `π(σ²) ∝ 1/σ²`.
///
/// Two-block Gibbs: `β | σ²` is conjugate normal and
/// `σ² | β ~ InvGamma(n/2, RSS(β)/2)`.
pub fn naive_model_interval(
    rng: &mut RngStream,
    data: &[RegressionObs],
    prior_beta: &ThetaPrior,
    coord: usize,
    level: f64,
    chain: &ChainConfig,
) -> Result<(f64, f64)> {
    check_level(level)?;
    let n = data.len();
    let p = data.first().ok_or(Error::EmptyInput)?.x().len();
    if coord >= p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: coord,
        });
    }
    if chain.n_iter <= chain.n_burn {
        return Err(Error::InvalidArgument(
            "need more iterations than burn-in".into(),
        ));
    }
    let mut xtx = SymMatrix::zeros(p);
    let mut xty = vec![0.0; p];
    for o in data {
        if o.x().len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: o.x().len(),
            });
        }
        xtx.add_outer(o.x(), 1.0);
        xty.iter_mut().zip(o.x()).for_each(|(a, x)| *a += x * o.y());
    }
    if n < p {
        return Err(Error::SingularDesign { n, p });
    }
    let xtx_chol = cholesky(&xtx).map_err(|_| Error::SingularDesign { n, p })?;
    let beta_hat = xtx_chol.solve(&xty);
    let rss_hat: f64 = data
        .iter()
        .map(|o| (o.y() - dot(&beta_hat, o.x())).powi(2))
        .sum();
    // RSS(β) = RSS(β̂) + (β − β̂)ᵀ XᵀX (β − β̂)
    let rss = |beta: &[f64]| {
        let d: Vec<f64> = beta.iter().zip(&beta_hat).map(|(b, h)| b - h).collect();
        rss_hat + xtx.quad_form(&d).max(0.0)
    };
    let prior = match prior_beta {
        ThetaPrior::ImproperUniform => None,
        ThetaPrior::Normal { mean, cov } => {
            let prec = cov.inverse()?;
            let shift = prec.mul_vec(mean);
            Some((prec, shift))
        }
    };

    let mut sigma2 = rss_hat / n as f64;
    let mut draws = Vec::with_capacity(chain.n_iter - chain.n_burn);
    for s in 0..chain.n_iter {
        let beta = if sigma2 > 0.0 {
            let lik_prec = xtx.scaled(1.0 / sigma2);
            let lik_shift: Vec<f64> = xty.iter().map(|v| v / sigma2).collect();
            let (prec, rhs) = match &prior {
                None => (lik_prec, lik_shift),
                Some((p0, s0)) => (
                    p0.add(&lik_prec),
                    s0.iter().zip(&lik_shift).map(|(a, b)| a + b).collect(),
                ),
            };
            let chol = cholesky(&prec).map_err(|e| Error::Gibbs {
                iteration: s,
                source: Box::new(e),
            })?;
            sample_mvnorm(rng, &chol.solve(&rhs), &chol.inverse())?
        } else {
            // zero residual variance pins β at the least-squares fit
            beta_hat.clone()
        };
        sigma2 = rss(&beta) / rng.chi_squared(n as f64);
        if s >= chain.n_burn {
            draws.push(beta[coord]);
        }
    }
    draws.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - level);
    Ok((
        quantile_sorted(&draws, tail)?,
        quantile_sorted(&draws, 1.0 - tail)?,
    ))
}
