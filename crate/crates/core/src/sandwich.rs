//! Plug-in sandwich inference: bread `A = Σ l̈(θ̂)`, meat `B̂ = S(θ̂)/n`,
//! covariance `Ĉ = n A⁻¹ B̂ A⁻¹` and the Wald interval built from it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stochastics::{cholesky, normal_quantile, SymMatrix};
use crate::working_model::WorkingModel;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichFit {
    pub theta_hat: Vec<f64>,
    /// `Σᵢ l̈(θ̂ : xᵢ)`; negative-definite for a concave log-likelihood.
    pub a: SymMatrix,
    pub b_hat: SymMatrix,
    pub c_hat: SymMatrix,
    pub n: usize,
}

impl SandwichFit {
    pub fn dim(&self) -> usize {
        self.theta_hat.len()
    }

    /// `S(θ̂) = n B̂`.
    pub fn score_squares(&self) -> SymMatrix {
        self.b_hat.scaled(self.n as f64)
    }

    pub fn std_error(&self, coord: usize) -> Option<f64> {
        (coord < self.dim()).then(|| self.c_hat.get(coord, coord).max(0.0).sqrt())
    }
}

pub fn compute_a<M: WorkingModel>(model: &M, theta: &[f64], data: &[M::Obs]) -> Result<SymMatrix> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut a = SymMatrix::zeros(model.dim());
    for obs in data {
        let h = model.hessian(theta, obs)?;
        if h.dim() != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: h.dim(),
            });
        }
        a.add_assign(&h);
    }
    Ok(a)
}

/// `S(θ) = Σᵢ l̇(θ:xᵢ) l̇(θ:xᵢ)ᵀ`.
pub fn compute_s<M: WorkingModel>(model: &M, theta: &[f64], data: &[M::Obs]) -> Result<SymMatrix> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let p = model.dim();
    let mut s = SymMatrix::zeros(p);
    for obs in data {
        let g = model.score(theta, obs)?;
        if g.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: g.len(),
            });
        }
        s.add_outer(&g, 1.0);
    }
    Ok(s)
}

/// `A⁻¹` for a definite bread matrix of either sign.
pub(crate) fn invert_bread(a: &SymMatrix, n: usize) -> Result<SymMatrix> {
    let singular = || Error::SingularDesign { n, p: a.dim() };
    if let Ok(chol) = cholesky(&a.scaled(-1.0)) {
        return Ok(chol.inverse().scaled(-1.0));
    }
    cholesky(a).map(|c| c.inverse()).map_err(|_| singular())
}

pub fn sandwich_cov<M: WorkingModel>(model: &M, data: &[M::Obs]) -> Result<SandwichFit> {
    let n = data.len();
    let theta_hat = model.fit_mle(data)?;
    let a = compute_a(model, &theta_hat, data)?;
    let s = compute_s(model, &theta_hat, data)?;
    let a_inv = invert_bread(&a, n)?;
    let c_hat = s.sandwiched_by(&a_inv);
    Ok(SandwichFit {
        theta_hat,
        a,
        b_hat: s.scaled(1.0 / n as f64),
        c_hat,
        n,
    })
}

/// `θ̂_j ± z_{(1+level)/2} √Ĉ_jj`.
pub fn wald_interval(fit: &SandwichFit, coord: usize, level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    let se = fit.std_error(coord).ok_or(Error::DimensionMismatch {
        expected: fit.dim(),
        got: coord,
    })?;
    let center = fit.theta_hat[coord];
    let half = normal_quantile(0.5 * (1.0 + level)) * se;
    Ok((center - half, center + half))
}

pub(crate) fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "level {level} outside (0, 1)"
        )))
    }
}
