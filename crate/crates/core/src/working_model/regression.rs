use serde::Serialize;

use super::{check_dim, ScoreOuterFn, WorkingModel};
use crate::error::{Error, Result};
use crate::stochastics::{cholesky, dot, SymMatrix};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// One regression observation. `x` carries the leading intercept 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionObs {
    y: f64,
    x: Vec<f64>,
}

impl RegressionObs {
    /// `x` must start with the intercept entry 1.
    pub fn new(y: f64, x: Vec<f64>) -> Result<Self> {
        match x.first() {
            Some(&lead) if lead == 1.0 => Ok(Self { y, x }),
            Some(_) => Err(Error::InvalidArgument(
                "regression covariate vector must start with the intercept 1".into(),
            )),
            None => Err(Error::EmptyInput),
        }
    }

    /// Prepends the intercept to `covariates`.
    pub fn with_intercept(y: f64, covariates: &[f64]) -> Self {
        let mut x = Vec::with_capacity(covariates.len() + 1);
        x.push(1.0);
        x.extend_from_slice(covariates);
        Self { y, x }
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    fn residual(&self, beta: &[f64]) -> f64 {
        self.y - dot(beta, &self.x)
    }
}

/// `x (y − βᵀx)`.
pub fn regression_score(beta: &[f64], obs: &RegressionObs) -> Result<Vec<f64>> {
    check_dim(obs.x.len(), beta.len())?;
    let r = obs.residual(beta);
    Ok(obs.x.iter().map(|xi| xi * r).collect())
}

/// `−x xᵀ`; constant in β and y.
pub fn regression_hessian(beta: &[f64], obs: &RegressionObs) -> Result<SymMatrix> {
    check_dim(obs.x.len(), beta.len())?;
    Ok(SymMatrix::outer(&obs.x, -1.0))
}

/// Ordinary least squares via Cholesky of `Σ x xᵀ`.
pub fn regression_fit_mle(data: &[RegressionObs]) -> Result<Vec<f64>> {
    let p = data.first().ok_or(Error::EmptyInput)?.x.len();
    let (xtx, xty) = normal_equations(data, p)?;
    if data.len() < p {
        return Err(Error::SingularDesign { n: data.len(), p });
    }
    let chol = cholesky(&xtx).map_err(|_| Error::SingularDesign { n: data.len(), p })?;
    Ok(chol.solve(&xty))
}

pub(crate) fn normal_equations(data: &[RegressionObs], p: usize) -> Result<(SymMatrix, Vec<f64>)> {
    let mut xtx = SymMatrix::zeros(p);
    let mut xty = vec![0.0; p];
    for obs in data {
        check_dim(p, obs.x.len())?;
        xtx.add_outer(&obs.x, 1.0);
        for (acc, xi) in xty.iter_mut().zip(&obs.x) {
            *acc += xi * obs.y;
        }
    }
    Ok((xtx, xty))
}

/// Normal linear regression with error variance fixed at 1.
///
/// The variance cancels from every sandwich quantity, so 1 is as good as any
/// other value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalRegression {
    dim: usize,
}

impl NormalRegression {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "regression needs at least the intercept");
        Self { dim }
    }
}

impl WorkingModel for NormalRegression {
    type Obs = RegressionObs;

    fn dim(&self) -> usize {
        self.dim
    }

    fn log_lik(&self, beta: &[f64], obs: &RegressionObs) -> Result<f64> {
        check_dim(self.dim, beta.len())?;
        check_dim(self.dim, obs.x.len())?;
        let r = obs.residual(beta);
        Ok(-0.5 * r * r - HALF_LN_2PI)
    }

    fn score(&self, beta: &[f64], obs: &RegressionObs) -> Result<Vec<f64>> {
        check_dim(self.dim, beta.len())?;
        regression_score(beta, obs)
    }

    fn hessian(&self, beta: &[f64], obs: &RegressionObs) -> Result<SymMatrix> {
        check_dim(self.dim, beta.len())?;
        regression_hessian(beta, obs)
    }

    fn fit_mle(&self, data: &[RegressionObs]) -> Result<Vec<f64>> {
        let beta = regression_fit_mle(data)?;
        check_dim(self.dim, beta.len())?;
        Ok(beta)
    }

    /// Expands `S(β)` around the OLS fit. With `δ = β − β̂` and residuals
    /// `e`, `S_ab(β) = Σ x_a x_b (e − xᵀδ)²`, a quadratic in `δ` whose
    /// coefficients are computed once.
    fn score_outer_fn<'a>(&'a self, data: &'a [RegressionObs]) -> Result<ScoreOuterFn<'a>> {
        let p = self.dim;
        if data.is_empty() {
            return Err(Error::EmptyInput);
        }
        let beta_hat = match self.fit_mle(data) {
            Ok(b) => b,
            // no OLS anchor available; fall back to direct summation
            Err(_) => vec![0.0; p],
        };
        let pairs = p * (p + 1) / 2;
        let mut m0 = vec![0.0; pairs];
        let mut m1 = vec![0.0; pairs * p];
        let mut m2 = vec![0.0; pairs * p * p];
        for obs in data {
            check_dim(p, obs.x.len())?;
            let e = obs.residual(&beta_hat);
            let x = &obs.x;
            let mut k = 0;
            for a in 0..p {
                for b in 0..=a {
                    let w = x[a] * x[b];
                    m0[k] += w * e * e;
                    for c in 0..p {
                        let wc = w * x[c];
                        m1[k * p + c] += wc * e;
                        for d in 0..p {
                            m2[(k * p + c) * p + d] += wc * x[d];
                        }
                    }
                    k += 1;
                }
            }
        }
        Ok(Box::new(move |beta: &[f64]| {
            check_dim(p, beta.len())?;
            let delta: Vec<f64> = beta.iter().zip(&beta_hat).map(|(b, h)| b - h).collect();
            let mut s = SymMatrix::zeros(p);
            let mut k = 0;
            for a in 0..p {
                for b in 0..=a {
                    let mut v = m0[k];
                    for c in 0..p {
                        v -= 2.0 * delta[c] * m1[k * p + c];
                        for d in 0..p {
                            v += delta[c] * delta[d] * m2[(k * p + c) * p + d];
                        }
                    }
                    s.set(a, b, v);
                    k += 1;
                }
            }
            Ok(s)
        }))
    }
}
