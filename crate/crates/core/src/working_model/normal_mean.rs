use super::{check_dim, WorkingModel};
use crate::error::{Error, Result};
use crate::stochastics::SymMatrix;

/// `N(θ, σ²)` with known `σ`; one parameter, the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalMean {
    sigma: f64,
}

impl NormalMean {
    pub fn new(sigma: f64) -> Result<Self> {
        if sigma > 0.0 && sigma.is_finite() {
            Ok(Self { sigma })
        } else {
            Err(Error::InvalidArgument(format!(
                "sigma must be positive, got {sigma}"
            )))
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl Default for NormalMean {
    fn default() -> Self {
        Self { sigma: 1.0 }
    }
}

impl WorkingModel for NormalMean {
    type Obs = f64;

    fn dim(&self) -> usize {
        1
    }

    fn log_lik(&self, theta: &[f64], x: &f64) -> Result<f64> {
        check_dim(1, theta.len())?;
        let v = self.sigma * self.sigma;
        let r = x - theta[0];
        Ok(-0.5 * (r * r / v + (2.0 * std::f64::consts::PI * v).ln()))
    }

    fn score(&self, theta: &[f64], x: &f64) -> Result<Vec<f64>> {
        check_dim(1, theta.len())?;
        Ok(vec![(x - theta[0]) / (self.sigma * self.sigma)])
    }

    fn hessian(&self, theta: &[f64], _x: &f64) -> Result<SymMatrix> {
        check_dim(1, theta.len())?;
        Ok(SymMatrix::diagonal(&[-1.0 / (self.sigma * self.sigma)]))
    }

    fn fit_mle(&self, data: &[f64]) -> Result<Vec<f64>> {
        if data.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(vec![data.iter().sum::<f64>() / data.len() as f64])
    }
}
