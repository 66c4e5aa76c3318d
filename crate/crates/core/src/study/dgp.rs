use serde::Serialize;

use crate::error::{Error, Result};
use crate::stochastics::RngStream;
use crate::working_model::RegressionObs;

/// Conditional noise law of `y | x` around `μ = β₁ + β₂ x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseLaw {
    /// Standard deviation `μ`: the heteroscedastic design.
    Proportional,
    /// Standard deviation 1.
    Unit,
    /// `y = μ` exactly.
    Noiseless,
}

/// `x ~ Exponential(1)`, `y | x ~ N(μ, sd(μ)²)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DgpConfig {
    pub beta_true: [f64; 2],
    pub n: usize,
    pub noise: NoiseLaw,
}

impl DgpConfig {
    /// `β = (1, 1)` with standard deviation `β₁ + β₂ x`.
    pub fn heteroscedastic(n: usize) -> Self {
        Self {
            beta_true: [1.0, 1.0],
            n,
            noise: NoiseLaw::Proportional,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument(
                "sample size must be positive".into(),
            ));
        }
        let [b1, b2] = self.beta_true;
        if self.noise == NoiseLaw::Proportional && !(b1 > 0.0 && b2 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "proportional noise needs β₁ > 0 and β₂ ≥ 0, got ({b1}, {b2})"
            )));
        }
        Ok(())
    }

    /// The slope `β₂`, the coverage target.
    pub fn slope(&self) -> f64 {
        self.beta_true[1]
    }
}

pub fn generate_dataset(rng: &mut RngStream, cfg: &DgpConfig) -> Vec<RegressionObs> {
    let [b1, b2] = cfg.beta_true;
    (0..cfg.n)
        .map(|_| {
            let x = -rng.uniform_open().ln();
            let z = rng.standard_normal();
            let mu = b1 + b2 * x;
            let sd = match cfg.noise {
                NoiseLaw::Proportional => mu,
                NoiseLaw::Unit => 1.0,
                NoiseLaw::Noiseless => 0.0,
            };
            RegressionObs::with_intercept(mu + sd * z, &[x])
        })
        .collect()
}
