//! Bayesian inference for pseudo-true parameters of misspecified models.
//!
//! The likelihood is built from the sandwich sampling distribution of the
//! MLE rather than from the working model itself, and the meat matrix `B`
//! is integrated over instead of plugged in. Alongside the posterior sampler
//! the crate carries the classical plug-in sandwich procedure and a coverage
//! study on heteroscedastic regression.
//!
//! Modules, bottom-up:
//!
//! - [`stochastics`]: seeded streams, Cholesky, normal/Wishart samplers, quantiles
//! - [`working_model`]: score/Hessian/MLE abstraction and concrete models
//! - [`sandwich`]: `A`, `S(θ)`, `B̂`, `Ĉ` and Wald intervals
//! - [`bayes_sandwich`]: priors, the two-block Gibbs sampler, posterior intervals
//! - [`study`]: data generation and the replicated coverage comparison

pub mod bayes_sandwich;
pub mod error;
pub mod sandwich;
pub mod stochastics;
pub mod study;
pub mod working_model;

pub use error::{Error, Result};
