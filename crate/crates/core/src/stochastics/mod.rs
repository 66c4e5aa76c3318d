//! Seedable sampling and the small dense linear algebra everything else
//! sits on.

mod linalg;
mod rng;
mod sampling;

pub(crate) use linalg::dot;
pub use linalg::{cholesky, Cholesky, SymMatrix, PD_TOLERANCE};
pub use rng::RngStream;
pub use sampling::{
    empirical_quantile, normal_quantile, quantile_sorted, sample_mvnorm, sample_wishart,
};
