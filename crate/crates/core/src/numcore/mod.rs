//! Numerical primitives shared by the statistical modules.

mod linalg;
mod matrix;
mod rng;
mod special;

pub use linalg::{
    cholesky, mahalanobis_sq, mvn_logpdf, mvn_sample, mvn_transform, CholeskyFactor, RIDGE_SCHEDULE,
};
pub use matrix::{dot, euclidean, squared_euclidean, Matrix};
pub use rng::RngStream;
pub use special::{beta_inc, chi_sq_sf, f_sf, gamma_p, gamma_q, ln_gamma, normal_cdf};
