//! Scalar special functions and distribution primitives.
//!
//! Everything here is pure and deterministic; no allocation beyond the
//! Tweedie term window.

mod beta_fn;
mod dist;
mod gamma_fn;
pub(crate) mod normal;
mod tweedie;

pub use dist::{
    gamma_cdf, gamma_logpdf, gamma_quantile, gb2_cdf, gb2_logpdf, gb2_quantile, GammaParams,
    Gb2Params,
};
pub use gamma_fn::log_gamma;
pub use normal::{normal_cdf, normal_pdf, normal_quantile};
pub use tweedie::{
    tweedie_cdf, tweedie_logpdf, tweedie_p0, tweedie_unit_deviance, CpgDerived, TweedieParams,
};

pub(crate) use beta_fn::log_beta;
pub(crate) use gamma_fn::digamma;
