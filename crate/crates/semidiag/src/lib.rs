//! Regression models and residual diagnostics for semicontinuous outcomes.
//!
//! A semicontinuous outcome is nonnegative with a probability mass at zero
//! and a continuous density on the positive half line: insurance claims,
//! healthcare expenditures, rainfall. This crate fits the standard model
//! families for such data (two-part logistic+gamma and logistic+GB2,
//! Tweedie compound Poisson-gamma GLM, Tobit) and computes residuals whose
//! null pattern is the uniform distribution, so a single QQ plot assesses
//! the whole fitted conditional distribution, zeros included.
//!
//! The crate is organized as:
//!
//! * [`special`] - scalar special functions and distribution primitives;
//! * [`models`] - model fitting and the `p0`/`cdf` contract every
//!   diagnostic consumes;
//! * [`residuals`] - the uniformity-based residuals, out-of-sample errors,
//!   and baseline residuals;
//! * [`diagnostics`] - QQ data, uniformity statistics, SVG rendering;
//! * [`simulation`] - seeded data generators and the scenario runner.

pub mod diagnostics;
pub mod error;
pub mod models;
pub mod residuals;
pub mod simulation;
pub mod special;

pub use error::{Error, Result};
