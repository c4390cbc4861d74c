//! Regression models for semicontinuous outcomes.
//!
//! Four families are supported — two-part logistic+gamma, two-part
//! logistic+GB2, Tweedie compound Poisson–gamma, and Tobit — all behind
//! one contract: a fitted model predicts the zero probability p̂₀(x) and
//! the conditional distribution function F̂(y|x). Those two quantities
//! are everything the residual machinery consumes.

mod gamma_glm;
mod gb2;
mod logistic;
pub(crate) mod optim;
mod tobit;
mod tweedie;

pub use gamma_glm::fit_gamma_glm;
pub use gb2::{fit_gb2, Gb2Severity};
pub use logistic::fit_logistic;
pub use tobit::fit_tobit;
pub use tweedie::fit_tweedie;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::special::{
    gamma_cdf, gb2_cdf, normal_cdf, tweedie_cdf, tweedie_p0, GammaParams, Gb2Params, TweedieParams,
};

/// Covariates and response bundled with the invariants every fitter
/// assumes: an explicit intercept column of ones at position 0, finite
/// entries, and a nonnegative response.
#[derive(Debug, Clone)]
pub struct Dataset {
    design: DMatrix<f64>,
    response: DVector<f64>,
    column_names: Vec<String>,
}

impl Dataset {
    /// Wraps an existing design matrix whose column 0 must already be the
    /// intercept.
    pub fn new(
        design: DMatrix<f64>,
        response: DVector<f64>,
        column_names: Vec<String>,
    ) -> Result<Self> {
        let n = design.nrows();
        let d = design.ncols();
        if d == 0 {
            return Err(Error::domain("design matrix needs at least the intercept column"));
        }
        if n < d {
            return Err(Error::domain(format!(
                "need at least as many rows ({n}) as columns ({d})"
            )));
        }
        if response.len() != n {
            return Err(Error::domain(format!(
                "response length {} does not match design rows {n}",
                response.len()
            )));
        }
        if column_names.len() != d {
            return Err(Error::domain(format!(
                "{} column names for {d} columns",
                column_names.len()
            )));
        }
        for i in 0..n {
            if design[(i, 0)] != 1.0 {
                return Err(Error::data(i, "column 0 must be the intercept (all ones)"));
            }
            for j in 0..d {
                if !design[(i, j)].is_finite() {
                    return Err(Error::data(
                        i,
                        format!("non-finite design entry in column {}", column_names[j]),
                    ));
                }
            }
            if !response[i].is_finite() || response[i] < 0.0 {
                return Err(Error::data(
                    i,
                    format!("response must be finite and nonnegative, got {}", response[i]),
                ));
            }
        }
        Ok(Self {
            design,
            response,
            column_names,
        })
    }

    /// Builds a dataset from raw covariates, prepending the intercept
    /// column and naming it `intercept`.
    pub fn from_covariates(
        covariates: &DMatrix<f64>,
        response: DVector<f64>,
        covariate_names: Vec<String>,
    ) -> Result<Self> {
        let n = covariates.nrows();
        let k = covariates.ncols();
        let mut design = DMatrix::from_element(n, k + 1, 1.0);
        design.view_mut((0, 1), (n, k)).copy_from(covariates);
        let mut names = Vec::with_capacity(k + 1);
        names.push("intercept".to_string());
        names.extend(covariate_names);
        Self::new(design, response, names)
    }

    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    pub fn d(&self) -> usize {
        self.design.ncols()
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn response(&self) -> &DVector<f64> {
        &self.response
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    /// Copies row `i` of the design into a plain vector.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.design.row(i).iter().copied().collect()
    }

    /// True where the response is exactly zero.
    pub fn zero_mask(&self) -> Vec<bool> {
        self.response.iter().map(|&y| y == 0.0).collect()
    }

    /// Design rows and responses restricted to positive outcomes.
    pub fn positive_subset(&self) -> (DMatrix<f64>, DVector<f64>) {
        let rows: Vec<usize> = (0..self.n()).filter(|&i| self.response[i] > 0.0).collect();
        let design = DMatrix::from_fn(rows.len(), self.d(), |i, j| self.design[(rows[i], j)]);
        let response = DVector::from_iterator(rows.len(), rows.iter().map(|&i| self.response[i]));
        (design, response)
    }
}

/// Summary attached to every fit.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub coefficient_standard_errors: Option<DVector<f64>>,
}

/// Reports for both halves of a two-part fit; `log_likelihood` is their
/// sum, the full-data likelihood of the combined model.
#[derive(Debug, Clone)]
pub struct TwoPartReport {
    pub zero: FitReport,
    pub positive: FitReport,
    pub log_likelihood: f64,
}

/// One row of the Tweedie power profile.
#[derive(Debug, Clone, Copy)]
pub struct ProfilePoint {
    pub power: f64,
    pub log_likelihood: f64,
    pub phi_pearson: f64,
    pub converged: bool,
}

/// Distribution of the positive part in a two-part model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PositiveFamily {
    Gamma { dispersion: f64 },
    Gb2 { a: f64, p: f64, q: f64 },
}

/// Two-part model: logistic zero probability plus a positive-outcome
/// family with log-link location exp(x'positive_coef).
#[derive(Debug, Clone)]
pub struct TwoPartFit {
    pub zero_coef: DVector<f64>,
    pub positive_coef: DVector<f64>,
    pub family: PositiveFamily,
}

/// Tweedie GLM: mean exp(x'coef), variance phi·mean^power.
#[derive(Debug, Clone)]
pub struct TweedieFit {
    pub coef: DVector<f64>,
    pub phi: f64,
    pub power: f64,
}

/// Tobit model: latent normal mean x'coef, scale sigma, censored below
/// `limit`.
#[derive(Debug, Clone)]
pub struct TobitFit {
    pub coef: DVector<f64>,
    pub sigma: f64,
    pub limit: f64,
}

/// The uniform contract the diagnostics consume. `predict_p0` returns the
/// fitted mass at zero and `conditional_cdf` the fitted distribution
/// function; at y = 0 the two agree exactly, which downstream code relies
/// on when building residual pools.
pub trait SemicontinuousModel: Send + Sync {
    /// Fitted P(Y = 0 | x), strictly inside (0, 1).
    fn predict_p0(&self, x: &[f64]) -> f64;

    /// Fitted P(Y ≤ y | x); nondecreasing in y, equal to `predict_p0` at
    /// y = 0.
    fn conditional_cdf(&self, y: f64, x: &[f64]) -> Result<f64>;

    /// Number of design columns the model expects (including intercept).
    fn dimension(&self) -> usize;

    /// Short family tag used in reports and model files.
    fn family_name(&self) -> &'static str;
}

/// Keeps predicted probabilities usable as strict-interior values.
pub(crate) fn clamp_probability(p: f64) -> f64 {
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
}

fn dot(coef: &DVector<f64>, x: &[f64]) -> f64 {
    assert_eq!(
        coef.len(),
        x.len(),
        "covariate vector length {} does not match model dimension {}",
        x.len(),
        coef.len()
    );
    coef.iter().zip(x).map(|(c, v)| c * v).sum()
}

/// Caps linear predictors before exponentiation so extreme covariates
/// degrade gracefully instead of overflowing.
fn capped_exp(eta: f64) -> f64 {
    eta.clamp(-300.0, 300.0).exp()
}

impl SemicontinuousModel for TwoPartFit {
    fn predict_p0(&self, x: &[f64]) -> f64 {
        clamp_probability(logistic_inverse(dot(&self.zero_coef, x)))
    }

    fn conditional_cdf(&self, y: f64, x: &[f64]) -> Result<f64> {
        if y < 0.0 {
            return Err(Error::domain(format!("outcome must be nonnegative, got {y}")));
        }
        let p0 = self.predict_p0(x);
        if y == 0.0 {
            return Ok(p0);
        }
        let location = capped_exp(dot(&self.positive_coef, x));
        let g = match self.family {
            PositiveFamily::Gamma { dispersion } => {
                let params = GammaParams::new(1.0 / dispersion, location * dispersion)?;
                gamma_cdf(y, &params)?
            }
            PositiveFamily::Gb2 { a, p, q } => {
                let params = Gb2Params::new(a, location, p, q)?;
                gb2_cdf(y, &params)?
            }
        };
        Ok((p0 + (1.0 - p0) * g).min(1.0))
    }

    fn dimension(&self) -> usize {
        self.zero_coef.len()
    }

    fn family_name(&self) -> &'static str {
        match self.family {
            PositiveFamily::Gamma { .. } => "twopart-gamma",
            PositiveFamily::Gb2 { .. } => "twopart-gb2",
        }
    }
}

impl SemicontinuousModel for TweedieFit {
    fn predict_p0(&self, x: &[f64]) -> f64 {
        let params = self.params_at(x);
        tweedie_p0(&params)
    }

    fn conditional_cdf(&self, y: f64, x: &[f64]) -> Result<f64> {
        if y < 0.0 {
            return Err(Error::domain(format!("outcome must be nonnegative, got {y}")));
        }
        tweedie_cdf(y, &self.params_at(x))
    }

    fn dimension(&self) -> usize {
        self.coef.len()
    }

    fn family_name(&self) -> &'static str {
        "tweedie"
    }
}

impl TweedieFit {
    fn params_at(&self, x: &[f64]) -> TweedieParams {
        let mu = capped_exp(dot(&self.coef, x));
        TweedieParams::new(mu, self.phi, self.power)
            .expect("fitted Tweedie parameters are valid by construction")
    }
}

impl SemicontinuousModel for TobitFit {
    fn predict_p0(&self, x: &[f64]) -> f64 {
        let eta = dot(&self.coef, x);
        clamp_probability(normal_cdf((self.limit - eta) / self.sigma))
    }

    fn conditional_cdf(&self, y: f64, x: &[f64]) -> Result<f64> {
        if y < 0.0 {
            return Err(Error::domain(format!("outcome must be nonnegative, got {y}")));
        }
        let p0 = self.predict_p0(x);
        if y <= self.limit {
            return Ok(p0);
        }
        let eta = dot(&self.coef, x);
        Ok(normal_cdf((y - eta) / self.sigma).clamp(p0, 1.0))
    }

    fn dimension(&self) -> usize {
        self.coef.len()
    }

    fn family_name(&self) -> &'static str {
        "tobit"
    }
}

pub(crate) fn logistic_inverse(eta: f64) -> f64 {
    logistic::sigmoid(eta)
}

/// Fits the logistic zero part and a gamma GLM positive part.
pub fn fit_two_part_gamma(data: &Dataset) -> Result<(TwoPartFit, TwoPartReport)> {
    let mask = two_part_mask(data)?;
    let (zero_coef, zero_report) = fit_logistic(data.design(), &mask)?;
    let (design_pos, y_pos) = data.positive_subset();
    let (positive_coef, dispersion, positive_report) = fit_gamma_glm(&design_pos, &y_pos)?;
    let log_likelihood = zero_report.log_likelihood + positive_report.log_likelihood;
    Ok((
        TwoPartFit {
            zero_coef,
            positive_coef,
            family: PositiveFamily::Gamma { dispersion },
        },
        TwoPartReport {
            zero: zero_report,
            positive: positive_report,
            log_likelihood,
        },
    ))
}

/// Fits the logistic zero part and a GB2 positive part.
pub fn fit_two_part_gb2(data: &Dataset) -> Result<(TwoPartFit, TwoPartReport)> {
    let mask = two_part_mask(data)?;
    let (zero_coef, zero_report) = fit_logistic(data.design(), &mask)?;
    let (design_pos, y_pos) = data.positive_subset();
    let (severity, positive_report) = fit_gb2(&design_pos, &y_pos)?;
    let log_likelihood = zero_report.log_likelihood + positive_report.log_likelihood;
    Ok((
        TwoPartFit {
            zero_coef,
            positive_coef: severity.coef,
            family: PositiveFamily::Gb2 {
                a: severity.a,
                p: severity.p,
                q: severity.q,
            },
        },
        TwoPartReport {
            zero: zero_report,
            positive: positive_report,
            log_likelihood,
        },
    ))
}

fn two_part_mask(data: &Dataset) -> Result<Vec<bool>> {
    let mask = data.zero_mask();
    let zeros = mask.iter().filter(|&&z| z).count();
    if zeros == 0 || zeros == data.n() {
        return Err(Error::domain(
            "two-part fitting needs at least one zero and one positive response",
        ));
    }
    Ok(mask)
}
