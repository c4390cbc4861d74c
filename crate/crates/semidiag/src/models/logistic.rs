//! Logistic regression for the zero-probability part of two-part models,
//! fitted by iteratively reweighted least squares.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::models::optim::require_full_rank;
use crate::models::FitReport;

const MAX_ITER: usize = 100;
const SCORE_TOL: f64 = 1e-8;
const SEPARATION_COEF: f64 = 30.0;

/// Numerically stable logit⁻¹.
pub(crate) fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// log(1 + eˣ) without overflow.
pub(crate) fn log1p_exp(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Maximizes the Bernoulli log-likelihood of `is_zero` on the design by
/// IRLS, stopping when the score sup-norm falls below 1e-8. Perfectly
/// separated data drives the coefficients off to infinity instead of a
/// root of the score; that is detected and reported rather than returned
/// as a huge pseudo-solution.
pub fn fit_logistic(design: &DMatrix<f64>, is_zero: &[bool]) -> Result<(DVector<f64>, FitReport)> {
    let n = design.nrows();
    let d = design.ncols();
    if is_zero.len() != n {
        return Err(Error::domain(format!(
            "indicator length {} does not match design rows {n}",
            is_zero.len()
        )));
    }
    let zeros = is_zero.iter().filter(|&&z| z).count();
    if zeros == 0 || zeros == n {
        return Err(Error::domain(
            "logistic fit needs both outcomes present; indicator is constant",
        ));
    }
    require_full_rank(&design.tr_mul(design))?;

    let y = DVector::from_iterator(n, is_zero.iter().map(|&z| if z { 1.0 } else { 0.0 }));
    let mut coef = DVector::<f64>::zeros(d);
    let mut eta = DVector::<f64>::zeros(n);
    let mut iterations = 0;

    loop {
        let p = eta.map(sigmoid);
        let score = design.tr_mul(&(&y - &p));
        if score.amax() <= SCORE_TOL {
            let report = FitReport {
                log_likelihood: bernoulli_log_likelihood(&y, &eta),
                iterations,
                converged: true,
                coefficient_standard_errors: standard_errors(design, &p),
            };
            return Ok((coef, report));
        }
        if coef.amax() > SEPARATION_COEF {
            return Err(Error::Separation {
                max_abs_coef: coef.amax(),
                iterations,
            });
        }
        if iterations >= MAX_ITER {
            return Err(Error::NoConvergence {
                context: "logistic IRLS".into(),
                iterations,
                last_change: score.amax(),
            });
        }
        iterations += 1;

        // Weighted least squares on the working response z = η + (y-p)/w.
        let mut weighted = design.clone();
        let mut rhs_vec = DVector::<f64>::zeros(n);
        for i in 0..n {
            let w = (p[i] * (1.0 - p[i])).max(1e-10);
            let z = eta[i] + (y[i] - p[i]) / w;
            weighted.row_mut(i).scale_mut(w);
            rhs_vec[i] = w * z;
        }
        let gram = design.tr_mul(&weighted);
        let rhs = design.tr_mul(&rhs_vec);
        let chol = nalgebra::Cholesky::new(gram).ok_or_else(|| Error::NoConvergence {
            context: "logistic IRLS weighted system not positive definite".into(),
            iterations,
            last_change: score.amax(),
        })?;
        coef = chol.solve(&rhs);
        eta = design * &coef;
    }
}

fn bernoulli_log_likelihood(y: &DVector<f64>, eta: &DVector<f64>) -> f64 {
    let mut ll = 0.0;
    for i in 0..y.len() {
        ll += y[i] * eta[i] - log1p_exp(eta[i]);
    }
    ll
}

fn standard_errors(design: &DMatrix<f64>, p: &DVector<f64>) -> Option<DVector<f64>> {
    let mut weighted = design.clone();
    for i in 0..design.nrows() {
        weighted.row_mut(i).scale_mut(p[i] * (1.0 - p[i]));
    }
    let info = design.tr_mul(&weighted);
    let inv = nalgebra::Cholesky::new(info)?.inverse();
    Some(DVector::from_iterator(
        design.ncols(),
        (0..design.ncols()).map(|j| inv[(j, j)].sqrt()),
    ))
}
