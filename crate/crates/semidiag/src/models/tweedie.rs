//! Tweedie compound Poisson–gamma GLM with log link.
//!
//! The power π is profiled: quasi-likelihood IRLS estimates β at each π
//! on a coarse grid with a Pearson dispersion plugged in, the exact
//! series log-likelihood scores each grid point, and golden-section
//! search refines the winner. The dispersion is then re-estimated once
//! by one-dimensional exact-likelihood maximization at the chosen π.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::models::optim::{golden_max, require_full_rank};
use crate::models::{FitReport, ProfilePoint, TweedieFit};
use crate::special::{tweedie_logpdf, CpgDerived, TweedieParams};

const MAX_ITER: usize = 100;
const GRID: [f64; 17] = [
    1.10, 1.15, 1.20, 1.25, 1.30, 1.35, 1.40, 1.45, 1.50, 1.55, 1.60, 1.65, 1.70, 1.75, 1.80,
    1.85, 1.90,
];

/// Fits a Tweedie GLM to a response containing both zeros and positives.
/// Returns the fit, a report scored at the final parameters, and the
/// profile table over the power grid.
pub fn fit_tweedie(
    design: &DMatrix<f64>,
    y: &DVector<f64>,
) -> Result<(TweedieFit, FitReport, Vec<ProfilePoint>)> {
    let n = design.nrows();
    let d = design.ncols();
    if y.len() != n {
        return Err(Error::domain(format!(
            "response length {} does not match design rows {n}",
            y.len()
        )));
    }
    let mut zeros = 0usize;
    for (i, &v) in y.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::data(i, format!("response must be finite and nonnegative, got {v}")));
        }
        if v == 0.0 {
            zeros += 1;
        }
    }
    if zeros == 0 || zeros == n {
        return Err(Error::domain(
            "Tweedie fit needs both zero and positive responses",
        ));
    }
    require_full_rank(&design.tr_mul(design))?;

    let start = {
        let mut b = DVector::zeros(d);
        b[0] = (y.sum() / n as f64).ln();
        b
    };

    let mut profile = Vec::with_capacity(GRID.len());
    let mut warm = start.clone();
    let mut best: Option<(usize, f64)> = None;
    for (idx, &power) in GRID.iter().enumerate() {
        match profile_point(design, y, power, &warm) {
            Ok((coef, _, ll, phi)) => {
                warm = coef;
                if best.map_or(true, |(_, b)| ll > b) {
                    best = Some((idx, ll));
                }
                profile.push(ProfilePoint {
                    power,
                    log_likelihood: ll,
                    phi_pearson: phi,
                    converged: true,
                });
            }
            Err(_) => profile.push(ProfilePoint {
                power,
                log_likelihood: f64::NAN,
                phi_pearson: f64::NAN,
                converged: false,
            }),
        }
    }
    let (best_idx, _) = best.ok_or_else(|| Error::NoConvergence {
        context: "Tweedie profile failed at every grid power".into(),
        iterations: GRID.len(),
        last_change: f64::NAN,
    })?;

    // Refine the power on the bracket around the best grid point; a failed
    // inner fit scores as -inf so the search simply avoids it.
    let warm_best = warm.clone();
    let lo = (GRID[best_idx] - 0.05).max(1.01);
    let hi = (GRID[best_idx] + 0.05).min(1.99);
    let (power_hat, _) = golden_max(
        |p| match profile_point(design, y, p, &warm_best) {
            Ok((_, _, ll, _)) => ll,
            Err(_) => f64::NEG_INFINITY,
        },
        lo,
        hi,
        0.005,
    );

    let (coef, iterations, _, phi_pearson) = profile_point(design, y, power_hat, &warm_best)?;
    let (log_phi, _) = golden_max(
        |lp| log_likelihood(design, y, &coef, lp.exp(), power_hat).unwrap_or(f64::NEG_INFINITY),
        phi_pearson.ln() - 3.0f64.ln(),
        phi_pearson.ln() + 3.0f64.ln(),
        1e-4,
    );
    let phi = log_phi.exp();
    let log_likelihood = log_likelihood(design, y, &coef, phi, power_hat)?;

    let se = standard_errors(design, &coef, phi, power_hat);
    let fit = TweedieFit {
        coef,
        phi,
        power: power_hat,
    };
    let report = FitReport {
        log_likelihood,
        iterations,
        converged: true,
        coefficient_standard_errors: se,
    };
    Ok((fit, report, profile))
}

/// IRLS + Pearson dispersion + exact log-likelihood at one fixed power.
fn profile_point(
    design: &DMatrix<f64>,
    y: &DVector<f64>,
    power: f64,
    warm: &DVector<f64>,
) -> Result<(DVector<f64>, usize, f64, f64)> {
    let (coef, iterations) = irls(design, y, power, warm)?;
    let eta = design * &coef;
    let mu = eta.map(|e| e.clamp(-300.0, 300.0).exp());
    let d = design.ncols();
    let mut pearson = 0.0;
    for i in 0..y.len() {
        let r = y[i] - mu[i];
        pearson += r * r / mu[i].powf(power);
    }
    let phi = pearson / (y.len() - d) as f64;
    let ll = log_likelihood(design, y, &coef, phi, power)?;
    Ok((coef, iterations, ll, phi))
}

/// Quasi-likelihood IRLS at fixed power: variance μ^π, log link, hence
/// working weights μ^{2-π}.
fn irls(
    design: &DMatrix<f64>,
    y: &DVector<f64>,
    power: f64,
    warm: &DVector<f64>,
) -> Result<(DVector<f64>, usize)> {
    let n = design.nrows();
    let mut coef = warm.clone();
    for iteration in 1..=MAX_ITER {
        let eta = design * &coef;
        let mut weighted = design.clone();
        let mut rhs_vec = DVector::<f64>::zeros(n);
        for i in 0..n {
            let e = eta[i].clamp(-300.0, 300.0);
            let mu = e.exp();
            let w = mu.powf(2.0 - power);
            let z = e + (y[i] - mu) / mu;
            weighted.row_mut(i).scale_mut(w);
            rhs_vec[i] = w * z;
        }
        let gram = design.tr_mul(&weighted);
        let rhs = design.tr_mul(&rhs_vec);
        let next = nalgebra::Cholesky::new(gram)
            .ok_or_else(|| Error::NoConvergence {
                context: format!("Tweedie IRLS weighted system at power {power}"),
                iterations: iteration,
                last_change: f64::NAN,
            })?
            .solve(&rhs);
        let change = (&next - &coef).amax();
        coef = next;
        if change <= 1e-10 * (1.0 + coef.amax()) {
            return Ok((coef, iteration));
        }
    }
    Err(Error::NoConvergence {
        context: format!("Tweedie IRLS at power {power}"),
        iterations: MAX_ITER,
        last_change: f64::NAN,
    })
}

/// Exact series log-likelihood Σ log f(yᵢ); zeros contribute -λᵢ.
fn log_likelihood(
    design: &DMatrix<f64>,
    y: &DVector<f64>,
    coef: &DVector<f64>,
    phi: f64,
    power: f64,
) -> Result<f64> {
    let eta = design * coef;
    let mut ll = 0.0;
    for i in 0..y.len() {
        let mu = eta[i].clamp(-300.0, 300.0).exp();
        let params = TweedieParams::new(mu, phi, power)?;
        if y[i] == 0.0 {
            ll -= CpgDerived::from_params(&params).lambda;
        } else {
            ll += tweedie_logpdf(y[i], &params)?;
        }
    }
    Ok(ll)
}

fn standard_errors(
    design: &DMatrix<f64>,
    coef: &DVector<f64>,
    phi: f64,
    power: f64,
) -> Option<DVector<f64>> {
    let eta = design * coef;
    let mut weighted = design.clone();
    for i in 0..design.nrows() {
        let mu = eta[i].clamp(-300.0, 300.0).exp();
        weighted.row_mut(i).scale_mut(mu.powf(2.0 - power));
    }
    let info = design.tr_mul(&weighted) / phi;
    let inv = nalgebra::Cholesky::new(info)?.inverse();
    Some(DVector::from_iterator(
        design.ncols(),
        (0..design.ncols()).map(|j| inv[(j, j)].sqrt()),
    ))
}
