//! Tweedie GLM fitter checks: the intercept-only mean identity, power
//! and coefficient recovery on self-generated compound Poisson–gamma
//! data, and the shape of the power profile.

mod common;

use common::tweedie_regression_data;
use nalgebra::{DMatrix, DVector};
use semidiag::models::fit_tweedie;

#[test]
fn intercept_only_reproduces_mean() {
    let design = DMatrix::from_element(40, 1, 1.0);
    let mut y = DVector::zeros(40);
    for i in 0..40 {
        y[i] = match i % 4 {
            0 => 0.0,
            1 => 0.5,
            2 => 1.75,
            _ => 3.0,
        };
    }
    let mean = y.sum() / 40.0;
    let (fit, report, _) = fit_tweedie(&design, &y).unwrap();
    assert!(
        (fit.coef[0] - mean.ln()).abs() < 1e-8,
        "coef {} vs log-mean {}",
        fit.coef[0],
        mean.ln()
    );
    assert!(report.converged);
}

#[test]
fn recovers_self_generated_parameters_and_profile_shape() {
    let (design, y) = tweedie_regression_data(100_000, 0.5, 1.0, 1.0, 1.5, 401);
    let (fit, report, profile) = fit_tweedie(&design, &y).unwrap();

    assert!((fit.power - 1.5).abs() < 0.05, "power {}", fit.power);
    assert!((fit.coef[0] - 0.5).abs() < 0.05, "beta0 {}", fit.coef[0]);
    assert!((fit.coef[1] - 1.0).abs() < 0.05, "beta1 {}", fit.coef[1]);
    assert!((fit.phi - 1.0).abs() < 0.1, "phi {}", fit.phi);
    assert!(report.converged);
    assert!(report.log_likelihood.is_finite());

    // Profile log-likelihood peaks near the generating power: the value
    // at 1.50 beats the values 0.3 away on either side.
    let at = |target: f64| {
        profile
            .iter()
            .find(|p| (p.power - target).abs() < 1e-9)
            .expect("grid point present")
    };
    let center = at(1.50);
    assert!(center.converged);
    assert!(center.log_likelihood > at(1.20).log_likelihood);
    assert!(center.log_likelihood > at(1.80).log_likelihood);
    assert_eq!(profile.len(), 17);
}

#[test]
fn rejects_missing_zero_or_positive_parts() {
    let design = DMatrix::from_element(10, 1, 1.0);
    let all_pos = DVector::from_element(10, 2.0);
    assert!(fit_tweedie(&design, &all_pos).is_err());
    let all_zero = DVector::zeros(10);
    assert!(fit_tweedie(&design, &all_zero).is_err());
}
