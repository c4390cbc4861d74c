//! Tobit fitter checks: recovery at the simulation-study parameters,
//! the vanishing-censoring limit against ordinary least squares, and
//! stationarity via Nelder–Mead polish.

mod common;

use common::{nelder_mead, tobit_data};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use semidiag::models::fit_tobit;
use semidiag::special::normal_cdf;

#[test]
fn recovers_generating_parameters() {
    let (design, y) = tobit_data(100_000, 0.2, 1.0, 307);
    let (fit, report) = fit_tobit(&design, &y, 0.0).unwrap();
    for (got, want) in fit.coef.iter().zip([2.0, 2.0, 2.0]) {
        assert!((got - want).abs() < 0.02, "coef {got} vs {want}");
    }
    assert!((fit.sigma - 0.2).abs() < 0.01, "sigma {}", fit.sigma);
    assert!(report.converged);
}

#[test]
fn approaches_least_squares_as_censoring_vanishes() {
    // Mean 2.5 + x with x ~ Unif(-1,1) and sd 0.7 censors a fraction of
    // a percent of draws: enough to exercise the censored branch, too
    // few to move the estimate away from least squares.
    let n = 100_000;
    let mut rng = ChaCha12Rng::seed_from_u64(311);
    let norm = Normal::new(0.0, 1.0).unwrap();
    let mut design = DMatrix::from_element(n, 2, 1.0);
    let mut y = DVector::zeros(n);
    let mut censored = 0;
    for i in 0..n {
        let x = rng.gen_range(-1.0..1.0);
        design[(i, 1)] = x;
        let latent = 2.5 + x + 0.7 * norm.sample(&mut rng);
        if latent < 0.0 {
            censored += 1;
            y[i] = 0.0;
        } else {
            y[i] = latent;
        }
    }
    assert!(censored > 0, "want a nonzero censored fraction");

    let gram = design.tr_mul(&design);
    let ols = nalgebra::Cholesky::new(gram)
        .unwrap()
        .solve(&design.tr_mul(&y));
    let (fit, _) = fit_tobit(&design, &y, 0.0).unwrap();
    for j in 0..2 {
        assert!(
            (fit.coef[j] - ols[j]).abs() < 0.02,
            "coef {} vs OLS {}",
            fit.coef[j],
            ols[j]
        );
    }
}

#[test]
fn matches_direct_maximization() {
    let n = 60;
    let mut rng = ChaCha12Rng::seed_from_u64(313);
    let norm = Normal::new(0.0, 1.0).unwrap();
    let mut design = DMatrix::from_element(n, 2, 1.0);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let x = rng.gen_range(-1.0..1.0);
        design[(i, 1)] = x;
        let latent: f64 = 0.5 + 2.0 * x + 0.3 * norm.sample(&mut rng);
        y[i] = latent.max(0.0);
    }
    let (fit, _) = fit_tobit(&design, &y, 0.0).unwrap();

    let neg_mean_loglik = |theta: &[f64]| -> f64 {
        let sigma = theta[2].exp();
        let mut acc = 0.0;
        for i in 0..n {
            let eta = theta[0] + theta[1] * design[(i, 1)];
            acc += if y[i] <= 0.0 {
                normal_cdf(-eta / sigma).max(1e-300).ln()
            } else {
                let r = (y[i] - eta) / sigma;
                -0.5 * (2.0 * std::f64::consts::PI).ln() - sigma.ln() - 0.5 * r * r
            };
        }
        if acc.is_finite() {
            -acc / n as f64
        } else {
            f64::INFINITY
        }
    };
    let theta_hat = [fit.coef[0], fit.coef[1], fit.sigma.ln()];
    let polished = nelder_mead(&neg_mean_loglik, &theta_hat, 0.01, 6000);
    let improvement = neg_mean_loglik(&theta_hat) - neg_mean_loglik(&polished);
    assert!(improvement <= 1e-8, "improved by {improvement}");
    for j in 0..3 {
        assert!(
            (theta_hat[j] - polished[j]).abs() < 1e-5,
            "coordinate {j}: {} vs {}",
            theta_hat[j],
            polished[j]
        );
    }
}

#[test]
fn rejects_fully_observed_or_fully_censored_data() {
    let design = DMatrix::from_element(6, 1, 1.0);
    let positive = DVector::from_element(6, 1.5);
    assert!(fit_tobit(&design, &positive, 0.0).is_err());
    let zeros = DVector::zeros(6);
    assert!(fit_tobit(&design, &zeros, 0.0).is_err());
}
