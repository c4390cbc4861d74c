//! Logistic and gamma GLM fitter checks: closed forms, recovery of the
//! generating coefficients at large n, and agreement with direct
//! likelihood maximization by Nelder–Mead.

mod common;

use common::{inv_logit, nelder_mead, severity_gamma_data, two_part_gamma_data};
use nalgebra::{DMatrix, DVector};
use semidiag::models::{fit_gamma_glm, fit_logistic};
use semidiag::Error;

#[test]
fn logistic_intercept_only_closed_form() {
    let design = DMatrix::from_element(10, 1, 1.0);
    let is_zero = [
        true, true, true, false, false, false, false, false, false, false,
    ];
    let (coef, report) = fit_logistic(&design, &is_zero).unwrap();
    let expected = (0.3f64 / 0.7).ln();
    assert!((coef[0] - expected).abs() < 1e-9, "got {}", coef[0]);
    assert!(report.converged);
}

#[test]
fn logistic_recovers_generating_coefficients() {
    let (design, y) = two_part_gamma_data(100_000, -1.0, 11);
    let is_zero: Vec<bool> = y.iter().map(|&v| v == 0.0).collect();
    let (coef, _) = fit_logistic(&design, &is_zero).unwrap();
    for (got, want) in coef.iter().zip([-1.0, -2.0, -1.0]) {
        assert!((got - want).abs() < 0.05, "coef {got} vs {want}");
    }
}

#[test]
fn logistic_matches_nelder_mead_maximization() {
    let (design, y) = two_part_gamma_data(50, -1.0, 23);
    let is_zero: Vec<bool> = y.iter().map(|&v| v == 0.0).collect();
    let (coef, _) = fit_logistic(&design, &is_zero).unwrap();

    let neg_loglik = |beta: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..design.nrows() {
            let eta: f64 = (0..3).map(|j| beta[j] * design[(i, j)]).sum();
            let p = inv_logit(eta).clamp(1e-300, 1.0 - 1e-16);
            acc -= if is_zero[i] { p.ln() } else { (1.0 - p).ln() };
        }
        acc
    };
    let rough = nelder_mead(neg_loglik, &[0.0, 0.0, 0.0], 0.5, 4000);
    let polished = nelder_mead(neg_loglik, &rough, 0.05, 4000);
    for j in 0..3 {
        assert!(
            (coef[j] - polished[j]).abs() < 1e-5,
            "coef {} vs oracle {}",
            coef[j],
            polished[j]
        );
    }
}

#[test]
fn logistic_score_equations_hold_at_solution() {
    let (design, y) = two_part_gamma_data(400, -1.0, 31);
    let is_zero: Vec<bool> = y.iter().map(|&v| v == 0.0).collect();
    let (coef, _) = fit_logistic(&design, &is_zero).unwrap();
    let eta = &design * &coef;
    let fitted = eta.map(inv_logit);
    let observed = DVector::from_iterator(
        y.len(),
        is_zero.iter().map(|&z| if z { 1.0 } else { 0.0 }),
    );
    let score = design.tr_mul(&(observed - fitted));
    assert!(score.amax() <= 1e-8, "score sup-norm {}", score.amax());
}

#[test]
fn logistic_detects_separation() {
    let n = 40;
    let mut design = DMatrix::from_element(n, 2, 1.0);
    let mut is_zero = vec![false; n];
    for i in 0..n {
        let x = i as f64 - 19.5;
        design[(i, 1)] = x;
        is_zero[i] = x > 0.0;
    }
    match fit_logistic(&design, &is_zero) {
        Err(Error::Separation { max_abs_coef, .. }) => assert!(max_abs_coef > 30.0),
        other => panic!("expected separation error, got {other:?}"),
    }
}

#[test]
fn logistic_rejects_constant_indicator_and_rank_deficiency() {
    let design = DMatrix::from_element(5, 1, 1.0);
    assert!(fit_logistic(&design, &[true; 5]).is_err());

    let mut dup = DMatrix::from_element(6, 3, 1.0);
    for i in 0..6 {
        dup[(i, 1)] = i as f64;
        dup[(i, 2)] = i as f64;
    }
    let is_zero = [true, false, true, false, true, false];
    assert!(matches!(
        fit_logistic(&dup, &is_zero),
        Err(Error::RankDeficient { .. })
    ));
}

#[test]
fn gamma_intercept_only_closed_form() {
    let design = DMatrix::from_element(4, 1, 1.0);
    let y = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
    let (coef, _, report) = fit_gamma_glm(&design, &y).unwrap();
    assert!((coef[0] - 2.5f64.ln()).abs() < 1e-9, "got {}", coef[0]);
    assert!(report.converged);
}

#[test]
fn gamma_recovers_generating_coefficients_and_dispersion() {
    let (design, y) = severity_gamma_data(100_000, 47);
    let (coef, dispersion, _) = fit_gamma_glm(&design, &y).unwrap();
    for (got, want) in coef.iter().zip([-1.0, -1.0, -2.0]) {
        assert!((got - want).abs() < 0.05, "coef {got} vs {want}");
    }
    assert!((dispersion - 0.5).abs() < 0.05, "dispersion {dispersion}");
}

#[test]
fn gamma_matches_nelder_mead_maximization() {
    let (design, y) = severity_gamma_data(50, 59);
    let (coef, _, _) = fit_gamma_glm(&design, &y).unwrap();

    // At fixed shape k the likelihood in β is concave; the β maximizer
    // does not depend on k, so k = 2 serves the oracle.
    let neg_loglik = |beta: &[f64]| -> f64 {
        let k = 2.0;
        let mut acc = 0.0;
        for i in 0..design.nrows() {
            let eta: f64 = (0..3).map(|j| beta[j] * design[(i, j)]).sum();
            if eta.abs() > 200.0 {
                return f64::INFINITY;
            }
            let mu = eta.exp();
            acc -= (k - 1.0) * y[i].ln() - k * (mu / k).ln() - y[i] * k / mu;
        }
        acc
    };
    let rough = nelder_mead(neg_loglik, &[0.0, 0.0, 0.0], 0.5, 4000);
    let polished = nelder_mead(neg_loglik, &rough, 0.05, 4000);
    for j in 0..3 {
        assert!(
            (coef[j] - polished[j]).abs() < 1e-5,
            "coef {} vs oracle {}",
            coef[j],
            polished[j]
        );
    }
}

#[test]
fn gamma_pearson_dispersion_matches_direct_formula() {
    let (design, y) = severity_gamma_data(200, 77);
    let (coef, dispersion, _) = fit_gamma_glm(&design, &y).unwrap();
    let eta = &design * &coef;
    let mut acc = 0.0;
    for i in 0..y.len() {
        let mu = eta[i].exp();
        let r = (y[i] - mu) / mu;
        acc += r * r;
    }
    let expected = acc / (y.len() - 3) as f64;
    assert!((dispersion - expected).abs() < 1e-12);
}

#[test]
fn gamma_score_equations_hold_at_solution() {
    let (design, y) = severity_gamma_data(300, 83);
    let (coef, _, _) = fit_gamma_glm(&design, &y).unwrap();
    let eta = &design * &coef;
    let score_vec = DVector::from_iterator(
        y.len(),
        (0..y.len()).map(|i| {
            let mu = eta[i].exp();
            (y[i] - mu) / mu
        }),
    );
    let score = design.tr_mul(&score_vec);
    assert!(score.amax() <= 1e-8, "score sup-norm {}", score.amax());
}

#[test]
fn gamma_rejects_nonpositive_response() {
    let design = DMatrix::from_element(4, 1, 1.0);
    let y = DVector::from_vec(vec![1.0, 0.0, 3.0, 4.0]);
    match fit_gamma_glm(&design, &y) {
        Err(Error::Data { index, .. }) => assert_eq!(index, 1),
        other => panic!("expected data error, got {other:?}"),
    }
}
