//! The cross-family contract: conditional_cdf(0, x) equals predict_p0(x)
//! exactly, the CDF is nondecreasing and reaches one, and refitting on
//! data regenerated from a fitted model recovers its parameters.

mod common;

use common::{inv_logit, two_part_gamma_data};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, Normal};
use semidiag::models::{
    fit_two_part_gamma, Dataset, PositiveFamily, SemicontinuousModel, TobitFit, TweedieFit,
    TwoPartFit,
};
use semidiag::special::{gamma_quantile, GammaParams};

fn example_models() -> Vec<Box<dyn SemicontinuousModel>> {
    vec![
        Box::new(TwoPartFit {
            zero_coef: DVector::from_vec(vec![0.3, -0.5]),
            positive_coef: DVector::from_vec(vec![0.1, 0.4]),
            family: PositiveFamily::Gamma { dispersion: 0.5 },
        }),
        Box::new(TwoPartFit {
            zero_coef: DVector::from_vec(vec![-0.2, 0.7]),
            positive_coef: DVector::from_vec(vec![0.0, -0.3]),
            family: PositiveFamily::Gb2 {
                a: 1.8,
                p: 1.2,
                q: 2.4,
            },
        }),
        Box::new(TweedieFit {
            coef: DVector::from_vec(vec![0.5, 1.0]),
            phi: 1.0,
            power: 1.5,
        }),
        Box::new(TobitFit {
            coef: DVector::from_vec(vec![1.0, 2.0]),
            sigma: 0.4,
            limit: 0.0,
        }),
    ]
}

#[test]
fn cdf_at_zero_equals_p0_bit_for_bit() {
    for model in example_models() {
        for &x1 in &[-2.0, -0.5, 0.0, 0.3, 1.7] {
            let x = [1.0, x1];
            let p0 = model.predict_p0(&x);
            assert!(p0 > 0.0 && p0 < 1.0, "{}: p0 {p0}", model.family_name());
            let f0 = model.conditional_cdf(0.0, &x).unwrap();
            assert_eq!(
                f0.to_bits(),
                p0.to_bits(),
                "{}: cdf(0) {f0} vs p0 {p0}",
                model.family_name()
            );
        }
    }
}

#[test]
fn cdf_nondecreasing_and_reaches_one() {
    for model in example_models() {
        for &x1 in &[-1.0, 0.2, 1.1] {
            let x = [1.0, x1];
            let mut prev = 0.0;
            for i in 0..120 {
                let y = 0.1 * i as f64;
                let f = model.conditional_cdf(y, &x).unwrap();
                assert!(
                    f >= prev - 1e-12,
                    "{} not monotone at y={y}",
                    model.family_name()
                );
                prev = f;
            }
            let tail = model.conditional_cdf(1e8, &x).unwrap();
            assert!(tail > 1.0 - 1e-6, "{} tail {tail}", model.family_name());
        }
    }
}

#[test]
fn two_part_gamma_median_identity() {
    let model = TwoPartFit {
        zero_coef: DVector::from_vec(vec![0.3, -0.5]),
        positive_coef: DVector::from_vec(vec![0.1, 0.4]),
        family: PositiveFamily::Gamma { dispersion: 0.5 },
    };
    let x = [1.0, 0.6];
    let location = (0.1f64 + 0.4 * 0.6).exp();
    let params = GammaParams::new(2.0, location * 0.5).unwrap();
    let median = gamma_quantile(0.5, &params).unwrap();
    let p0 = model.predict_p0(&x);
    let f = model.conditional_cdf(median, &x).unwrap();
    assert!(
        (f - (p0 + (1.0 - p0) * 0.5)).abs() < 1e-10,
        "cdf at severity median: {f}"
    );
}

#[test]
fn tobit_p0_is_half_when_mean_sits_at_limit() {
    let model = TobitFit {
        coef: DVector::from_vec(vec![1.0, -2.0]),
        sigma: 0.7,
        limit: 0.0,
    };
    // x chosen so x'coef = limit
    let x = [1.0, 0.5];
    assert!((model.predict_p0(&x) - 0.5).abs() < 1e-15);
}

#[test]
fn two_part_p0_with_intercept_only_coefficients() {
    let model = TwoPartFit {
        zero_coef: DVector::from_vec(vec![0.8, 0.0]),
        positive_coef: DVector::from_vec(vec![0.0, 0.0]),
        family: PositiveFamily::Gamma { dispersion: 1.0 },
    };
    let expected = inv_logit(0.8);
    for &x1 in &[-3.0, 0.0, 9.0] {
        assert_eq!(model.predict_p0(&[1.0, x1]), expected);
    }
}

#[test]
fn refit_on_regenerated_data_recovers_parameters() {
    // Fit on a moderate sample, regenerate a large sample from the fitted
    // parameters, refit: the second fit lands within three standard
    // errors of the generator.
    let (design, y) = two_part_gamma_data(4_000, -1.0, 991);
    let data = Dataset::new(design, y, vec!["intercept".into(), "x1".into(), "x2".into()]).unwrap();
    let (fit, _) = fit_two_part_gamma(&data).unwrap();
    let dispersion = match fit.family {
        PositiveFamily::Gamma { dispersion } => dispersion,
        _ => unreachable!(),
    };

    let n = 100_000;
    let mut rng = ChaCha12Rng::seed_from_u64(997);
    let norm = Normal::new(0.0, 1.0).unwrap();
    let mut design = DMatrix::from_element(n, 3, 1.0);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let x1 = norm.sample(&mut rng);
        let x2: f64 = if rng.gen::<f64>() < 0.4 { 1.0 } else { 0.0 };
        design[(i, 1)] = x1;
        design[(i, 2)] = x2;
        let x = [1.0, x1, x2];
        let p0 = fit.predict_p0(&x);
        if rng.gen::<f64>() < p0 {
            y[i] = 0.0;
        } else {
            let mean = (fit.positive_coef[0] + fit.positive_coef[1] * x1
                + fit.positive_coef[2] * x2)
                .exp();
            y[i] = Gamma::new(1.0 / dispersion, mean * dispersion)
                .unwrap()
                .sample(&mut rng);
        }
    }
    let data = Dataset::new(design, y, vec!["intercept".into(), "x1".into(), "x2".into()]).unwrap();
    let (refit, report) = fit_two_part_gamma(&data).unwrap();

    let zero_se = report.zero.coefficient_standard_errors.as_ref().unwrap();
    let pos_se = report
        .positive
        .coefficient_standard_errors
        .as_ref()
        .unwrap();
    for j in 0..3 {
        assert!(
            (refit.zero_coef[j] - fit.zero_coef[j]).abs() <= 3.0 * zero_se[j],
            "zero coef {j}: {} vs {} (se {})",
            refit.zero_coef[j],
            fit.zero_coef[j],
            zero_se[j]
        );
        assert!(
            (refit.positive_coef[j] - fit.positive_coef[j]).abs() <= 3.0 * pos_se[j],
            "positive coef {j}: {} vs {} (se {})",
            refit.positive_coef[j],
            fit.positive_coef[j],
            pos_se[j]
        );
    }
}

#[test]
fn dataset_validation_rejects_bad_input() {
    let design = DMatrix::from_element(3, 1, 1.0);
    let y = DVector::from_vec(vec![0.0, 1.0, -0.5]);
    assert!(Dataset::new(design.clone(), y, vec!["intercept".into()]).is_err());

    let y = DVector::from_vec(vec![0.0, 1.0, 2.0]);
    let mut no_intercept = design.clone();
    no_intercept[(1, 0)] = 2.0;
    assert!(Dataset::new(no_intercept, y.clone(), vec!["intercept".into()]).is_err());

    let bad_names = Dataset::new(design, y, vec![]);
    assert!(bad_names.is_err());
}

#[test]
fn dataset_from_covariates_prepends_intercept() {
    let covariates = DMatrix::from_row_slice(3, 1, &[0.5, -1.0, 2.0]);
    let y = DVector::from_vec(vec![0.0, 1.0, 2.0]);
    let data = Dataset::from_covariates(&covariates, y, vec!["x1".into()]).unwrap();
    assert_eq!(data.d(), 2);
    assert_eq!(data.column_names(), &["intercept".to_string(), "x1".into()]);
    assert_eq!(data.design()[(1, 0)], 1.0);
    assert_eq!(data.design()[(2, 1)], 2.0);
    assert_eq!(data.zero_mask(), vec![true, false, false]);
    let (pos_design, pos_y) = data.positive_subset();
    assert_eq!(pos_design.nrows(), 2);
    assert_eq!(pos_y.len(), 2);
}
