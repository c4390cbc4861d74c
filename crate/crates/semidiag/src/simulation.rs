//! Seeded data generators and the replication scenario runner.
//!
//! Three generators cover the standard benchmark settings for
//! semicontinuous diagnostics: a two-part logistic+gamma model with a
//! tunable zero fraction, a Tobit design with uniform covariates and a
//! tunable noise level, and a compound Poisson-gamma (Tweedie) design.
//! `run_scenario` replays a generator across seeded replications, fits a
//! list of model-family arms to each draw, and aggregates the KS distance
//! of the residuals from uniformity per arm. Identical configurations
//! produce bit-identical results; replications are independent jobs
//! seeded by base seed plus replication index.

use crate::diagnostics::{ks_uniform, qq_against_uniform, QQData};
use crate::error::{Error, Result};
use crate::models::{
    fit_tobit, fit_tweedie, fit_two_part_gamma, fit_two_part_gb2, Dataset, SemicontinuousModel,
};
use crate::residuals::residuals_for_model;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Bernoulli, Distribution, Gamma, Normal, Poisson, Uniform};
use rayon::prelude::*;
use std::fmt::Write as _;

/// Zero-part coefficients (β₀, −2, −1) on the logit scale and positive
/// part mean exp(−1 − X₁ − 2X₂) with gamma dispersion 0.5: X₁ standard
/// normal, X₂ Bernoulli(0.4). The intercept `beta0_zero` moves the zero
/// fraction: 1 → ≈59%, −1 → ≈31%, −2 → ≈19%.
pub fn gen_two_part_gamma(n: usize, beta0_zero: f64, seed: u64) -> Dataset {
    assert!(n > 0, "need at least one row");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let norm = Normal::new(0.0, 1.0).unwrap();
    let bern = Bernoulli::new(0.4).unwrap();

    let mut design = DMatrix::from_element(n, 3, 1.0);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let x1 = norm.sample(&mut rng);
        let x2 = if bern.sample(&mut rng) { 1.0 } else { 0.0 };
        design[(i, 1)] = x1;
        design[(i, 2)] = x2;
        let p0 = logistic(beta0_zero - 2.0 * x1 - x2);
        if rng.gen::<f64>() < p0 {
            y[i] = 0.0;
        } else {
            let mean = (-1.0 - x1 - 2.0 * x2).exp();
            // shape 1/dispersion = 2, scale mean/2
            y[i] = Gamma::new(2.0, mean / 2.0).unwrap().sample(&mut rng);
        }
    }
    Dataset::new(
        design,
        y,
        vec!["intercept".into(), "x1".into(), "x2".into()],
    )
    .expect("generated data is valid")
}

/// Latent Y* = 2 + 2X₁ + 2X₂ + sd·N(0,1) with X₁, X₂ uniform on
/// (−halfwidth, halfwidth); the observed outcome censors Y* below zero.
/// Returns the censored dataset together with the latent draws.
pub fn gen_tobit(n: usize, sd: f64, covariate_halfwidth: f64, seed: u64) -> (Dataset, Vec<f64>) {
    assert!(n > 0, "need at least one row");
    assert!(sd > 0.0, "noise standard deviation must be positive");
    assert!(covariate_halfwidth > 0.0, "half-width must be positive");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let norm = Normal::new(0.0, 1.0).unwrap();
    let unif = Uniform::new(-covariate_halfwidth, covariate_halfwidth);

    let mut design = DMatrix::from_element(n, 3, 1.0);
    let mut y = DVector::zeros(n);
    let mut latent = Vec::with_capacity(n);
    for i in 0..n {
        let x1 = unif.sample(&mut rng);
        let x2 = unif.sample(&mut rng);
        design[(i, 1)] = x1;
        design[(i, 2)] = x2;
        let star = 2.0 + 2.0 * x1 + 2.0 * x2 + sd * norm.sample(&mut rng);
        latent.push(star);
        y[i] = star.max(0.0);
    }
    let data = Dataset::new(
        design,
        y,
        vec!["intercept".into(), "x1".into(), "x2".into()],
    )
    .expect("generated data is valid");
    (data, latent)
}

/// Compound Poisson-gamma outcome with mean exp(−1 + 0.3·X₁), power 1.5,
/// and dispersion 1, X₁ standard normal; roughly 30% zeros. A correctly
/// specified Tweedie benchmark for the residual diagnostics.
pub fn gen_tweedie_cpg(n: usize, seed: u64) -> Dataset {
    assert!(n > 0, "need at least one row");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let norm = Normal::new(0.0, 1.0).unwrap();

    let mut design = DMatrix::from_element(n, 2, 1.0);
    let mut y = DVector::zeros(n);
    for i in 0..n {
        let x1: f64 = norm.sample(&mut rng);
        design[(i, 1)] = x1;
        let mu = (-1.0 + 0.3 * x1).exp();
        // power 1.5, phi 1: jump count Poisson(2√μ), jumps Gamma(1, √μ/2)
        let lambda = 2.0 * mu.sqrt();
        let count = Poisson::new(lambda).unwrap().sample(&mut rng);
        let count = count as u64;
        if count > 0 {
            let scale = 0.5 * mu.sqrt();
            y[i] = Gamma::new(count as f64, scale).unwrap().sample(&mut rng);
        }
    }
    Dataset::new(design, y, vec!["intercept".into(), "x1".into()])
        .expect("generated data is valid")
}

fn logistic(eta: f64) -> f64 {
    1.0 / (1.0 + f64::exp(-eta))
}

/// Which data-generating process a scenario replays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    TwoPartGamma,
    Tobit,
    TweedieCpg,
}

impl GeneratorKind {
    pub fn label(self) -> &'static str {
        match self {
            GeneratorKind::TwoPartGamma => "two_part_gamma",
            GeneratorKind::Tobit => "tobit",
            GeneratorKind::TweedieCpg => "tweedie",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "two_part_gamma" => Ok(GeneratorKind::TwoPartGamma),
            "tobit" => Ok(GeneratorKind::Tobit),
            "tweedie" => Ok(GeneratorKind::TweedieCpg),
            other => Err(Error::domain(format!(
                "unknown generator '{other}' (expected two_part_gamma, tobit, or tweedie)"
            ))),
        }
    }
}

/// A model family fitted to each replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitArm {
    TwoPartGamma,
    TwoPartGb2,
    Tweedie,
    TobitFull,
    TobitMissingX2,
}

impl FitArm {
    pub fn label(self) -> &'static str {
        match self {
            FitArm::TwoPartGamma => "twopart-gamma",
            FitArm::TwoPartGb2 => "twopart-gb2",
            FitArm::Tweedie => "tweedie",
            FitArm::TobitFull => "tobit",
            FitArm::TobitMissingX2 => "tobit-missing-x2",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "twopart-gamma" => Ok(FitArm::TwoPartGamma),
            "twopart-gb2" => Ok(FitArm::TwoPartGb2),
            "tweedie" => Ok(FitArm::Tweedie),
            "tobit" => Ok(FitArm::TobitFull),
            "tobit-missing-x2" => Ok(FitArm::TobitMissingX2),
            other => Err(Error::domain(format!(
                "unknown fit arm '{other}' (expected twopart-gamma, twopart-gb2, tweedie, tobit, or tobit-missing-x2)"
            ))),
        }
    }
}

/// Full description of a scenario: which generator, at what size, which
/// arms to fit, and how many seeded replications.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub generator: GeneratorKind,
    pub n: usize,
    pub seed: u64,
    pub replications: usize,
    pub fit_arms: Vec<FitArm>,
    /// Zero-part intercept for the two-part generator.
    pub beta0_zero: f64,
    /// Noise standard deviation for the Tobit generator.
    pub sd: f64,
    /// Covariate half-range for the Tobit generator.
    pub halfwidth: f64,
}

impl ScenarioConfig {
    /// Defaults per generator: n = 500, seed = 1, 200 replications, the
    /// correctly specified arm plus its usual misspecified rival.
    pub fn default_for(generator: GeneratorKind) -> Self {
        let fit_arms = match generator {
            GeneratorKind::TwoPartGamma => vec![FitArm::TwoPartGamma, FitArm::Tweedie],
            GeneratorKind::Tobit => vec![FitArm::TobitFull, FitArm::TobitMissingX2],
            GeneratorKind::TweedieCpg => vec![FitArm::Tweedie],
        };
        ScenarioConfig {
            generator,
            n: 500,
            seed: 1,
            replications: 200,
            fit_arms,
            beta0_zero: -1.0,
            sd: 0.9,
            halfwidth: 1.0,
        }
    }

    /// Parses a flat key=value file: one `key=value` per line, `#`
    /// comments and blank lines ignored. Recognized keys: generator, n,
    /// seed, replications, arms (comma-separated), beta0_zero, sd,
    /// halfwidth. Unset keys take the generator's defaults.
    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::data(lineno, format!("expected key=value, got '{line}'"))
            })?;
            pairs.push((lineno, key.trim().to_string(), value.trim().to_string()));
        }

        let mut generator = GeneratorKind::TwoPartGamma;
        for (_, key, value) in &pairs {
            if key == "generator" {
                generator = GeneratorKind::parse(value)?;
            }
        }
        let mut config = ScenarioConfig::default_for(generator);

        let parse_err = |lineno: usize, key: &str, value: &str| {
            Error::data(lineno, format!("cannot parse {key}='{value}'"))
        };
        for (lineno, key, value) in &pairs {
            match key.as_str() {
                "generator" => {}
                "n" => config.n = value.parse().map_err(|_| parse_err(*lineno, key, value))?,
                "seed" => {
                    config.seed = value.parse().map_err(|_| parse_err(*lineno, key, value))?
                }
                "replications" => {
                    config.replications =
                        value.parse().map_err(|_| parse_err(*lineno, key, value))?
                }
                "arms" => {
                    config.fit_arms = value
                        .split(',')
                        .map(|piece| FitArm::parse(piece.trim()))
                        .collect::<Result<_>>()?;
                }
                "beta0_zero" => {
                    config.beta0_zero =
                        value.parse().map_err(|_| parse_err(*lineno, key, value))?
                }
                "sd" => config.sd = value.parse().map_err(|_| parse_err(*lineno, key, value))?,
                "halfwidth" => {
                    config.halfwidth =
                        value.parse().map_err(|_| parse_err(*lineno, key, value))?
                }
                other => {
                    return Err(Error::data(*lineno, format!("unknown key '{other}'")));
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 10 {
            return Err(Error::domain(format!(
                "scenario size n must be at least 10, got {}",
                self.n
            )));
        }
        if self.replications < 1 {
            return Err(Error::domain("need at least one replication"));
        }
        if self.fit_arms.is_empty() {
            return Err(Error::domain("need at least one fit arm"));
        }
        if !(self.sd > 0.0) {
            return Err(Error::domain(format!(
                "noise standard deviation must be positive, got {}",
                self.sd
            )));
        }
        if !(self.halfwidth > 0.0) {
            return Err(Error::domain(format!(
                "covariate half-width must be positive, got {}",
                self.halfwidth
            )));
        }
        if self.generator == GeneratorKind::TweedieCpg
            && self.fit_arms.contains(&FitArm::TobitMissingX2)
        {
            return Err(Error::domain(
                "the tweedie generator has no x2 column to drop",
            ));
        }
        Ok(())
    }
}

/// Outcome of one (replication, arm) cell.
#[derive(Debug, Clone)]
pub struct ArmReplication {
    pub replication: usize,
    pub arm: FitArm,
    /// KS distance of the proposed residuals from Uniform(0,1); absent
    /// when the fit failed.
    pub ks: Option<f64>,
    pub converged: bool,
    pub message: Option<String>,
}

/// Distribution summary of the per-replication KS values for one arm.
#[derive(Debug, Clone)]
pub struct ArmSummary {
    pub arm: FitArm,
    pub successes: usize,
    pub failures: usize,
    pub mean_ks: f64,
    pub min_ks: f64,
    pub q25_ks: f64,
    pub median_ks: f64,
    pub q75_ks: f64,
    pub max_ks: f64,
}

/// Everything a scenario run produced: one row per (replication, arm),
/// per-arm aggregates over the successful fits, and uniform-scale QQ data
/// from the first replication of each arm.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub replications: Vec<ArmReplication>,
    pub summaries: Vec<ArmSummary>,
    pub first_rep_qq: Vec<(FitArm, QQData)>,
}

impl ScenarioResult {
    /// One CSV row per (replication, arm): `rep,arm,ks,converged`.
    pub fn replications_csv(&self) -> String {
        let mut out = String::from("rep,arm,ks,converged\n");
        for cell in &self.replications {
            let ks = cell.ks.unwrap_or(f64::NAN);
            let _ = writeln!(
                out,
                "{},{},{},{}",
                cell.replication,
                cell.arm.label(),
                ks,
                cell.converged
            );
        }
        out
    }

    /// One CSV row per arm with the KS distribution summary.
    pub fn summary_csv(&self) -> String {
        let mut out =
            String::from("arm,successes,failures,mean_ks,min_ks,q25_ks,median_ks,q75_ks,max_ks\n");
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                s.arm.label(),
                s.successes,
                s.failures,
                s.mean_ks,
                s.min_ks,
                s.q25_ks,
                s.median_ks,
                s.q75_ks,
                s.max_ks
            );
        }
        out
    }
}

fn generate(config: &ScenarioConfig, seed: u64) -> Dataset {
    match config.generator {
        GeneratorKind::TwoPartGamma => gen_two_part_gamma(config.n, config.beta0_zero, seed),
        GeneratorKind::Tobit => gen_tobit(config.n, config.sd, config.halfwidth, seed).0,
        GeneratorKind::TweedieCpg => gen_tweedie_cpg(config.n, seed),
    }
}

fn drop_x2(data: &Dataset) -> Result<Dataset> {
    let d = data.d();
    if d < 3 {
        return Err(Error::domain("no x2 column to drop"));
    }
    let design = data.design().clone().remove_column(d - 1);
    let mut names = data.column_names().to_vec();
    names.pop();
    Dataset::new(design, data.response().clone(), names)
}

fn fit_arm_model(
    arm: FitArm,
    data: &Dataset,
) -> Result<(Box<dyn SemicontinuousModel>, Dataset)> {
    match arm {
        FitArm::TwoPartGamma => {
            let (fit, _) = fit_two_part_gamma(data)?;
            Ok((Box::new(fit), data.clone()))
        }
        FitArm::TwoPartGb2 => {
            let (fit, _) = fit_two_part_gb2(data)?;
            Ok((Box::new(fit), data.clone()))
        }
        FitArm::Tweedie => {
            let (fit, _, _) = fit_tweedie(data.design(), data.response())?;
            Ok((Box::new(fit), data.clone()))
        }
        FitArm::TobitFull => {
            let (fit, _) = fit_tobit(data.design(), data.response(), 0.0)?;
            Ok((Box::new(fit), data.clone()))
        }
        FitArm::TobitMissingX2 => {
            let reduced = drop_x2(data)?;
            let (fit, _) = fit_tobit(reduced.design(), reduced.response(), 0.0)?;
            Ok((Box::new(fit), reduced))
        }
    }
}

fn run_arm(arm: FitArm, data: &Dataset, replication: usize, want_qq: bool)
    -> (ArmReplication, Option<QQData>) {
    let outcome = fit_arm_model(arm, data).and_then(|(model, arm_data)| {
        let set = residuals_for_model(model.as_ref(), &arm_data)?;
        let report = ks_uniform(&set.proposed)?;
        let qq = if want_qq {
            Some(qq_against_uniform(&set.proposed)?)
        } else {
            None
        };
        Ok((report.ks_statistic, qq))
    });
    match outcome {
        Ok((ks, qq)) => (
            ArmReplication {
                replication,
                arm,
                ks: Some(ks),
                converged: true,
                message: None,
            },
            qq,
        ),
        Err(err) => (
            ArmReplication {
                replication,
                arm,
                ks: None,
                converged: false,
                message: Some(err.to_string()),
            },
            None,
        ),
    }
}

/// Interpolated quantile (type 7) of an ascending-sorted slice.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    if m == 1 {
        return sorted[0];
    }
    let pos = q * (m - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Runs every replication of the configured scenario: replication r uses
/// seed `config.seed + r`, so any execution order (including parallel)
/// gives identical results. Failed fits are recorded per cell and
/// excluded from the aggregates.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioResult> {
    config.validate()?;

    let per_rep: Vec<Vec<(ArmReplication, Option<QQData>)>> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let data = generate(config, config.seed.wrapping_add(r as u64));
            config
                .fit_arms
                .iter()
                .map(|&arm| run_arm(arm, &data, r, r == 0))
                .collect()
        })
        .collect();

    let mut replications = Vec::with_capacity(config.replications * config.fit_arms.len());
    let mut first_rep_qq = Vec::new();
    for cells in per_rep {
        for (cell, qq) in cells {
            if let Some(qq) = qq {
                first_rep_qq.push((cell.arm, qq));
            }
            replications.push(cell);
        }
    }

    let mut summaries = Vec::with_capacity(config.fit_arms.len());
    for &arm in &config.fit_arms {
        let mut values: Vec<f64> = replications
            .iter()
            .filter(|c| c.arm == arm)
            .filter_map(|c| c.ks)
            .collect();
        values.sort_unstable_by(f64::total_cmp);
        let successes = values.len();
        let failures = config.replications - successes;
        let (mean, min, q25, median, q75, max) = if successes > 0 {
            (
                values.iter().sum::<f64>() / successes as f64,
                values[0],
                quantile_sorted(&values, 0.25),
                quantile_sorted(&values, 0.5),
                quantile_sorted(&values, 0.75),
                values[successes - 1],
            )
        } else {
            (
                f64::NAN,
                f64::NAN,
                f64::NAN,
                f64::NAN,
                f64::NAN,
                f64::NAN,
            )
        };
        summaries.push(ArmSummary {
            arm,
            successes,
            failures,
            mean_ks: mean,
            min_ks: min,
            q25_ks: q25,
            median_ks: median,
            q75_ks: q75,
            max_ks: max,
        });
    }

    Ok(ScenarioResult {
        replications,
        summaries,
        first_rep_qq,
    })
}
