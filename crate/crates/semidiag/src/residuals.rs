//! Residuals for semicontinuous regression models.
//!
//! The centerpiece is the uniformity-based residual r̂ᵢ = Ĥ(F̂(Yᵢ|Xᵢ)),
//! where Ĥ(s) = (s/n)·Σⱼ 1(p̂₀(Xⱼ) ≤ s) averages the fitted zero
//! probabilities over the sample. Under a correctly specified model the
//! residuals are approximately Uniform(0,1) — zeros included — so one QQ
//! plot against the uniform checks the whole conditional distribution.
//! The same construction applied to a held-out sample gives out-of-sample
//! errors. Baseline residuals (Cox-Snell, Pearson, Tweedie deviance,
//! randomized quantile) are provided for comparison.

use crate::error::{Error, Result};
use crate::models::{Dataset, SemicontinuousModel};
use crate::special::{normal_quantile, tweedie_unit_deviance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

/// The empirical estimator of H(s) = s·P(p₀(X) ≤ s), kept as a sorted
/// pool of fitted zero probabilities so evaluation is a binary search.
#[derive(Debug, Clone)]
pub struct HEstimator {
    sorted_p0: Vec<f64>,
}

impl HEstimator {
    /// Ĥ(s) = s · #{j : p̂₀(Xⱼ) ≤ s} / n. The comparison is inclusive, so
    /// a zero outcome's own pool entry always counts. The count ratio is
    /// formed first, keeping the result ≤ s even at the last bit.
    pub fn evaluate(&self, s: f64) -> f64 {
        let count = self.sorted_p0.partition_point(|&p| p <= s);
        s * (count as f64 / self.sorted_p0.len() as f64)
    }

    /// Number of pooled zero probabilities.
    pub fn pool_size(&self) -> usize {
        self.sorted_p0.len()
    }

    /// The pooled zero probabilities in ascending order.
    pub fn sorted_pool(&self) -> &[f64] {
        &self.sorted_p0
    }
}

/// Residual vectors for one fitted model on one sample, all of equal
/// length: the fitted zero probabilities, the fitted CDF values, the
/// uniform-scale residuals, and their normal-quantile transform.
#[derive(Debug, Clone)]
pub struct ResidualSet {
    pub p0_hat: Vec<f64>,
    pub cdf_value: Vec<f64>,
    pub proposed: Vec<f64>,
    pub normal_scale: Vec<f64>,
}

impl ResidualSet {
    pub fn len(&self) -> usize {
        self.proposed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.proposed.is_empty()
    }
}

/// Builds the pooled estimator Ĥ from fitted zero probabilities.
pub fn build_h(p0_values: &[f64]) -> Result<HEstimator> {
    if p0_values.is_empty() {
        return Err(Error::domain("cannot build H from an empty pool"));
    }
    for (i, &p) in p0_values.iter().enumerate() {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::data(
                i,
                format!("zero probability {p} is outside (0, 1)"),
            ));
        }
    }
    let mut sorted_p0 = p0_values.to_vec();
    sorted_p0.sort_unstable_by(f64::total_cmp);
    Ok(HEstimator { sorted_p0 })
}

/// Computes r̂ᵢ = Ĥ(F̂(Yᵢ|Xᵢ)) with Ĥ built from the same sample's zero
/// probabilities, plus the normal-quantile transform of the result.
pub fn proposed_residuals(p0_values: &[f64], cdf_values: &[f64]) -> Result<ResidualSet> {
    if p0_values.len() != cdf_values.len() {
        return Err(Error::domain(format!(
            "p0 vector has length {} but cdf vector has length {}",
            p0_values.len(),
            cdf_values.len()
        )));
    }
    for (i, (&p, &f)) in p0_values.iter().zip(cdf_values).enumerate() {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::data(i, format!("cdf value {f} is outside (0, 1]")));
        }
        if f < p {
            return Err(Error::data(
                i,
                format!("cdf value {f} is below the zero probability {p}"),
            ));
        }
    }
    let h = build_h(p0_values)?;
    let proposed: Vec<f64> = cdf_values.par_iter().map(|&f| h.evaluate(f)).collect();
    let normal_scale = normal_transform(&proposed);
    Ok(ResidualSet {
        p0_hat: p0_values.to_vec(),
        cdf_value: cdf_values.to_vec(),
        proposed,
        normal_scale,
    })
}

/// Out-of-sample errors r̃ᵢ: the same construction evaluated on a
/// held-out sample, pooling only the held-out zero probabilities. The
/// fitted model enters purely through `p0_tilde` and `cdf_tilde`, which
/// must come from predictions on the held-out covariates.
pub fn out_of_sample_errors(p0_tilde: &[f64], cdf_tilde: &[f64]) -> Result<Vec<f64>> {
    Ok(proposed_residuals(p0_tilde, cdf_tilde)?.proposed)
}

/// Φ⁻¹ of the residuals after clamping into [1/(4n), 1 − 1/(4n)], so
/// boundary values map to finite normal quantiles.
pub fn normal_transform(residuals: &[f64]) -> Vec<f64> {
    let n = residuals.len();
    if n == 0 {
        return Vec::new();
    }
    let eps = 1.0 / (4.0 * n as f64);
    residuals
        .iter()
        .map(|&r| {
            let clamped = r.clamp(eps, 1.0 - eps);
            normal_quantile(clamped).expect("clamped value is interior")
        })
        .collect()
}

/// Cox-Snell residuals: the fitted CDF values themselves.
pub fn cox_snell(cdf_values: &[f64]) -> Vec<f64> {
    cdf_values.to_vec()
}

/// Pearson residuals (yᵢ − μ̂ᵢ)/√Varᵢ.
pub fn pearson_residuals(y: &[f64], mean: &[f64], variance: &[f64]) -> Result<Vec<f64>> {
    if y.len() != mean.len() || y.len() != variance.len() {
        return Err(Error::domain(
            "response, mean, and variance vectors must share a length",
        ));
    }
    variance
        .iter()
        .zip(y)
        .zip(mean)
        .map(|((&v, &yi), &mi)| {
            if v > 0.0 {
                Ok((yi - mi) / v.sqrt())
            } else {
                Err(Error::domain(format!("variance {v} is not positive")))
            }
        })
        .collect()
}

/// Tweedie deviance residuals sign(y−μ)·√(d(y,μ)/φ) for power π ∈ (1, 2),
/// with the y = 0 limit of the unit deviance handled exactly.
pub fn tweedie_deviance_residuals(
    y: &[f64],
    mu: &[f64],
    phi: f64,
    power: f64,
) -> Result<Vec<f64>> {
    if !(power > 1.0 && power < 2.0) {
        return Err(Error::domain(format!(
            "deviance residuals need a power in (1, 2), got {power}"
        )));
    }
    if !(phi > 0.0) {
        return Err(Error::domain(format!("dispersion must be positive, got {phi}")));
    }
    if y.len() != mu.len() {
        return Err(Error::domain(
            "response and mean vectors must share a length",
        ));
    }
    y.iter()
        .zip(mu)
        .enumerate()
        .map(|(i, (&yi, &mi))| {
            if !(mi > 0.0) {
                return Err(Error::data(i, format!("fitted mean {mi} is not positive")));
            }
            if yi < 0.0 {
                return Err(Error::data(i, format!("response {yi} is negative")));
            }
            let d = tweedie_unit_deviance(yi, mi, power);
            Ok((yi - mi).signum() * (d.max(0.0) / phi).sqrt())
        })
        .collect()
}

/// Randomized quantile residuals on the normal scale: zero outcomes draw
/// u ~ Uniform(0, p̂₀ᵢ), positive outcomes use u = F̂(Yᵢ|Xᵢ), and both are
/// mapped through Φ⁻¹. Reproducible for a fixed seed; different seeds
/// jitter the zeros differently.
pub fn randomized_quantile_residuals(
    p0: &[f64],
    cdf: &[f64],
    is_zero: &[bool],
    seed: u64,
) -> Result<Vec<f64>> {
    if p0.len() != cdf.len() || p0.len() != is_zero.len() {
        return Err(Error::domain(
            "p0, cdf, and zero-indicator vectors must share a length",
        ));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(p0.len());
    for i in 0..p0.len() {
        let u = if is_zero[i] {
            if !(p0[i] > 0.0 && p0[i] <= 1.0) {
                return Err(Error::data(
                    i,
                    format!("zero probability {} is outside (0, 1]", p0[i]),
                ));
            }
            rng.gen::<f64>() * p0[i]
        } else {
            cdf[i]
        };
        let clamped = u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
        out.push(normal_quantile(clamped)?);
    }
    Ok(out)
}

/// Evaluates a fitted model over a dataset, returning the zero
/// probabilities and CDF values that the residual constructors consume.
pub fn fitted_probabilities(
    model: &dyn SemicontinuousModel,
    data: &Dataset,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if model.dimension() != data.d() {
        return Err(Error::domain(format!(
            "model expects {} design columns but the data has {}",
            model.dimension(),
            data.d()
        )));
    }
    let y = data.response();
    let pairs: Vec<(f64, f64)> = (0..data.n())
        .into_par_iter()
        .map(|i| {
            let x = data.row(i);
            let p0 = model.predict_p0(&x);
            let cdf = model.conditional_cdf(y[i], &x)?;
            Ok((p0, cdf))
        })
        .collect::<Result<_>>()?;
    Ok(pairs.into_iter().unzip())
}

/// Convenience wrapper: model predictions plus `proposed_residuals` in
/// one call.
pub fn residuals_for_model(
    model: &dyn SemicontinuousModel,
    data: &Dataset,
) -> Result<ResidualSet> {
    let (p0, cdf) = fitted_probabilities(model, data)?;
    proposed_residuals(&p0, &cdf)
}
