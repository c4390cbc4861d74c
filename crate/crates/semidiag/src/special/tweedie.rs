//! Tweedie compound Poisson-gamma evaluation for power in (1, 2).
//!
//! A Tweedie variable with 1 < power < 2 is a Poisson(λ) sum of
//! Gamma(α, θ) jumps, which puts positive mass exp(-λ) at zero and a
//! continuous density on (0, ∞). CDF and density are evaluated by summing
//! the Poisson mixture over an index window around the dominant term.

use crate::error::{Error, Result};
use crate::special::gamma_fn::{gamma_logpdf_raw, log_gamma_unchecked, reg_lower_gamma};

/// Mean/dispersion/power parameterization: E(Y) = mu, Var(Y) = phi mu^power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TweedieParams {
    mu: f64,
    phi: f64,
    power: f64,
}

impl TweedieParams {
    pub fn new(mu: f64, phi: f64, power: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::domain(format!("tweedie mu must be > 0, got {mu}")));
        }
        if !(phi > 0.0 && phi.is_finite()) {
            return Err(Error::domain(format!("tweedie phi must be > 0, got {phi}")));
        }
        if !(power > 1.0 && power < 2.0) {
            return Err(Error::domain(format!(
                "tweedie power must lie in (1,2), got {power}"
            )));
        }
        Ok(Self { mu, phi, power })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn power(&self) -> f64 {
        self.power
    }
}

/// Compound Poisson-gamma reparameterization of [`TweedieParams`]:
/// Poisson rate and the shape/scale of each gamma jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpgDerived {
    /// λ = mu^(2-power) / (phi (2-power))
    pub lambda: f64,
    /// α = (2-power) / (power-1)
    pub jump_shape: f64,
    /// θ = phi (power-1) mu^(power-1)
    pub jump_scale: f64,
}

impl CpgDerived {
    pub fn from_params(params: &TweedieParams) -> Self {
        let p = params.power;
        Self {
            lambda: params.mu.powf(2.0 - p) / (params.phi * (2.0 - p)),
            jump_shape: (2.0 - p) / (p - 1.0),
            jump_scale: params.phi * (p - 1.0) * params.mu.powf(p - 1.0),
        }
    }
}

/// Probability of an exact zero: exp(-λ), clamped into the open unit
/// interval so downstream logs and logits stay finite.
pub fn tweedie_p0(params: &TweedieParams) -> f64 {
    let lambda = CpgDerived::from_params(params).lambda;
    (-lambda).exp().clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
}

const TERM_EPS: f64 = 1e-12;
const TERM_CAP: usize = 100_000;

/// Index where the summand is largest: y^(2-power) / (phi (2-power)),
/// the same expression as λ with y in place of mu.
fn center_index(y: f64, params: &TweedieParams) -> f64 {
    y.powf(2.0 - params.power) / (params.phi * (2.0 - params.power))
}

/// Tweedie CDF at y ≥ 0.
///
/// F(y) = exp(-λ) + Σ_{k≥1} Poisson(k; λ) P(kα, y/θ). The sum is expanded
/// in both directions from the dominant index until terms fall below
/// `TERM_EPS` times the running sum, with guards so the expansion never
/// stops before it has crossed the Poisson bulk.
pub fn tweedie_cdf(y: f64, params: &TweedieParams) -> Result<f64> {
    if y < 0.0 || y.is_nan() {
        return Err(Error::domain(format!("tweedie_cdf requires y >= 0, got {y}")));
    }
    if y == 0.0 {
        return Ok(tweedie_p0(params));
    }
    let d = CpgDerived::from_params(params);
    let lambda = d.lambda;
    let log_lambda = lambda.ln();
    let x = y / d.jump_scale;

    let term = |k: u64| -> f64 {
        let kf = k as f64;
        let log_pois = kf * log_lambda - lambda - log_gamma_unchecked(kf + 1.0);
        let w = log_pois.exp();
        if w == 0.0 {
            0.0
        } else {
            w * reg_lower_gamma(kf * d.jump_shape, x)
        }
    };

    // Centering beyond the upper edge of the Poisson bulk buys nothing:
    // the weights out there carry < 1e-12 of the mass.
    let pois_hi = lambda + 10.0 * lambda.sqrt() + 30.0;
    let k0 = center_index(y, params).round().clamp(1.0, pois_hi) as u64;

    let mut sum = (-lambda).exp();
    let mut used = 0usize;

    // Upward sweep. Safe to stop only past the Poisson mode, where both
    // factors of the summand are decreasing in k.
    let mut prev = f64::INFINITY;
    let mut k = k0;
    loop {
        let t = term(k);
        sum += t;
        used += 1;
        if used > TERM_CAP {
            return Err(Error::SeriesNonConvergence {
                context: "tweedie_cdf".into(),
                terms: used,
                partial_sum: sum,
                last_term: t,
            });
        }
        if t < TERM_EPS * sum && t <= prev && (k as f64) > lambda {
            break;
        }
        prev = t;
        k += 1;
    }

    // Downward sweep from k0 - 1 toward 1.
    prev = f64::INFINITY;
    let mut k = k0;
    while k > 1 {
        k -= 1;
        let t = term(k);
        sum += t;
        used += 1;
        if used > TERM_CAP {
            return Err(Error::SeriesNonConvergence {
                context: "tweedie_cdf".into(),
                terms: used,
                partial_sum: sum,
                last_term: t,
            });
        }
        if t < TERM_EPS * sum && t <= prev && (k as f64) < lambda {
            break;
        }
        prev = t;
    }

    Ok(sum.min(1.0))
}

/// Log density of the continuous part at y > 0.
///
/// log Σ_{k≥1} Poisson(k; λ) gamma_pdf(y; kα, θ) via log-sum-exp over the
/// index window where terms are within e^-40 of the largest.
pub fn tweedie_logpdf(y: f64, params: &TweedieParams) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::domain(format!("tweedie_logpdf requires y > 0, got {y}")));
    }
    let d = CpgDerived::from_params(params);
    let lambda = d.lambda;
    let log_lambda = lambda.ln();

    let log_term = |k: u64| -> f64 {
        let kf = k as f64;
        kf * log_lambda - lambda - log_gamma_unchecked(kf + 1.0)
            + gamma_logpdf_raw(y, kf * d.jump_shape, d.jump_scale)
    };

    // The summand is unimodal in k with mode near the center index, so a
    // fixed log-drop window captures the sum to machine precision.
    const LOG_DROP: f64 = 40.0;
    let k0 = center_index(y, params).round().max(1.0);
    if k0 > (TERM_CAP as f64) {
        return Err(Error::SeriesNonConvergence {
            context: "tweedie_logpdf".into(),
            terms: 0,
            partial_sum: f64::NEG_INFINITY,
            last_term: k0,
        });
    }
    let k0 = k0 as u64;

    let mut logs: Vec<f64> = Vec::with_capacity(64);
    let mut max_log = f64::NEG_INFINITY;

    let mut k = k0;
    loop {
        let l = log_term(k);
        logs.push(l);
        max_log = max_log.max(l);
        if l < max_log - LOG_DROP || logs.len() > TERM_CAP {
            break;
        }
        k += 1;
    }
    let mut k = k0;
    while k > 1 {
        k -= 1;
        let l = log_term(k);
        logs.push(l);
        max_log = max_log.max(l);
        if l < max_log - LOG_DROP {
            break;
        }
    }
    if logs.len() > TERM_CAP {
        return Err(Error::SeriesNonConvergence {
            context: "tweedie_logpdf".into(),
            terms: logs.len(),
            partial_sum: max_log,
            last_term: *logs.last().unwrap(),
        });
    }

    let sum: f64 = logs.iter().map(|l| (l - max_log).exp()).sum();
    Ok(max_log + sum.ln())
}

/// Unit deviance of the Tweedie family for power π ∈ (1, 2):
///
///   d(y, μ) = 2·[ y²⁻ᵖ/((1−π)(2−π)) − y·μ¹⁻ᵖ/(1−π) + μ²⁻ᵖ/(2−π) ]
///
/// with the y → 0 limit applied exactly (the first two terms vanish).
/// Inputs are assumed validated by the caller: y ≥ 0, μ > 0.
pub fn tweedie_unit_deviance(y: f64, mu: f64, power: f64) -> f64 {
    let term_mu = mu.powf(2.0 - power) / (2.0 - power);
    if y == 0.0 {
        return 2.0 * term_mu;
    }
    let term_y = y.powf(2.0 - power) / ((1.0 - power) * (2.0 - power));
    let term_cross = y * mu.powf(1.0 - power) / (1.0 - power);
    2.0 * (term_y - term_cross + term_mu)
}
