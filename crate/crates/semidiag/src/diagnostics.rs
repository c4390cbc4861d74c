//! QQ data, uniformity statistics, and deterministic SVG rendering.
//!
//! Residual vectors become decisions here: sorted quantile pairs for
//! plotting, a Kolmogorov–Smirnov summary of the distance to the uniform
//! null pattern, and a fixed-layout SVG renderer whose output is
//! byte-identical for identical input.

use crate::error::{Error, Result};
use crate::special::normal_quantile;

/// Which theoretical scale a QQ plot compares against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QqScale {
    Uniform,
    Normal,
}

impl QqScale {
    pub fn label(self) -> &'static str {
        match self {
            QqScale::Uniform => "uniform",
            QqScale::Normal => "normal",
        }
    }
}

/// Paired plotting vectors for a QQ plot: theoretical quantiles at the
/// Hazen positions (i − 0.5)/n and the sorted sample, both nondecreasing
/// and of equal length.
#[derive(Debug, Clone)]
pub struct QQData {
    pub theoretical: Vec<f64>,
    pub sample: Vec<f64>,
    pub scale_label: QqScale,
}

impl QQData {
    pub fn len(&self) -> usize {
        self.sample.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample.is_empty()
    }

    /// Two-column CSV with header `theoretical,sample`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theoretical,sample\n");
        for (t, s) in self.theoretical.iter().zip(&self.sample) {
            out.push_str(&format!("{t},{s}\n"));
        }
        out
    }
}

/// Kolmogorov–Smirnov summary of a residual vector against Uniform(0,1).
/// The p-value comes from the asymptotic Kolmogorov series and carries a
/// standing caveat: model parameters were estimated, so the nominal null
/// distribution is approximate.
#[derive(Debug, Clone)]
pub struct UniformityReport {
    pub ks_statistic: f64,
    pub ks_pvalue_asymptotic: f64,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub caveat: &'static str,
}

pub const PVALUE_CAVEAT: &str =
    "asymptotic p-value with estimated parameters; treat as descriptive, not exact";

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    sorted
}

fn hazen_positions(n: usize) -> Vec<f64> {
    (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect()
}

/// QQ data against the uniform scale: sorted residuals paired with the
/// Hazen plotting positions.
pub fn qq_against_uniform(residuals: &[f64]) -> Result<QQData> {
    if residuals.len() < 2 {
        return Err(Error::domain(format!(
            "a QQ plot needs at least 2 points, got {}",
            residuals.len()
        )));
    }
    Ok(QQData {
        theoretical: hazen_positions(residuals.len()),
        sample: sorted_copy(residuals),
        scale_label: QqScale::Uniform,
    })
}

/// QQ data against the standard normal scale: sorted transformed
/// residuals paired with Φ⁻¹ of the Hazen positions.
pub fn qq_against_normal(transformed: &[f64]) -> Result<QQData> {
    if transformed.len() < 2 {
        return Err(Error::domain(format!(
            "a QQ plot needs at least 2 points, got {}",
            transformed.len()
        )));
    }
    let theoretical = hazen_positions(transformed.len())
        .into_iter()
        .map(|u| normal_quantile(u).expect("Hazen positions are interior"))
        .collect();
    Ok(QQData {
        theoretical,
        sample: sorted_copy(transformed),
        scale_label: QqScale::Normal,
    })
}

/// Exact KS statistic against Uniform(0,1) with the asymptotic p-value.
///
/// The statistic is the sup distance between the empirical CDF and the
/// identity, computed exactly from the sorted sample as the largest of
/// i/n − r₍ᵢ₎ and r₍ᵢ₎ − (i−1)/n.
pub fn ks_uniform(residuals: &[f64]) -> Result<UniformityReport> {
    if residuals.is_empty() {
        return Err(Error::domain("cannot assess uniformity of an empty sample"));
    }
    for (i, &r) in residuals.iter().enumerate() {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::domain(format!(
                "residual {r} at index {i} is outside [0, 1]"
            )));
        }
    }
    let sorted = sorted_copy(residuals);
    let n = sorted.len();
    let nf = n as f64;
    let mut ks = 0.0f64;
    for (i, &r) in sorted.iter().enumerate() {
        let above = (i + 1) as f64 / nf - r;
        let below = r - i as f64 / nf;
        ks = ks.max(above).max(below);
    }

    let mean = sorted.iter().sum::<f64>() / nf;
    let sd = if n > 1 {
        (sorted.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt()
    } else {
        0.0
    };

    Ok(UniformityReport {
        ks_statistic: ks,
        ks_pvalue_asymptotic: kolmogorov_pvalue(nf.sqrt() * ks),
        n,
        mean,
        sd,
        caveat: PVALUE_CAVEAT,
    })
}

/// P(K > t) for the Kolmogorov distribution: 2·Σ_{k≥1} (−1)^{k−1}
/// exp(−2k²t²), truncated once terms drop below 1e−12.
fn kolmogorov_pvalue(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut k = 1u64;
    loop {
        let term = 2.0 * (-2.0 * (k * k) as f64 * t * t).exp();
        if term < 1e-12 || k > 200_000 {
            break;
        }
        if k % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
        k += 1;
    }
    sum.clamp(0.0, 1.0)
}

const CANVAS: f64 = 600.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_TOP: f64 = 50.0;
const PLOT_SIZE: f64 = 500.0;

/// Renders a QQ plot as a standalone SVG 1.1 document on a fixed 600×600
/// canvas: framed plot area, diagonal reference line, one circle per
/// point, tick labels, and axis titles taken from the scale label. Output
/// is a pure function of the input, so identical input gives
/// byte-identical documents.
pub fn render_qq_svg(qq: &QQData, title: &str) -> String {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in qq.theoretical.iter().chain(&qq.sample) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    let pad = if hi - lo > 1e-12 {
        0.05 * (hi - lo)
    } else {
        0.5
    };
    lo -= pad;
    hi += pad;
    let span = hi - lo;
    let to_x = |v: f64| MARGIN_LEFT + (v - lo) / span * PLOT_SIZE;
    let to_y = |v: f64| MARGIN_TOP + PLOT_SIZE - (v - lo) / span * PLOT_SIZE;

    let mut svg = String::with_capacity(4096 + 64 * qq.len());
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{CANVAS}\" height=\"{CANVAS}\" viewBox=\"0 0 {CANVAS} {CANVAS}\">\n"
    ));
    svg.push_str("<rect width=\"600\" height=\"600\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"300\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n",
        escape_xml(title)
    ));
    svg.push_str(
        "<rect x=\"70\" y=\"50\" width=\"500\" height=\"500\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n",
    );

    for k in 0..=4 {
        let v = lo + span * k as f64 / 4.0;
        let x = to_x(v);
        let y = to_y(v);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"550\" x2=\"{x:.2}\" y2=\"556\" stroke=\"black\" stroke-width=\"1\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"572\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{v:.2}</text>\n"
        ));
        svg.push_str(&format!(
            "<line x1=\"64\" y1=\"{y:.2}\" x2=\"70\" y2=\"{y:.2}\" stroke=\"black\" stroke-width=\"1\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"60\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">{v:.2}</text>\n",
            y + 4.0
        ));
    }

    svg.push_str(&format!(
        "<line class=\"reference\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"grey\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n",
        to_x(lo), to_y(lo), to_x(hi), to_y(hi)
    ));

    for (t, s) in qq.theoretical.iter().zip(&qq.sample) {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"steelblue\" fill-opacity=\"0.7\"/>\n",
            to_x(*t),
            to_y(*s)
        ));
    }

    svg.push_str(&format!(
        "<text x=\"320\" y=\"594\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{} quantiles</text>\n",
        qq.scale_label.label()
    ));
    svg.push_str(&format!(
        "<text x=\"20\" y=\"300\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" transform=\"rotate(-90 20 300)\">sample {} scale</text>\n",
        qq.scale_label.label()
    ));
    svg.push_str("</svg>\n");
    svg
}

fn escape_xml(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Histogram counts of fitted zero probabilities over 20 equal bins of
/// [0, 1]; values of exactly 1 fall in the last bin.
pub fn p0_histogram(p0_values: &[f64]) -> [usize; 20] {
    let mut counts = [0usize; 20];
    for &p in p0_values {
        let bin = ((p * 20.0).floor() as usize).min(19);
        counts[bin] += 1;
    }
    counts
}

/// The 20-bin histogram as CSV with header `bin_low,bin_high,count`.
pub fn p0_histogram_csv(p0_values: &[f64]) -> String {
    let counts = p0_histogram(p0_values);
    let mut out = String::from("bin_low,bin_high,count\n");
    for (i, c) in counts.iter().enumerate() {
        out.push_str(&format!(
            "{:.2},{:.2},{c}\n",
            i as f64 / 20.0,
            (i + 1) as f64 / 20.0
        ));
    }
    out
}
