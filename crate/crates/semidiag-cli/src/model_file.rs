//! Fitted-model persistence as versioned, human-readable text.
//!
//! The format is line-oriented: a version line, then `key value` pairs
//! with comma-separated lists for vectors. Parameters are written with 17
//! significant digits, which round-trips every f64 exactly, so a reloaded
//! model reproduces its predictions bit for bit.

use crate::{CliError, CliResult};
use nalgebra::DVector;
use semidiag::models::{PositiveFamily, SemicontinuousModel, TobitFit, TweedieFit, TwoPartFit};

pub const FORMAT_VERSION: &str = "semidiag-model-v1";

/// A fitted model of any supported family, ready for persistence or
/// prediction.
#[derive(Debug, Clone)]
pub enum AnyModel {
    TwoPart(TwoPartFit),
    Tweedie(TweedieFit),
    Tobit(TobitFit),
}

impl AnyModel {
    pub fn as_dyn(&self) -> &dyn SemicontinuousModel {
        match self {
            AnyModel::TwoPart(m) => m,
            AnyModel::Tweedie(m) => m,
            AnyModel::Tobit(m) => m,
        }
    }

    pub fn family_tag(&self) -> &'static str {
        self.as_dyn().family_name()
    }
}

/// A persisted model together with the data schema it was fitted on.
#[derive(Debug, Clone)]
pub struct StoredModel {
    pub model: AnyModel,
    pub response: String,
    /// Design column names including the leading intercept.
    pub columns: Vec<String>,
}

fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_vector(v: &DVector<f64>) -> String {
    v.iter()
        .map(|&x| fmt_value(x))
        .collect::<Vec<_>>()
        .join(",")
}

/// Renders the model file text.
pub fn render_model_file(stored: &StoredModel) -> String {
    let mut out = String::new();
    out.push_str(FORMAT_VERSION);
    out.push('\n');
    out.push_str(&format!("family {}\n", stored.model.family_tag()));
    out.push_str(&format!("response {}\n", stored.response));
    out.push_str(&format!("columns {}\n", stored.columns.join(",")));
    match &stored.model {
        AnyModel::TwoPart(m) => {
            out.push_str(&format!("zero_coef {}\n", fmt_vector(&m.zero_coef)));
            out.push_str(&format!("positive_coef {}\n", fmt_vector(&m.positive_coef)));
            match m.family {
                PositiveFamily::Gamma { dispersion } => {
                    out.push_str(&format!("dispersion {}\n", fmt_value(dispersion)));
                }
                PositiveFamily::Gb2 { a, p, q } => {
                    out.push_str(&format!("shape_a {}\n", fmt_value(a)));
                    out.push_str(&format!("shape_p {}\n", fmt_value(p)));
                    out.push_str(&format!("shape_q {}\n", fmt_value(q)));
                }
            }
        }
        AnyModel::Tweedie(m) => {
            out.push_str(&format!("coef {}\n", fmt_vector(&m.coef)));
            out.push_str(&format!("phi {}\n", fmt_value(m.phi)));
            out.push_str(&format!("power {}\n", fmt_value(m.power)));
        }
        AnyModel::Tobit(m) => {
            out.push_str(&format!("coef {}\n", fmt_vector(&m.coef)));
            out.push_str(&format!("sigma {}\n", fmt_value(m.sigma)));
            out.push_str(&format!("limit {}\n", fmt_value(m.limit)));
        }
    }
    out
}

struct Fields<'a> {
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Fields<'a> {
    fn get(&self, key: &str) -> CliResult<&'a str> {
        self.pairs
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| CliError::Data(format!("model file is missing '{key}'")))
    }

    fn scalar(&self, key: &str) -> CliResult<f64> {
        let raw = self.get(key)?;
        raw.parse()
            .map_err(|_| CliError::Data(format!("model file: cannot parse {key}='{raw}'")))
    }

    fn vector(&self, key: &str) -> CliResult<DVector<f64>> {
        let raw = self.get(key)?;
        let values: Vec<f64> = raw
            .split(',')
            .map(|piece| {
                piece.trim().parse().map_err(|_| {
                    CliError::Data(format!("model file: cannot parse {key} entry '{piece}'"))
                })
            })
            .collect::<CliResult<_>>()?;
        Ok(DVector::from_vec(values))
    }
}

/// Parses model file text, rejecting unknown versions.
pub fn parse_model_file(text: &str) -> CliResult<StoredModel> {
    let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));
    let version = lines
        .next()
        .ok_or_else(|| CliError::Data("empty model file".into()))?;
    if version.trim() != FORMAT_VERSION {
        return Err(CliError::Data(format!(
            "unsupported model file version '{}' (expected {FORMAT_VERSION})",
            version.trim()
        )));
    }

    let mut pairs = Vec::new();
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(' ')
            .ok_or_else(|| CliError::Data(format!("model file: malformed line '{line}'")))?;
        pairs.push((key, value.trim()));
    }
    let fields = Fields { pairs };

    let family = fields.get("family")?;
    let response = fields.get("response")?.to_string();
    let columns: Vec<String> = fields
        .get("columns")?
        .split(',')
        .map(|c| c.trim().to_string())
        .collect();
    if columns.is_empty() {
        return Err(CliError::Data("model file lists no columns".into()));
    }

    let model = match family {
        "twopart-gamma" => AnyModel::TwoPart(TwoPartFit {
            zero_coef: fields.vector("zero_coef")?,
            positive_coef: fields.vector("positive_coef")?,
            family: PositiveFamily::Gamma {
                dispersion: fields.scalar("dispersion")?,
            },
        }),
        "twopart-gb2" => AnyModel::TwoPart(TwoPartFit {
            zero_coef: fields.vector("zero_coef")?,
            positive_coef: fields.vector("positive_coef")?,
            family: PositiveFamily::Gb2 {
                a: fields.scalar("shape_a")?,
                p: fields.scalar("shape_p")?,
                q: fields.scalar("shape_q")?,
            },
        }),
        "tweedie" => AnyModel::Tweedie(TweedieFit {
            coef: fields.vector("coef")?,
            phi: fields.scalar("phi")?,
            power: fields.scalar("power")?,
        }),
        "tobit" => AnyModel::Tobit(TobitFit {
            coef: fields.vector("coef")?,
            sigma: fields.scalar("sigma")?,
            limit: fields.scalar("limit")?,
        }),
        other => {
            return Err(CliError::Data(format!(
                "model file names unknown family '{other}'"
            )));
        }
    };

    let stored = StoredModel {
        model,
        response,
        columns,
    };
    if stored.model.as_dyn().dimension() != stored.columns.len() {
        return Err(CliError::Data(format!(
            "model file: {} coefficients but {} column names",
            stored.model.as_dyn().dimension(),
            stored.columns.len()
        )));
    }
    Ok(stored)
}
