//! Comma-delimited ingestion: header row required, numeric fields only,
//! no quoting. Errors name the offending line and column so a 30k-row
//! file does not have to be bisected by hand.

use crate::{CliError, CliResult};
use nalgebra::{DMatrix, DVector};
use semidiag::models::Dataset;
use std::fmt::Write as _;

/// Parses CSV text into a dataset: the response column by name, the
/// covariates either an explicit name list or every other column, and an
/// intercept column prepended. Line numbers in errors count the header
/// as line 1.
pub fn parse_csv(
    text: &str,
    response_column: &str,
    covariate_columns: Option<&[String]>,
) -> CliResult<Dataset> {
    let mut lines = text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::Data("empty file: no header row".into()))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();

    let find = |name: &str| -> CliResult<usize> {
        names
            .iter()
            .position(|&n| n == name)
            .ok_or_else(|| CliError::Data(format!("missing column '{name}'")))
    };
    let response_idx = find(response_column)?;

    let covariates: Vec<String> = match covariate_columns {
        Some(list) => list.to_vec(),
        None => names
            .iter()
            .filter(|&&n| n != response_column)
            .map(|&n| n.to_string())
            .collect(),
    };
    if covariates.iter().any(|c| c == response_column) {
        return Err(CliError::Data(format!(
            "column '{response_column}' cannot be both response and covariate"
        )));
    }
    let covariate_idx: Vec<usize> = covariates
        .iter()
        .map(|c| find(c))
        .collect::<CliResult<_>>()?;

    let mut response = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != names.len() {
            return Err(CliError::Data(format!(
                "line {lineno}: expected {} fields, found {}",
                names.len(),
                fields.len()
            )));
        }
        let cell = |idx: usize| -> CliResult<f64> {
            let raw = fields[idx];
            if raw.is_empty() {
                return Err(CliError::Data(format!(
                    "line {lineno}, column '{}': blank cell",
                    names[idx]
                )));
            }
            let value: f64 = raw.parse().map_err(|_| {
                CliError::Data(format!(
                    "line {lineno}, column '{}': cannot parse '{raw}'",
                    names[idx]
                ))
            })?;
            if !value.is_finite() {
                return Err(CliError::Data(format!(
                    "line {lineno}, column '{}': non-finite value '{raw}'",
                    names[idx]
                )));
            }
            Ok(value)
        };

        let y = cell(response_idx)?;
        if y < 0.0 {
            return Err(CliError::Data(format!(
                "line {lineno}: negative response {y}"
            )));
        }
        response.push(y);
        rows.push(
            covariate_idx
                .iter()
                .map(|&idx| cell(idx))
                .collect::<CliResult<_>>()?,
        );
    }

    if rows.is_empty() {
        return Err(CliError::Data("no data rows after the header".into()));
    }

    let n = rows.len();
    let d = covariate_idx.len();
    let covariate_matrix = DMatrix::from_fn(n, d, |r, c| rows[r][c]);
    let response = DVector::from_vec(response);
    Dataset::from_covariates(&covariate_matrix, response, covariates)
        .map_err(CliError::data_stage)
}

/// Writes a dataset back out as CSV (response first, then the covariate
/// columns; the intercept column is omitted). Inverse of `parse_csv` up
/// to column order.
pub fn dataset_to_csv(data: &Dataset, response_name: &str) -> String {
    let mut out = String::new();
    out.push_str(response_name);
    for name in &data.column_names()[1..] {
        let _ = write!(out, ",{name}");
    }
    out.push('\n');
    for i in 0..data.n() {
        let _ = write!(out, "{}", data.response()[i]);
        for j in 1..data.d() {
            let _ = write!(out, ",{}", data.design()[(i, j)]);
        }
        out.push('\n');
    }
    out
}
