//! The five subcommands behind the `semidiag` binary: fit, residuals,
//! validate, simulate, and qq. Each writes its artifacts under
//! `--output-dir` and nowhere else, and none embeds paths or timestamps
//! in an output, so a rerun with the same inputs reproduces every file
//! byte for byte.

use crate::csv_io::parse_csv;
use crate::model_file::{parse_model_file, render_model_file, AnyModel, StoredModel};
use crate::{CliError, CliResult};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use semidiag::diagnostics::{
    ks_uniform, p0_histogram_csv, qq_against_normal, qq_against_uniform, render_qq_svg, QQData,
    UniformityReport,
};
use semidiag::models::{
    fit_tobit, fit_tweedie, fit_two_part_gamma, fit_two_part_gb2, Dataset, FitReport,
    PositiveFamily, ProfilePoint,
};
use semidiag::residuals::{normal_transform, residuals_for_model, ResidualSet};
use semidiag::simulation::{run_scenario, FitArm, GeneratorKind, ScenarioConfig};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Regression diagnostics for semicontinuous outcomes.
#[derive(Debug, Parser)]
#[command(name = "semidiag", version, disable_help_subcommand = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model family to CSV data; writes a model file and a report.
    Fit(FitArgs),
    /// Compute residuals for a stored model on its training data.
    Residuals(ResidualsArgs),
    /// Compute out-of-sample errors for a stored model on holdout data.
    Validate(ValidateArgs),
    /// Run a seeded simulation scenario across fitting arms.
    Simulate(SimulateArgs),
    /// QQ plots and a uniformity report for a residual column in a CSV.
    Qq(QqArgs),
}

/// Model family accepted by `fit`.
#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelChoice {
    TwopartGamma,
    TwopartGb2,
    Tweedie,
    Tobit,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Name of the response column.
    #[arg(long)]
    pub response: String,
    /// Comma-separated covariate columns; default is every other column.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Option<Vec<String>>,
    /// Model family to fit.
    #[arg(long, value_enum)]
    pub model: ModelChoice,
    /// Censoring limit (tobit only).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub limit: f64,
    /// Directory receiving model.txt and fit_report.txt.
    #[arg(long)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ResidualsArgs {
    /// Input CSV; its columns must match the stored model.
    #[arg(long)]
    pub input: PathBuf,
    /// Model file written by `fit`.
    #[arg(long)]
    pub model_file: PathBuf,
    /// Directory receiving the residual CSV, QQ outputs, and report.
    #[arg(long)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Holdout CSV; its columns must match the stored model.
    #[arg(long)]
    pub input: PathBuf,
    /// Model file written by `fit`.
    #[arg(long)]
    pub model_file: PathBuf,
    /// Directory receiving the oos_-prefixed outputs.
    #[arg(long)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file of key=value lines; explicit flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Data generator: two-part-gamma, tobit, or tweedie.
    #[arg(long)]
    pub generator: Option<String>,
    /// Observations per replication.
    #[arg(long)]
    pub n: Option<usize>,
    /// Base seed; replication r uses seed + r.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of replications.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Comma-separated fit arms.
    #[arg(long, value_delimiter = ',')]
    pub arms: Option<Vec<String>>,
    /// Zero-part intercept for the two-part generator.
    #[arg(long, allow_negative_numbers = true)]
    pub beta0_zero: Option<f64>,
    /// Noise standard deviation for the tobit generator.
    #[arg(long)]
    pub sd: Option<f64>,
    /// Covariate half-range for the tobit generator.
    #[arg(long)]
    pub halfwidth: Option<f64>,
    /// Directory receiving replication and summary CSVs plus QQ files.
    #[arg(long)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct QqArgs {
    /// CSV holding the residuals, e.g. the output of `residuals`.
    #[arg(long)]
    pub input: PathBuf,
    /// Column to plot; values must lie in [0, 1].
    #[arg(long, default_value = "residual")]
    pub column: String,
    /// Title drawn on the SVGs.
    #[arg(long, default_value = "residuals")]
    pub title: String,
    /// Directory receiving QQ CSVs, SVGs, and the uniformity report.
    #[arg(long)]
    pub output_dir: PathBuf,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit(args) => cmd_fit(&args),
        Command::Residuals(args) => cmd_residuals(&args),
        Command::Validate(args) => cmd_validate(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Qq(args) => cmd_qq(&args),
    }
}

fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

fn prepare_output_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))
}

fn write_output(dir: &Path, name: &str, content: &str) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, content)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

pub fn cmd_fit(args: &FitArgs) -> CliResult<()> {
    let text = read_input(&args.input)?;
    let data = parse_csv(&text, &args.response, args.covariates.as_deref())?;
    prepare_output_dir(&args.output_dir)?;

    let (model, report_text) = fit_family(&data, args.model, args.limit)?;
    let stored = StoredModel {
        model,
        response: args.response.clone(),
        columns: data.column_names().to_vec(),
    };
    write_output(&args.output_dir, "model.txt", &render_model_file(&stored))?;
    write_output(&args.output_dir, "fit_report.txt", &report_text)?;
    println!(
        "fitted {} on {} observations; wrote model.txt and fit_report.txt",
        stored.model.family_tag(),
        data.n()
    );
    Ok(())
}

fn fit_family(data: &Dataset, choice: ModelChoice, limit: f64) -> CliResult<(AnyModel, String)> {
    let names = data.column_names();
    let zeros = data.zero_mask().iter().filter(|&&z| z).count();
    let mut report = String::new();
    let _ = writeln!(report, "fit report");
    let _ = writeln!(
        report,
        "observations: {} ({} zeros, {:.1}%)",
        data.n(),
        zeros,
        100.0 * zeros as f64 / data.n() as f64
    );

    let model = match choice {
        ModelChoice::TwopartGamma => {
            let (fit, parts) = fit_two_part_gamma(data).map_err(CliError::fit_stage)?;
            let _ = writeln!(report, "family: twopart-gamma");
            let _ = writeln!(report, "log-likelihood: {:.6}", parts.log_likelihood);
            report.push('\n');
            report.push_str(&part_block(
                "zero part (logistic, P(Y = 0))",
                names,
                &fit.zero_coef,
                &parts.zero,
            ));
            report.push('\n');
            report.push_str(&part_block(
                "positive part (gamma, log link)",
                names,
                &fit.positive_coef,
                &parts.positive,
            ));
            if let PositiveFamily::Gamma { dispersion } = fit.family {
                let _ = writeln!(report, "  dispersion: {dispersion:.6}");
            }
            AnyModel::TwoPart(fit)
        }
        ModelChoice::TwopartGb2 => {
            let (fit, parts) = fit_two_part_gb2(data).map_err(CliError::fit_stage)?;
            let _ = writeln!(report, "family: twopart-gb2");
            let _ = writeln!(report, "log-likelihood: {:.6}", parts.log_likelihood);
            report.push('\n');
            report.push_str(&part_block(
                "zero part (logistic, P(Y = 0))",
                names,
                &fit.zero_coef,
                &parts.zero,
            ));
            report.push('\n');
            report.push_str(&part_block(
                "positive part (GB2, log-scale location)",
                names,
                &fit.positive_coef,
                &parts.positive,
            ));
            if let PositiveFamily::Gb2 { a, p, q } = fit.family {
                let _ = writeln!(report, "  shape a: {a:.6}");
                let _ = writeln!(report, "  shape p: {p:.6}");
                let _ = writeln!(report, "  shape q: {q:.6}");
            }
            AnyModel::TwoPart(fit)
        }
        ModelChoice::Tweedie => {
            let (fit, fit_report, profile) = fit_tweedie(data.design(), data.response())
                .map_err(CliError::fit_stage)?;
            let _ = writeln!(report, "family: tweedie");
            let _ = writeln!(report, "log-likelihood: {:.6}", fit_report.log_likelihood);
            report.push('\n');
            report.push_str(&part_block(
                "mean model (log link)",
                names,
                &fit.coef,
                &fit_report,
            ));
            let _ = writeln!(report, "  power: {:.6}", fit.power);
            let _ = writeln!(report, "  dispersion: {:.6}", fit.phi);
            report.push('\n');
            report.push_str(&profile_block(&profile));
            AnyModel::Tweedie(fit)
        }
        ModelChoice::Tobit => {
            let (fit, fit_report) =
                fit_tobit(data.design(), data.response(), limit).map_err(CliError::fit_stage)?;
            let _ = writeln!(report, "family: tobit");
            let _ = writeln!(report, "log-likelihood: {:.6}", fit_report.log_likelihood);
            report.push('\n');
            report.push_str(&part_block(
                "latent mean (censored normal)",
                names,
                &fit.coef,
                &fit_report,
            ));
            let _ = writeln!(report, "  sigma: {:.6}", fit.sigma);
            let _ = writeln!(report, "  limit: {:.6}", fit.limit);
            AnyModel::Tobit(fit)
        }
    };
    Ok((model, report))
}

fn part_block(title: &str, names: &[String], coef: &DVector<f64>, report: &FitReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "  log-likelihood: {:.6}", report.log_likelihood);
    let _ = writeln!(out, "  iterations: {}", report.iterations);
    let _ = writeln!(
        out,
        "  converged: {}",
        if report.converged { "yes" } else { "no" }
    );
    out.push_str(&coefficient_table(
        names,
        coef,
        report.coefficient_standard_errors.as_ref(),
    ));
    out
}

fn coefficient_table(names: &[String], coef: &DVector<f64>, se: Option<&DVector<f64>>) -> String {
    let width = names.iter().map(|n| n.len()).max().unwrap_or(6).max(6);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "  {:<width$}  {:>14}  {:>14}",
        "column", "estimate", "std_error"
    );
    for (j, name) in names.iter().enumerate() {
        let se_text = match se {
            Some(s) if j < s.len() => format!("{:>14.6}", s[j]),
            _ => format!("{:>14}", "-"),
        };
        let _ = writeln!(out, "  {name:<width$}  {:>14.6}  {se_text}", coef[j]);
    }
    out
}

fn profile_block(profile: &[ProfilePoint]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "power profile");
    let _ = writeln!(
        out,
        "  {:>8}  {:>16}  {:>14}  {:>9}",
        "power", "log-likelihood", "phi_pearson", "converged"
    );
    for point in profile {
        let _ = writeln!(
            out,
            "  {:>8.4}  {:>16.6}  {:>14.6}  {:>9}",
            point.power,
            point.log_likelihood,
            point.phi_pearson,
            if point.converged { "yes" } else { "no" }
        );
    }
    out
}

/// Loads the model and a dataset whose schema must match it exactly.
fn load_model_and_data(
    input: &Path,
    model_file: &Path,
) -> CliResult<(StoredModel, Dataset)> {
    let stored = parse_model_file(&read_input(model_file)?)?;
    let covariates: Vec<String> = stored.columns[1..].to_vec();
    let data = parse_csv(&read_input(input)?, &stored.response, Some(&covariates))?;
    if data.column_names() != stored.columns.as_slice() {
        return Err(CliError::Data(format!(
            "data columns [{}] do not match the model's [{}]",
            data.column_names().join(", "),
            stored.columns.join(", ")
        )));
    }
    Ok((stored, data))
}

fn residuals_csv(set: &ResidualSet) -> String {
    let mut out = String::from("index,p0_hat,cdf_value,residual,residual_normal\n");
    for i in 0..set.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            i, set.p0_hat[i], set.cdf_value[i], set.proposed[i], set.normal_scale[i]
        );
    }
    out
}

fn uniformity_text(report: &UniformityReport) -> String {
    format!(
        "n={}\nks_statistic={}\nks_pvalue_asymptotic={}\nmean={}\nsd={}\ncaveat={}\n",
        report.n, report.ks_statistic, report.ks_pvalue_asymptotic, report.mean, report.sd,
        report.caveat
    )
}

/// Writes the residual CSV, both QQ scales, the p0 histogram, and the
/// uniformity report, each file name prefixed with `prefix`.
fn write_residual_outputs(
    dir: &Path,
    prefix: &str,
    set: &ResidualSet,
) -> CliResult<UniformityReport> {
    let qq_uniform = qq_against_uniform(&set.proposed).map_err(CliError::data_stage)?;
    let qq_normal = qq_against_normal(&set.normal_scale).map_err(CliError::data_stage)?;
    let uniformity = ks_uniform(&set.proposed).map_err(CliError::data_stage)?;

    write_output(dir, &format!("{prefix}residuals.csv"), &residuals_csv(set))?;
    write_qq_pair(dir, &format!("{prefix}qq_uniform"), &qq_uniform, "residuals")?;
    write_qq_pair(dir, &format!("{prefix}qq_normal"), &qq_normal, "residuals")?;
    write_output(
        dir,
        &format!("{prefix}p0_histogram.csv"),
        &p0_histogram_csv(&set.p0_hat),
    )?;
    write_output(
        dir,
        &format!("{prefix}uniformity.txt"),
        &uniformity_text(&uniformity),
    )?;
    Ok(uniformity)
}

fn write_qq_pair(dir: &Path, stem: &str, qq: &QQData, title: &str) -> CliResult<()> {
    write_output(dir, &format!("{stem}.csv"), &qq.to_csv())?;
    write_output(dir, &format!("{stem}.svg"), &render_qq_svg(qq, title))
}

pub fn cmd_residuals(args: &ResidualsArgs) -> CliResult<()> {
    let (stored, data) = load_model_and_data(&args.input, &args.model_file)?;
    prepare_output_dir(&args.output_dir)?;
    let set = residuals_for_model(stored.model.as_dyn(), &data).map_err(CliError::data_stage)?;
    let uniformity = write_residual_outputs(&args.output_dir, "", &set)?;
    println!(
        "residuals for {} observations: KS = {:.4} (asymptotic p = {:.4})",
        set.len(),
        uniformity.ks_statistic,
        uniformity.ks_pvalue_asymptotic
    );
    Ok(())
}

pub fn cmd_validate(args: &ValidateArgs) -> CliResult<()> {
    let (stored, holdout) = load_model_and_data(&args.input, &args.model_file)?;
    prepare_output_dir(&args.output_dir)?;
    let set =
        residuals_for_model(stored.model.as_dyn(), &holdout).map_err(CliError::data_stage)?;
    let uniformity = write_residual_outputs(&args.output_dir, "oos_", &set)?;
    println!(
        "out-of-sample errors for {} holdout observations: KS = {:.4} (asymptotic p = {:.4})",
        set.len(),
        uniformity.ks_statistic,
        uniformity.ks_pvalue_asymptotic
    );
    Ok(())
}

fn scenario_from_args(args: &SimulateArgs) -> CliResult<ScenarioConfig> {
    let mut config = match (&args.config, &args.generator) {
        (Some(path), _) => ScenarioConfig::from_key_values(&read_input(path)?)
            .map_err(|e| CliError::usage(e.to_string()))?,
        (None, Some(raw)) => {
            let kind = parse_generator(raw)?;
            ScenarioConfig::default_for(kind)
        }
        (None, None) => {
            return Err(CliError::usage(
                "simulate needs --config or --generator",
            ));
        }
    };
    if args.config.is_some() {
        if let Some(raw) = &args.generator {
            config.generator = parse_generator(raw)?;
        }
    }
    if let Some(n) = args.n {
        config.n = n;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(reps) = args.reps {
        config.replications = reps;
    }
    if let Some(arms) = &args.arms {
        config.fit_arms = arms
            .iter()
            .map(|a| FitArm::parse(a).map_err(|e| CliError::usage(e.to_string())))
            .collect::<CliResult<_>>()?;
    }
    if let Some(b) = args.beta0_zero {
        config.beta0_zero = b;
    }
    if let Some(sd) = args.sd {
        config.sd = sd;
    }
    if let Some(hw) = args.halfwidth {
        config.halfwidth = hw;
    }
    config.validate().map_err(|e| CliError::usage(e.to_string()))?;
    Ok(config)
}

/// Accepts both the canonical generator labels and their hyphenated
/// spellings (`two-part-gamma`).
fn parse_generator(raw: &str) -> CliResult<GeneratorKind> {
    GeneratorKind::parse(&raw.replace('-', "_")).map_err(|e| CliError::usage(e.to_string()))
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let config = scenario_from_args(args)?;
    prepare_output_dir(&args.output_dir)?;
    let result = run_scenario(&config).map_err(CliError::data_stage)?;
    write_output(
        &args.output_dir,
        "replications.csv",
        &result.replications_csv(),
    )?;
    write_output(&args.output_dir, "summary.csv", &result.summary_csv())?;
    for (arm, qq) in &result.first_rep_qq {
        let stem = format!("qq_rep0_{}", arm.label());
        let title = format!("{} arm, replication 0", arm.label());
        write_qq_pair(&args.output_dir, &stem, qq, &title)?;
    }
    let failures: usize = result.summaries.iter().map(|s| s.failures).sum();
    println!(
        "scenario complete: {} replications x {} arms, {} failed cells",
        config.replications,
        config.fit_arms.len(),
        failures
    );
    Ok(())
}

/// Pulls one numeric column out of a CSV by header name.
fn read_column(text: &str, column: &str) -> CliResult<Vec<f64>> {
    let mut lines = text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::Data("empty file: no header row".into()))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    let idx = names
        .iter()
        .position(|&n| n == column)
        .ok_or_else(|| CliError::Data(format!("missing column '{column}'")))?;
    let mut values = Vec::new();
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
        let raw = fields[idx];
        let value: f64 = raw.parse().map_err(|_| {
            CliError::Data(format!(
                "line {lineno}, column '{column}': cannot parse '{raw}'"
            ))
        })?;
        if !value.is_finite() {
            return Err(CliError::Data(format!(
                "line {lineno}, column '{column}': non-finite value '{raw}'"
            )));
        }
        values.push(value);
    }
    if values.is_empty() {
        return Err(CliError::Data("no data rows after the header".into()));
    }
    Ok(values)
}

pub fn cmd_qq(args: &QqArgs) -> CliResult<()> {
    let values = read_column(&read_input(&args.input)?, &args.column)?;
    prepare_output_dir(&args.output_dir)?;
    let uniformity = ks_uniform(&values).map_err(CliError::data_stage)?;
    let qq_uniform = qq_against_uniform(&values).map_err(CliError::data_stage)?;
    let transformed = normal_transform(&values);
    let qq_normal = qq_against_normal(&transformed).map_err(CliError::data_stage)?;
    write_qq_pair(&args.output_dir, "qq_uniform", &qq_uniform, &args.title)?;
    write_qq_pair(&args.output_dir, "qq_normal", &qq_normal, &args.title)?;
    write_output(
        &args.output_dir,
        "uniformity.txt",
        &uniformity_text(&uniformity),
    )?;
    println!(
        "{} values: KS = {:.4} (asymptotic p = {:.4})",
        uniformity.n, uniformity.ks_statistic, uniformity.ks_pvalue_asymptotic
    );
    Ok(())
}
