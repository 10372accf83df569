//! Command-line surface: CSV ingestion, fitting, cross-validation,
//! confidence intervals, simulation and benchmarks.
//!
//! Every subcommand produces one JSON document. Floats are written in the
//! shortest representation that reads back to the same value.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::model::{cross_validate, fit_retire_lowdim, fit_retire_penalized, CvOptions, CvRule, IrwSpec};
use crate::penalty::{PenaltyKind, PenaltySpec, DEFAULT_MCP_B, DEFAULT_SCAD_A};
use crate::sim::{generate, run_bench, BenchSettings, Method, NoiseDistribution, SimModel, SimSpec};
use crate::solver::{fit_smooth, fit_sncd, FitResult, SolveOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

const GAMMA_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subcommand {
    Fit,
    Cv,
    Ci,
    Simulate,
    Bench,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaChoice {
    Auto,
    Infinite,
    Fixed(f64),
}

impl FromStr for GammaChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(GammaChoice::Auto),
            "inf" => Ok(GammaChoice::Infinite),
            _ => match s.parse::<f64>() {
                Ok(g) if g > 0.0 && g.is_finite() => Ok(GammaChoice::Fixed(g)),
                _ => Err(format!("gamma must be \"auto\", \"inf\" or a positive number, got {s:?}")),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PenaltyName {
    L1,
    Scad,
    Mcp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelName {
    Hom,
    Qhet,
    Ehet,
}

impl From<ModelName> for SimModel {
    fn from(m: ModelName) -> Self {
        match m {
            ModelName::Hom => SimModel::Homoscedastic,
            ModelName::Qhet => SimModel::QuantileHeteroscedastic,
            ModelName::Ehet => SimModel::ExpectileHeteroscedastic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleName {
    #[value(name = "1se")]
    OneSe,
    Min,
}

impl From<RuleName> for CvRule {
    fn from(r: RuleName) -> Self {
        match r {
            RuleName::OneSe => CvRule::OneSe,
            RuleName::Min => CvRule::Min,
        }
    }
}

/// `gaussian:VAR` or `t:DF`.
pub fn parse_noise(s: &str) -> std::result::Result<NoiseDistribution, String> {
    let (kind, value) = s.split_once(':').ok_or_else(|| format!("noise must be gaussian:VAR or t:DF, got {s:?}"))?;
    let v: f64 = value.parse().map_err(|_| format!("bad noise parameter {value:?}"))?;
    let dist = match kind {
        "gaussian" => NoiseDistribution::Gaussian { variance: v },
        "t" => NoiseDistribution::StudentT { df: v },
        _ => return Err(format!("unknown noise law {kind:?}")),
    };
    dist.validate().map_err(|e| e.to_string())?;
    Ok(dist)
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    Method::parse(s.trim()).ok_or_else(|| format!("unknown method {s:?}"))
}

/// Robust expectile regression.
#[derive(Debug, Clone, Parser)]
#[command(name = "retire", version)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub subcommand: Subcommand,
    /// Input CSV (fit, cv, ci).
    pub input: Option<PathBuf>,
    /// Response column, by header name or 0-based index.
    #[arg(long, default_value = "y")]
    pub response: String,
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    /// "auto", "inf" or a positive number.
    #[arg(long, default_value = "auto")]
    pub gamma: GammaChoice,
    #[arg(long, value_enum, default_value = "l1")]
    pub penalty: PenaltyName,
    #[arg(long, default_value_t = DEFAULT_SCAD_A)]
    pub scad_a: f64,
    #[arg(long, default_value_t = DEFAULT_MCP_B)]
    pub mcp_b: f64,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub nlambda: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Defaults to 1 for l1 and 3 for the folded-concave penalties.
    #[arg(long)]
    pub irw_steps: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value = "hom")]
    pub model: ModelName,
    #[arg(long, default_value = "gaussian:2", value_parser = parse_noise)]
    pub noise: NoiseDistribution,
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub d: usize,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long, value_enum, default_value = "1se")]
    pub rule: RuleName,
    /// Confidence level for ci.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Comma-separated bench methods.
    #[arg(long, value_delimiter = ',', default_value = "retire-l1,retire-irw,huber,sales", value_parser = parse_method)]
    pub methods: Vec<Method>,
    #[arg(long)]
    pub serial: bool,
    /// JSON output path (CSV path for simulate).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Parse from an argument list (program name first).
    pub fn from_args<I, T>(args: I) -> std::result::Result<Self, clap::Error>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        Self::try_parse_from(args)
    }

    fn validate(&self) -> Result<()> {
        let needs_input = matches!(self.subcommand, Subcommand::Fit | Subcommand::Cv | Subcommand::Ci);
        if needs_input && self.input.is_none() {
            return Err(Error::invalid("an input CSV is required"));
        }
        if !needs_input && self.input.is_some() {
            return Err(Error::invalid("simulate and bench take no input file"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::invalid(format!("tau must lie in (0, 1), got {}", self.tau)));
        }
        match self.subcommand {
            Subcommand::Cv if self.lambda.is_some() => {
                return Err(Error::invalid("cv chooses lambda itself: pass --nlambda, not --lambda"))
            }
            Subcommand::Fit if self.nlambda.is_some() => {
                return Err(Error::invalid("fit uses a single --lambda; --nlambda belongs to cv"))
            }
            Subcommand::Ci if self.lambda.is_some_and(|l| l != 0.0) || self.penalty != PenaltyName::L1 => {
                return Err(Error::invalid("ci fits the unpenalized estimator; omit --lambda and --penalty"))
            }
            Subcommand::Simulate if self.out.is_none() => {
                return Err(Error::invalid("simulate needs --out for the CSV file"))
            }
            _ => {}
        }
        if self.lambda.is_some_and(|l| !(l >= 0.0 && l.is_finite())) {
            return Err(Error::invalid("lambda must be nonnegative"));
        }
        Ok(())
    }

    fn solve_options(&self, default_tol: f64) -> SolveOptions {
        SolveOptions {
            tol: self.tol.unwrap_or(default_tol),
            max_iter: self.max_iter,
            gamma_adaptive: self.gamma == GammaChoice::Auto,
            gamma_floor: GAMMA_FLOOR,
        }
    }

    fn loss(&self, data: &Dataset) -> Result<LossSpec> {
        match self.gamma {
            GammaChoice::Infinite => LossSpec::asymmetric_squared(self.tau),
            GammaChoice::Fixed(g) => LossSpec::new(self.tau, g),
            // replaced by the solver's initialization; any finite value will do
            GammaChoice::Auto => LossSpec::new(self.tau, crate::model::gamma_initial(data.n(), data.d()).max(GAMMA_FLOOR)),
        }
    }

    fn penalty_kind(&self) -> Result<PenaltyKind> {
        let kind = match self.penalty {
            PenaltyName::L1 => PenaltyKind::L1,
            PenaltyName::Scad => PenaltyKind::Scad { a: self.scad_a },
            PenaltyName::Mcp => PenaltyKind::Mcp { b: self.mcp_b },
        };
        kind.validate()?;
        Ok(kind)
    }

    fn irw(&self, lambda: f64) -> Result<IrwSpec> {
        let kind = self.penalty_kind()?;
        let steps = self.irw_steps.unwrap_or(if kind == PenaltyKind::L1 { 1 } else { IrwSpec::DEFAULT_STEPS });
        IrwSpec::new(PenaltySpec::new(kind, lambda)?, steps, self.solve_options(SolveOptions::default().tol))
    }
}

/// Read a headed numeric CSV. The response column is matched by header name
/// first, then as a 0-based index; the remaining columns become predictors
/// in header order. Rows and columns in errors are 0-based and exclude the
/// header.
pub fn parse_csv(path: &Path, response: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let width = header.len();
    let target = match header.iter().position(|h| h == response) {
        Some(k) => k,
        None => match response.parse::<usize>() {
            Ok(k) if k < width => k,
            _ => return Err(Error::MissingColumn(response.to_string())),
        },
    };
    let mut y = Vec::new();
    let mut cells = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != width {
            return Err(Error::RaggedRow { row, expected: width, found: record.len() });
        }
        for (col, cell) in record.iter().enumerate() {
            let v = cell
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or(Error::NonNumericCell { row, col })?;
            if col == target {
                y.push(v);
            } else {
                cells.push(v);
            }
        }
    }
    let n = y.len();
    let names: Vec<String> = header.iter().enumerate().filter(|(k, _)| *k != target).map(|(_, h)| h.clone()).collect();
    let x = DMatrix::from_row_slice(n, width - 1, &cells);
    Dataset::with_names(x, y, names)
}

/// Write `data` as a headed CSV with the response first.
pub fn write_csv(path: &Path, data: &Dataset, response: &str) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![response.to_string()];
    header.extend(data.names().iter().cloned());
    w.write_record(&header)?;
    let x = data.predictors();
    for i in 0..data.n() {
        let mut row = vec![data.response()[i].to_string()];
        row.extend((0..data.d()).map(|j| x[(i, j)].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn gamma_label(g: f64) -> String {
    if g.is_infinite() {
        "inf".into()
    } else {
        g.to_string()
    }
}

#[derive(Debug, Clone, Serialize)]
struct FitDoc {
    tau: f64,
    penalty: &'static str,
    names: Vec<String>,
    intercept: f64,
    coefficients: Vec<f64>,
    gamma_used: String,
    lambda: f64,
    iterations: usize,
    kkt_residual: f64,
    converged: bool,
}

impl FitDoc {
    fn new(cfg: &RunConfig, data: &Dataset, fit: &FitResult, lambda: f64) -> Self {
        Self {
            tau: cfg.tau,
            penalty: match cfg.penalty {
                PenaltyName::L1 => "l1",
                PenaltyName::Scad => "scad",
                PenaltyName::Mcp => "mcp",
            },
            names: data.names().to_vec(),
            intercept: fit.intercept,
            coefficients: fit.slopes.clone(),
            gamma_used: gamma_label(fit.gamma_used),
            lambda,
            iterations: fit.iterations,
            kkt_residual: fit.kkt_residual,
            converged: fit.converged,
        }
    }
}

#[derive(Serialize)]
struct CvDoc {
    #[serde(flatten)]
    fit: FitDoc,
    lambda_grid: Vec<f64>,
    mean_loss: Vec<f64>,
    se_loss: Vec<f64>,
    chosen_lambda: f64,
    rule: CvRule,
}

#[derive(Serialize)]
struct IntervalDoc {
    name: String,
    estimate: f64,
    stderr: f64,
    lower: f64,
    upper: f64,
}

#[derive(Serialize)]
struct CiDoc {
    #[serde(flatten)]
    fit: FitDoc,
    level: f64,
    intervals: Vec<IntervalDoc>,
}

#[derive(Serialize)]
struct SimulateDoc {
    csv: String,
    truth: String,
    model: SimModel,
    n: usize,
    d: usize,
    tau: f64,
    seed: u64,
    beta_star: Vec<f64>,
}

#[derive(Serialize)]
struct BenchDoc {
    model: SimModel,
    n: usize,
    d: usize,
    tau: f64,
    seed: u64,
    #[serde(flatten)]
    report: crate::sim::BenchReport,
}

/// Result of one run: the exit status, the JSON document (also on
/// non-convergence, where it reports the best iterate) and a one-line
/// diagnostic for failures.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub exit_code: i32,
    pub json: Option<String>,
    pub diagnostic: Option<String>,
}

fn exit_code_for(e: &Error) -> i32 {
    if e.is_convergence_failure() {
        EXIT_NONCONVERGENCE
    } else {
        EXIT_INPUT
    }
}

/// A solver result that may have stopped early: the fit to report and the
/// failure, if any.
fn salvage(r: Result<FitResult>) -> Result<(FitResult, Option<Error>)> {
    match r {
        Ok(f) => Ok((f, None)),
        Err(e) if e.is_convergence_failure() => Ok((e.best_iterate().expect("best iterate").clone(), Some(e))),
        Err(e) => Err(e),
    }
}

fn last_step(r: Result<Vec<FitResult>>) -> Result<FitResult> {
    r.map(|mut p| p.pop().expect("nonempty IRW path"))
}

fn fit_at(cfg: &RunConfig, data: &Dataset, loss: &LossSpec, lambda: f64) -> Result<FitResult> {
    if lambda == 0.0 {
        let opts = cfg.solve_options(SolveOptions::default().tol);
        if data.n() > data.d() + 1 {
            return fit_smooth(data, loss, &opts, None);
        }
        return fit_sncd(data, loss, &vec![0.0; data.d()], &opts, None);
    }
    last_step(fit_retire_penalized(data, loss, &cfg.irw(lambda)?, None))
}

fn to_json<T: Serialize>(doc: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}

fn execute(cfg: &RunConfig) -> Result<(String, Option<Error>)> {
    cfg.validate()?;
    match cfg.subcommand {
        Subcommand::Fit => {
            let data = parse_csv(cfg.input.as_deref().expect("validated"), &cfg.response)?;
            let loss = cfg.loss(&data)?;
            let lambda = cfg.lambda.unwrap_or(0.0);
            let (fit, failure) = salvage(fit_at(cfg, &data, &loss, lambda))?;
            Ok((to_json(&FitDoc::new(cfg, &data, &fit, lambda))?, failure))
        }
        Subcommand::Cv => {
            let data = parse_csv(cfg.input.as_deref().expect("validated"), &cfg.response)?;
            let loss = cfg.loss(&data)?;
            let irw = cfg.irw(1.0)?;
            let opts = CvOptions {
                nlambda: cfg.nlambda.unwrap_or(50),
                folds: cfg.folds,
                seed: cfg.seed,
                rule: cfg.rule.into(),
                serial: cfg.serial,
                ..CvOptions::default()
            };
            let cv = cross_validate(&data, &loss, &irw, &opts)?;
            let (fit, failure) = salvage(last_step(fit_retire_penalized(&data, &loss, &irw.with_lambda(cv.chosen_lambda)?, None)))?;
            let doc = CvDoc {
                fit: FitDoc::new(cfg, &data, &fit, cv.chosen_lambda),
                lambda_grid: cv.lambda_grid,
                mean_loss: cv.mean_loss,
                se_loss: cv.se_loss,
                chosen_lambda: cv.chosen_lambda,
                rule: cv.rule,
            };
            Ok((to_json(&doc)?, failure))
        }
        Subcommand::Ci => {
            let data = parse_csv(cfg.input.as_deref().expect("validated"), &cfg.response)?;
            let loss = cfg.loss(&data)?;
            let (fit, cis) = fit_retire_lowdim(&data, &loss, &cfg.solve_options(SolveOptions::default().tol), cfg.level)?;
            let mut labels = vec!["(intercept)".to_string()];
            labels.extend(data.names().iter().cloned());
            let intervals = cis
                .into_iter()
                .map(|c| IntervalDoc {
                    name: labels[c.index].clone(),
                    estimate: c.estimate,
                    stderr: c.stderr,
                    lower: c.lower,
                    upper: c.upper,
                })
                .collect();
            let doc = CiDoc { fit: FitDoc::new(cfg, &data, &fit, 0.0), level: cfg.level, intervals };
            Ok((to_json(&doc)?, None))
        }
        Subcommand::Simulate => {
            let spec = SimSpec::new(cfg.model.into(), cfg.n, cfg.d, cfg.noise, cfg.tau, cfg.seed);
            let (data, truth) = generate(&spec)?;
            let csv_path = cfg.out.as_deref().expect("validated");
            let truth_path = csv_path.with_extension("truth.json");
            write_csv(csv_path, &data, &cfg.response)?;
            let doc = SimulateDoc {
                csv: csv_path.display().to_string(),
                truth: truth_path.display().to_string(),
                model: spec.model,
                n: spec.n,
                d: spec.d,
                tau: spec.tau,
                seed: spec.seed,
                beta_star: truth.beta_star,
            };
            let json = to_json(&doc)?;
            File::create(&truth_path)?.write_all(json.as_bytes())?;
            Ok((json, None))
        }
        Subcommand::Bench => {
            let spec = SimSpec::new(cfg.model.into(), cfg.n, cfg.d, cfg.noise, cfg.tau, cfg.seed);
            let defaults = BenchSettings::default();
            let irw_penalty = match cfg.penalty {
                PenaltyName::L1 => defaults.irw_penalty,
                _ => cfg.penalty_kind()?,
            };
            let settings = BenchSettings {
                solve: SolveOptions { tol: cfg.tol.unwrap_or(defaults.solve.tol), max_iter: cfg.max_iter, ..defaults.solve },
                folds: cfg.folds,
                nlambda: cfg.nlambda.unwrap_or(defaults.nlambda),
                rule: cfg.rule.into(),
                irw_steps: cfg.irw_steps.unwrap_or(defaults.irw_steps),
                irw_penalty,
                threshold: defaults.threshold,
            };
            if cfg.reps == 0 {
                return Err(Error::invalid("bench needs at least one replication"));
            }
            let report = run_bench(&spec, &cfg.methods, cfg.reps, &settings, cfg.serial)?;
            let doc = BenchDoc { model: spec.model, n: spec.n, d: spec.d, tau: spec.tau, seed: spec.seed, report };
            Ok((to_json(&doc)?, None))
        }
    }
}

/// Execute one configuration. JSON goes to `--out` when given (except for
/// simulate, whose `--out` names the CSV) and is returned in either case.
pub fn run(cfg: &RunConfig) -> RunOutput {
    let outcome = execute(cfg).and_then(|(json, failure)| {
        if let (Some(path), false) = (&cfg.out, cfg.subcommand == Subcommand::Simulate) {
            File::create(path)?.write_all(json.as_bytes())?;
        }
        Ok((json, failure))
    });
    match outcome {
        Ok((json, None)) => RunOutput { exit_code: EXIT_OK, json: Some(json), diagnostic: None },
        Ok((json, Some(e))) => RunOutput { exit_code: exit_code_for(&e), json: Some(json), diagnostic: Some(e.to_string()) },
        Err(e) => RunOutput { exit_code: exit_code_for(&e), json: None, diagnostic: Some(e.to_string()) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_choices() {
        assert_eq!("auto".parse::<GammaChoice>().unwrap(), GammaChoice::Auto);
        assert_eq!("inf".parse::<GammaChoice>().unwrap(), GammaChoice::Infinite);
        assert_eq!("2.5".parse::<GammaChoice>().unwrap(), GammaChoice::Fixed(2.5));
        assert!("-1".parse::<GammaChoice>().is_err());
        assert!("0".parse::<GammaChoice>().is_err());
    }

    #[test]
    fn noise_flags() {
        assert_eq!(parse_noise("gaussian:2").unwrap(), NoiseDistribution::Gaussian { variance: 2.0 });
        assert_eq!(parse_noise("t:2.1").unwrap(), NoiseDistribution::StudentT { df: 2.1 });
        assert!(parse_noise("t:1.5").is_err());
        assert!(parse_noise("cauchy:1").is_err());
    }

    #[test]
    fn lambda_and_nlambda_are_exclusive_for_cv() {
        let cfg = RunConfig::from_args(["retire", "cv", "x.csv", "--lambda", "0.1"]).unwrap();
        let out = run(&cfg);
        assert_eq!(out.exit_code, EXIT_INPUT);
        assert!(out.json.is_none());
    }

    #[test]
    fn gamma_labels() {
        assert_eq!(gamma_label(f64::INFINITY), "inf");
        assert_eq!(gamma_label(0.1), "0.1");
    }
}
