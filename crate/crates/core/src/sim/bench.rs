//! Seeded Monte Carlo replications comparing penalized estimators.

use std::time::Instant;

use serde::Serialize;

use super::generate::{generate, SimSpec};
use super::metrics::{evaluate, Metrics};
use crate::error::Result;
use crate::loss::LossSpec;
use crate::model::{cross_validate, fit_retire_penalized, CvOptions, CvRule, IrwSpec};
use crate::parallel;
use crate::penalty::{PenaltyKind, PenaltySpec};
use crate::solver::{FitResult, SolveOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    /// l1-penalized retire at the target tau, adaptive gamma.
    #[serde(rename = "retire-l1")]
    RetireL1,
    /// IRW-l1 retire with folded-concave weights, adaptive gamma.
    #[serde(rename = "retire-irw")]
    RetireIrw,
    /// l1-penalized Huber regression (tau = 0.5), adaptive gamma.
    #[serde(rename = "huber")]
    Huber,
    /// l1-penalized asymmetric least squares (gamma = inf).
    #[serde(rename = "sales")]
    Sales,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::RetireL1, Method::RetireIrw, Method::Huber, Method::Sales];

    pub fn name(&self) -> &'static str {
        match self {
            Method::RetireL1 => "retire-l1",
            Method::RetireIrw => "retire-irw",
            Method::Huber => "huber",
            Method::Sales => "sales",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchSettings {
    pub solve: SolveOptions,
    pub folds: usize,
    pub nlambda: usize,
    pub rule: CvRule,
    pub irw_steps: usize,
    /// Penalty used by the IRW method.
    pub irw_penalty: PenaltyKind,
    /// TPR/FPR selection threshold.
    pub threshold: f64,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            solve: SolveOptions { tol: 1e-6, max_iter: 2000, gamma_adaptive: true, gamma_floor: 1e-3 },
            folds: 10,
            nlambda: 50,
            rule: CvRule::OneSe,
            irw_steps: 3,
            irw_penalty: PenaltyKind::scad(),
            threshold: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub metrics: Metrics,
    pub lambda: f64,
    pub seconds: f64,
    pub fit: FitResult,
}

/// Loss, cross-validation template and final-fit spec for one method.
/// IRW tunes lambda on its l1 first step and reweights at the chosen value.
fn method_setup(method: Method, tau: f64, settings: &BenchSettings) -> Result<(LossSpec, IrwSpec, IrwSpec)> {
    let adaptive = SolveOptions { gamma_adaptive: true, ..settings.solve };
    let fixed = SolveOptions { gamma_adaptive: false, ..settings.solve };
    // lambda is a placeholder; cross-validation replaces it
    let l1 = PenaltySpec::new(PenaltyKind::L1, 1.0)?;
    let plain = |loss: LossSpec, solve: SolveOptions| -> Result<(LossSpec, IrwSpec, IrwSpec)> {
        let spec = IrwSpec::new(l1, 1, solve)?;
        Ok((loss, spec, spec))
    };
    match method {
        Method::RetireL1 => plain(LossSpec::new(tau, 1.0)?, adaptive),
        Method::RetireIrw => Ok((
            LossSpec::new(tau, 1.0)?,
            IrwSpec::new(l1, 1, adaptive)?,
            IrwSpec::new(PenaltySpec::new(settings.irw_penalty, 1.0)?, settings.irw_steps, adaptive)?,
        )),
        Method::Huber => plain(LossSpec::new(0.5, 1.0)?, adaptive),
        Method::Sales => plain(LossSpec::asymmetric_squared(tau)?, fixed),
    }
}

fn final_fit(r: Result<Vec<FitResult>>) -> Result<FitResult> {
    match r {
        Ok(mut path) => Ok(path.pop().expect("nonempty IRW path")),
        Err(e) if e.is_convergence_failure() => Ok(e.best_iterate().expect("iterate").clone()),
        Err(e) => Err(e),
    }
}

/// One replication: draw data, then for each method cross-validate lambda
/// and refit on the full sample at the chosen value.
pub fn run_replication(spec: &SimSpec, methods: &[Method], settings: &BenchSettings, serial: bool) -> Result<Vec<MethodOutcome>> {
    let (data, truth) = generate(spec)?;
    methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let (loss, tuning, irw) = method_setup(method, spec.tau, settings)?;
            let cv = CvOptions {
                nlambda: settings.nlambda,
                ratio: 0.01,
                folds: settings.folds,
                seed: spec.seed ^ spec.replication.rotate_left(17),
                rule: settings.rule,
                serial,
            };
            let cvres = cross_validate(&data, &loss, &tuning, &cv)?;
            let fit = final_fit(fit_retire_penalized(&data, &loss, &irw.with_lambda(cvres.chosen_lambda)?, None))?;
            let seconds = start.elapsed().as_secs_f64();
            Ok(MethodOutcome { method, metrics: evaluate(&fit, &truth, settings.threshold), lambda: cvres.chosen_lambda, seconds, fit })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub method: Method,
    pub l2_error: Summary,
    pub tpr: Summary,
    pub fpr: Summary,
    pub seconds: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub reps: usize,
    pub rows: Vec<BenchRow>,
    pub total_seconds: f64,
}

impl BenchReport {
    pub fn row(&self, method: Method) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.method == method)
    }
}

/// `reps` replications (streams `0..reps` of `spec.seed`), run
/// concurrently unless `serial`; rows follow the order of `methods`.
pub fn run_bench(spec: &SimSpec, methods: &[Method], reps: usize, settings: &BenchSettings, serial: bool) -> Result<BenchReport> {
    let start = Instant::now();
    let outcomes = parallel::map_indexed(reps, serial, |r| run_replication(&spec.replication(r as u64), methods, settings, true));
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let rows = methods
        .iter()
        .enumerate()
        .map(|(m, &method)| {
            let pick = |f: &dyn Fn(&MethodOutcome) -> f64| -> Summary {
                Summary::of(&outcomes.iter().map(|o| f(&o[m])).collect::<Vec<_>>())
            };
            BenchRow {
                method,
                l2_error: pick(&|o| o.metrics.l2_error),
                tpr: pick(&|o| o.metrics.tpr),
                fpr: pick(&|o| o.metrics.fpr),
                seconds: pick(&|o| o.seconds),
            }
        })
        .collect();
    Ok(BenchReport { reps, rows, total_seconds: start.elapsed().as_secs_f64() })
}
