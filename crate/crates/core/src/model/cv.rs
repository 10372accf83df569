use rand::seq::SliceRandom;
use serde::Serialize;

use super::penalized::{fit_retire_penalized, IrwSpec};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::loss::{asymmetric_squared, LossSpec};
use crate::parallel;
use crate::sim::rng::{stream, Purpose};
use crate::solver::{lambda_max, FitResult};
use crate::sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CvRule {
    /// Largest lambda within one standard error of the minimum.
    #[serde(rename = "1se")]
    OneSe,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvOptions {
    pub nlambda: usize,
    /// Smallest grid value as a fraction of `lambda_max`.
    pub ratio: f64,
    pub folds: usize,
    pub seed: u64,
    pub rule: CvRule,
    pub serial: bool,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self { nlambda: 50, ratio: 0.01, folds: 10, seed: 0, rule: CvRule::OneSe, serial: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvResult {
    pub lambda_grid: Vec<f64>,
    pub mean_loss: Vec<f64>,
    pub se_loss: Vec<f64>,
    pub chosen_lambda: f64,
    pub rule: CvRule,
}

impl CvResult {
    /// Lambda the given rule picks from the same validation curve.
    pub fn lambda_for(&self, rule: CvRule) -> f64 {
        self.lambda_grid[select_lambda(rule, &self.mean_loss, &self.se_loss)]
    }
}

/// `nlambda` log-spaced values from `lambda_max` down to `ratio * lambda_max`.
pub fn lambda_grid(lambda_max: f64, nlambda: usize, ratio: f64) -> Result<Vec<f64>> {
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(Error::invalid(
            "degenerate lambda grid: lambda_max is zero (the intercept alone fits the data)",
        ));
    }
    if nlambda < 2 {
        return Err(Error::invalid("nlambda must be at least 2"));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::invalid("lambda ratio must lie in (0, 1)"));
    }
    let (hi, lo) = (lambda_max.ln(), (lambda_max * ratio).ln());
    let step = (hi - lo) / (nlambda - 1) as f64;
    let mut grid: Vec<f64> = (0..nlambda).map(|k| (hi - step * k as f64).exp()).collect();
    grid[0] = lambda_max;
    Ok(grid)
}

/// Index chosen by `rule` on a curve ordered by decreasing lambda.
pub fn select_lambda(rule: CvRule, mean_loss: &[f64], se_loss: &[f64]) -> usize {
    let best = mean_loss
        .iter()
        .enumerate()
        .fold(0, |b, (k, v)| if *v < mean_loss[b] { k } else { b });
    match rule {
        CvRule::Min => best,
        CvRule::OneSe => {
            let threshold = mean_loss[best] + se_loss[best];
            mean_loss.iter().position(|v| *v <= threshold).unwrap_or(best)
        }
    }
}

fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut stream(seed, 0, Purpose::Folds));
    let mut out = vec![Vec::new(); folds];
    for (k, i) in perm.into_iter().enumerate() {
        out[k % folds].push(i);
    }
    for f in &mut out {
        f.sort_unstable();
    }
    out
}

fn settle(r: Result<Vec<FitResult>>) -> Result<FitResult> {
    match r {
        Ok(mut path) => Ok(path.pop().expect("IRW returns at least one iterate")),
        // a fold fit that ran out of iterations still yields a usable validation score
        Err(e) if e.is_convergence_failure() => Ok(e.best_iterate().expect("convergence failures carry an iterate").clone()),
        Err(e) => Err(e),
    }
}

fn validation_loss(held_out: &Dataset, fit: &FitResult, tau: f64) -> f64 {
    let r = held_out.residuals(fit.intercept, &fit.slopes);
    sum::compensated(r.iter().map(|&u| asymmetric_squared(tau, u))) / r.len() as f64
}

/// K-fold cross-validation of the IRW estimator over a log-spaced grid from
/// `lambda_max` to `ratio * lambda_max`. Validation loss is the asymmetric
/// squared loss at the loss's `tau`.
pub fn cross_validate(data: &Dataset, loss: &LossSpec, irw: &IrwSpec, cv: &CvOptions) -> Result<CvResult> {
    let (lmax, _) = lambda_max(data, loss, &irw.solve)?;
    let grid = lambda_grid(lmax, cv.nlambda, cv.ratio)?;
    cross_validate_grid(data, loss, irw, &grid, cv)
}

/// Cross-validation on a caller-supplied strictly decreasing grid.
pub fn cross_validate_grid(data: &Dataset, loss: &LossSpec, irw: &IrwSpec, grid: &[f64], cv: &CvOptions) -> Result<CvResult> {
    if grid.len() < 2 {
        return Err(Error::invalid("lambda grid needs at least 2 values"));
    }
    if grid.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::invalid("lambda grid values must be positive"));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("lambda grid must be strictly decreasing without duplicates"));
    }
    if cv.folds < 2 {
        return Err(Error::invalid("cross-validation needs at least 2 folds"));
    }
    if cv.folds > data.n() {
        return Err(Error::invalid(format!("{} folds exceed n = {}", cv.folds, data.n())));
    }

    let assignment = fold_assignment(data.n(), cv.folds, cv.seed);
    let mut fold_of = vec![0usize; data.n()];
    for (k, idx) in assignment.iter().enumerate() {
        for &i in idx {
            fold_of[i] = k;
        }
    }
    let tau = loss.tau();
    let per_fold: Vec<Result<Vec<f64>>> = parallel::map_indexed(cv.folds, cv.serial, |k| {
        let held = &assignment[k];
        let train_idx: Vec<usize> = (0..data.n()).filter(|i| fold_of[*i] != k).collect();
        let train = data.subset(&train_idx);
        let test = data.subset(held);
        let mut warm: Option<FitResult> = None;
        let mut losses = Vec::with_capacity(grid.len());
        for &lam in grid {
            let spec = irw.with_lambda(lam)?;
            let mut path = match fit_retire_penalized(&train, loss, &spec, warm.as_ref()) {
                Ok(p) => p,
                Err(e) if e.is_convergence_failure() => vec![settle(Err(e))?],
                Err(e) => return Err(e),
            };
            let last = path.pop().expect("nonempty");
            losses.push(validation_loss(&test, &last, tau));
            warm = Some(path.into_iter().next().unwrap_or(last));
        }
        Ok(losses)
    });
    let per_fold = per_fold.into_iter().collect::<Result<Vec<_>>>()?;

    let k = cv.folds as f64;
    let mut mean_loss = Vec::with_capacity(grid.len());
    let mut se_loss = Vec::with_capacity(grid.len());
    for l in 0..grid.len() {
        let vals: Vec<f64> = per_fold.iter().map(|f| f[l]).collect();
        let mean = sum::compensated(vals.iter().copied()) / k;
        let var = sum::compensated(vals.iter().map(|v| (v - mean).powi(2))) / (k - 1.0);
        mean_loss.push(mean);
        se_loss.push((var / k).sqrt());
    }
    let chosen = select_lambda(cv.rule, &mean_loss, &se_loss);
    Ok(CvResult { lambda_grid: grid.to_vec(), mean_loss, se_loss, chosen_lambda: grid[chosen], rule: cv.rule })
}
