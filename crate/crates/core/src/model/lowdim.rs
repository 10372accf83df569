use nalgebra::DMatrix;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::solver::{fit_smooth, FitResult, SolveOptions};
use crate::sum::Accumulator;

/// Largest acceptable condition estimate of the weighted Gram matrix.
const MAX_CONDITION: f64 = 1e12;

/// Normal-approximation interval for one coefficient (index 0 is the intercept).
///
/// `stderr` is the sandwich standard deviation `sigma(e_j)`; the interval
/// half-width is `z * stderr / sqrt(n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub index: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

fn critical_value(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("confidence level must lie in (0, 1), got {level}")));
    }
    if level == 0.95 {
        return Ok(1.96);
    }
    Ok(Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(0.5 + level / 2.0))
}

fn weighted_gram(data: &Dataset, weights: &[f64]) -> DMatrix<f64> {
    let n = data.n();
    let p = data.d() + 1;
    let entry = |i: usize, a: usize| if a == 0 { 1.0 } else { data.predictors()[(i, a - 1)] };
    let mut m = DMatrix::zeros(p, p);
    for a in 0..p {
        for b in 0..=a {
            let mut acc = Accumulator::default();
            for (i, w) in weights.iter().enumerate() {
                acc.add(w * entry(i, a) * entry(i, b));
            }
            let v = acc.value() / n as f64;
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
    }
    m
}

/// `J^-1 S J^-1` with `J = n^-1 sum w_tau(e_i) x_i x_i'` and
/// `S = n^-1 sum zeta(e_i)^2 x_i x_i'` over the intercept-augmented regressors.
pub fn sandwich_covariance(data: &Dataset, loss: &LossSpec, residuals: &[f64]) -> Result<DMatrix<f64>> {
    let w: Vec<f64> = residuals.iter().map(|&r| loss.weight(r)).collect();
    let s: Vec<f64> = residuals.iter().map(|&r| loss.grad(r).powi(2)).collect();
    let j = weighted_gram(data, &w);
    let eig = j.clone().symmetric_eigen();
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v.abs()), hi.max(v.abs())));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::SingularHessian { condition });
    }
    let j_inv = j.try_inverse().ok_or(Error::SingularHessian { condition })?;
    let meat = weighted_gram(data, &s);
    Ok(&j_inv * meat * &j_inv)
}

/// Unpenalized retire fit with per-coefficient confidence intervals at `level`.
pub fn fit_retire_lowdim(
    data: &Dataset,
    loss: &LossSpec,
    opts: &SolveOptions,
    level: f64,
) -> Result<(FitResult, Vec<ConfidenceInterval>)> {
    if data.n() <= data.d() + 1 {
        return Err(Error::invalid(format!(
            "low-dimensional retire needs n > d + 1, got n={}, d={}",
            data.n(),
            data.d()
        )));
    }
    let z = critical_value(level)?;
    let fit = fit_smooth(data, loss, opts, None)?;
    let used = loss.with_gamma(fit.gamma_used)?;
    let cov = sandwich_covariance(data, &used, &fit.residuals)?;
    let root_n = (data.n() as f64).sqrt();
    let cis = fit
        .coefficients()
        .into_iter()
        .enumerate()
        .map(|(index, estimate)| {
            let stderr = cov[(index, index)].max(0.0).sqrt();
            let half = z * stderr / root_n;
            ConfidenceInterval { index, estimate, stderr, lower: estimate - half, upper: estimate + half, level }
        })
        .collect();
    Ok((fit, cis))
}
