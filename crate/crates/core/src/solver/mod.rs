//! Optimization engines: semismooth Newton coordinate descent for weighted-l1
//! problems and a damped Newton solver for the unpenalized problem.

mod sncd;
mod smooth;

pub use sncd::{continuity_triggered, fit_sncd, lambda_max, stabilized_denominator, SncdState};
pub use smooth::{fit_intercept_only, fit_smooth};

use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::sum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Stopping tolerance on the iterate distance (SNCD) or gradient sup-norm (smooth solver).
    pub tol: f64,
    pub max_iter: usize,
    /// Re-tune gamma from the current residuals at every outer sweep.
    pub gamma_adaptive: bool,
    pub gamma_floor: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-7, max_iter: 2000, gamma_adaptive: false, gamma_floor: 1e-3 }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        if !(self.gamma_floor > 0.0) {
            return Err(Error::invalid("gamma_floor must be positive"));
        }
        Ok(())
    }

    /// Tolerance of the KKT certificate attached to converged fits.
    pub fn kkt_tol(&self) -> f64 {
        10.0 * self.tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub intercept: f64,
    pub slopes: Vec<f64>,
    /// Subgradient of `|beta_j|` for each slope.
    pub subgradient: Vec<f64>,
    pub gamma_used: f64,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
    pub residuals: Vec<f64>,
}

impl FitResult {
    /// Intercept followed by slopes.
    pub fn coefficients(&self) -> Vec<f64> {
        std::iter::once(self.intercept).chain(self.slopes.iter().copied()).collect()
    }

    pub fn nonzeros(&self) -> usize {
        self.slopes.iter().filter(|b| **b != 0.0).count()
    }

    /// Loss the fit ended with, at its final gamma.
    pub fn loss(&self, tau: f64) -> Result<LossSpec> {
        LossSpec::new(tau, self.gamma_used)
    }
}

/// Penalized empirical risk `n^-1 sum L(r_i) + sum_j w_j |beta_j|`.
pub fn penalized_objective(data: &Dataset, loss: &LossSpec, weights: &[f64], intercept: f64, slopes: &[f64]) -> f64 {
    let r = data.residuals(intercept, slopes);
    let pen = sum::compensated(weights.iter().zip(slopes).map(|(w, b)| w * b.abs()));
    loss.mean_value(&r) + pen
}

/// Residual of the KKT system for a weighted-l1 problem, recomputed from the
/// data and coefficients alone:
/// (a) intercept score, (b) slope score plus `w_j z_j`, (c) `beta_j - S(beta_j + z_j)`.
pub fn kkt_residual(
    data: &Dataset,
    loss: &LossSpec,
    weights: &[f64],
    intercept: f64,
    slopes: &[f64],
    subgradient: &[f64],
) -> f64 {
    let n = data.n() as f64;
    let r = data.residuals(intercept, slopes);
    let psi: Vec<f64> = r.iter().map(|&u| loss.grad(u)).collect();
    let mut worst = (sum::compensated(psi.iter().copied()) / n).abs();
    for j in 0..data.d() {
        let score = sum::dot(&psi, data.column(j)) / n;
        worst = worst.max((-score + weights[j] * subgradient[j]).abs());
        worst = worst.max((slopes[j] - soft_threshold(slopes[j] + subgradient[j])).abs());
    }
    worst
}

/// Unit soft-threshold `S(u) = sign(u) max(|u| - 1, 0)`.
#[inline]
pub fn soft_threshold(u: f64) -> f64 {
    u.signum() * (u.abs() - 1.0).max(0.0)
}

#[inline]
pub(crate) fn sign(u: f64) -> f64 {
    if u > 0.0 {
        1.0
    } else if u < 0.0 {
        -1.0
    } else {
        0.0
    }
}
