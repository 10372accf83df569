use nalgebra::DMatrix;
use serde::Serialize;

use super::noise::NoiseDistribution;
use super::rng::{stream, Purpose};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Nonzero slopes of the canonical design, placed at predictors 1, 3, ..., 19
/// (0-based predictor index; coefficient positions 2, 4, ..., 20 counting the intercept as 1).
pub const CANONICAL_SLOPES: [f64; 10] = [1.8, 1.6, 1.4, 1.2, 1.0, -1.0, -1.2, -1.4, -1.6, -1.8];
pub const CANONICAL_INTERCEPT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SimModel {
    /// `y = x' beta + eps`
    Homoscedastic,
    /// `y = x' beta + (0.5 |x_d| + 0.5) (eps - F^{-1}(tau))`
    QuantileHeteroscedastic,
    /// `y = x' beta + (0.5 |x_d| + 0.5) (eps - e_tau(eps))`
    ExpectileHeteroscedastic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BetaPattern {
    Canonical,
    /// Intercept followed by `d` slopes.
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub model: SimModel,
    pub n: usize,
    pub d: usize,
    pub noise: NoiseDistribution,
    pub tau: f64,
    pub seed: u64,
    pub replication: u64,
    pub beta: BetaPattern,
    /// Correlation base `rho` of the `rho^|j-k|` covariance.
    pub rho: f64,
}

impl SimSpec {
    pub fn new(model: SimModel, n: usize, d: usize, noise: NoiseDistribution, tau: f64, seed: u64) -> Self {
        Self { model, n, d, noise, tau, seed, replication: 0, beta: BetaPattern::Canonical, rho: 0.5 }
    }

    pub fn replication(&self, r: u64) -> Self {
        Self { replication: r, ..self.clone() }
    }

    fn design_beta(&self) -> Result<Vec<f64>> {
        match &self.beta {
            BetaPattern::Canonical => {
                if self.d < 20 {
                    return Err(Error::invalid(format!("the canonical coefficient pattern needs d >= 20, got {}", self.d)));
                }
                let mut b = vec![0.0; self.d + 1];
                b[0] = CANONICAL_INTERCEPT;
                for (k, v) in CANONICAL_SLOPES.iter().enumerate() {
                    b[1 + 2 * k] = *v;
                }
                Ok(b)
            }
            BetaPattern::Custom(b) if b.len() == self.d + 1 => Ok(b.clone()),
            BetaPattern::Custom(b) => Err(Error::invalid(format!(
                "custom coefficients need length d + 1 = {}, got {}",
                self.d + 1,
                b.len()
            ))),
        }
    }
}

/// Target coefficients, intercept first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthVector {
    pub beta_star: Vec<f64>,
}

impl TruthVector {
    pub fn intercept(&self) -> f64 {
        self.beta_star[0]
    }

    pub fn slopes(&self) -> &[f64] {
        &self.beta_star[1..]
    }

    pub fn support(&self) -> usize {
        self.slopes().iter().filter(|b| **b != 0.0).count()
    }
}

/// `Sigma_jk = rho^|j - k|`.
pub fn ar_covariance(d: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |j, k| rho.powi((j as i32 - k as i32).abs()))
}

/// Draw one dataset. Predictors are `N(0, Sigma)` through the Cholesky factor
/// of `Sigma`; noise is i.i.d. from `spec.noise`. The returned truth is the
/// design vector, except that under the homoscedastic model the intercept is
/// shifted by `e_tau(eps)` (the population expectile-regression target; zero
/// shift at `tau = 0.5` for the symmetric laws).
pub fn generate(spec: &SimSpec) -> Result<(Dataset, TruthVector)> {
    spec.noise.validate()?;
    if spec.n == 0 || spec.d == 0 {
        return Err(Error::invalid("simulation needs n >= 1 and d >= 1"));
    }
    if !(spec.tau > 0.0 && spec.tau < 1.0) {
        return Err(Error::invalid(format!("tau must lie in (0, 1), got {}", spec.tau)));
    }
    if !(spec.rho.abs() < 1.0) {
        return Err(Error::invalid("correlation base must lie in (-1, 1)"));
    }
    let beta = spec.design_beta()?;
    let (n, d) = (spec.n, spec.d);

    let chol = ar_covariance(d, spec.rho)
        .cholesky()
        .ok_or_else(|| Error::invalid("covariance is not positive definite"))?;
    let lower = chol.l();

    let mut rng = stream(spec.seed, spec.replication, Purpose::Design);
    let normal = NoiseDistribution::Gaussian { variance: 1.0 };
    let mut z = DMatrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            z[(i, j)] = normal.sample(&mut rng);
        }
    }
    let x = z * lower.transpose();

    let mut rng = stream(spec.seed, spec.replication, Purpose::Noise);
    let center = match spec.model {
        SimModel::Homoscedastic => 0.0,
        SimModel::QuantileHeteroscedastic => spec.noise.quantile(spec.tau)?,
        SimModel::ExpectileHeteroscedastic => spec.noise.expectile(spec.tau)?,
    };
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let eps = spec.noise.sample(&mut rng);
        let mut yi = beta[0];
        for j in 0..d {
            yi += x[(i, j)] * beta[j + 1];
        }
        yi += match spec.model {
            SimModel::Homoscedastic => eps,
            _ => (0.5 * x[(i, d - 1)].abs() + 0.5) * (eps - center),
        };
        y.push(yi);
    }

    let mut beta_star = beta;
    if spec.model == SimModel::Homoscedastic {
        beta_star[0] += spec.noise.expectile(spec.tau)?;
    }
    Ok((Dataset::new(x, y)?, TruthVector { beta_star }))
}
