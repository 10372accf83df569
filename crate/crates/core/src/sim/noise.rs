use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal, StudentT};
use statrs::distribution::{Continuous, ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

const ROOT_TOL: f64 = 1e-10;

/// Mean-zero noise laws used by the simulation models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseDistribution {
    Gaussian { variance: f64 },
    StudentT { df: f64 },
    /// `scale * (E - 1)` with `E ~ Exp(1)`: right-skewed, mean zero.
    CenteredExponential { scale: f64 },
}

impl NoiseDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseDistribution::Gaussian { variance } if variance > 0.0 && variance.is_finite() => Ok(()),
            NoiseDistribution::StudentT { df } if df > 2.0 && df.is_finite() => Ok(()),
            NoiseDistribution::CenteredExponential { scale } if scale > 0.0 && scale.is_finite() => Ok(()),
            other => Err(Error::invalid(format!("invalid noise law {other:?}"))),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            NoiseDistribution::Gaussian { variance } => {
                variance.sqrt() * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
            }
            NoiseDistribution::StudentT { df } => StudentT::new(df).expect("validated df").sample(rng),
            NoiseDistribution::CenteredExponential { scale } => {
                let e: f64 = Exp1.sample(rng);
                scale * (e - 1.0)
            }
        }
    }

    pub fn is_symmetric(&self) -> bool {
        !matches!(self, NoiseDistribution::CenteredExponential { .. })
    }

    pub fn mean(&self) -> f64 {
        0.0
    }

    pub fn cdf(&self, z: f64) -> f64 {
        match *self {
            NoiseDistribution::Gaussian { variance } => std_normal().cdf(z / variance.sqrt()),
            NoiseDistribution::StudentT { df } => student(df).cdf(z),
            NoiseDistribution::CenteredExponential { scale } => {
                let e = z / scale + 1.0;
                if e <= 0.0 {
                    0.0
                } else {
                    -(-e).exp_m1()
                }
            }
        }
    }

    /// Inverse CDF at `tau`.
    pub fn quantile(&self, tau: f64) -> Result<f64> {
        self.validate()?;
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::invalid(format!("tau must lie in (0, 1), got {tau}")));
        }
        Ok(match *self {
            _ if tau == 0.5 && self.is_symmetric() => 0.0,
            NoiseDistribution::Gaussian { variance } => variance.sqrt() * std_normal().inverse_cdf(tau),
            NoiseDistribution::StudentT { df } => student(df).inverse_cdf(tau),
            NoiseDistribution::CenteredExponential { scale } => scale * (-(-tau).ln_1p() - 1.0),
        })
    }

    /// Upper partial moment `E (Z - e)_+` in closed form.
    pub fn upper_partial_moment(&self, e: f64) -> f64 {
        match *self {
            NoiseDistribution::Gaussian { variance } => {
                let s = variance.sqrt();
                let u = e / s;
                let nrm = std_normal();
                s * nrm.pdf(u) - e * nrm.sf(u)
            }
            NoiseDistribution::StudentT { df } => {
                let t = student(df);
                (df + e * e) / (df - 1.0) * t.pdf(e) - e * t.sf(e)
            }
            NoiseDistribution::CenteredExponential { scale } => {
                if e >= -scale {
                    scale * (-(e / scale + 1.0)).exp()
                } else {
                    -e
                }
            }
        }
    }

    /// The `tau`-expectile: the root of `tau E(Z-e)_+ - (1-tau) E(Z-e)_-`.
    pub fn expectile(&self, tau: f64) -> Result<f64> {
        self.validate()?;
        if tau == 0.5 && self.is_symmetric() {
            return Ok(self.mean());
        }
        let lo = self.quantile(0.001)?;
        let hi = self.quantile(0.999)?;
        expectile_root(|e| self.upper_partial_moment(e), self.mean(), tau, lo, hi)
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

fn student(df: f64) -> StudentsT {
    StudentsT::new(0.0, 1.0, df).expect("validated df")
}

/// Bisection for the expectile of a law given its upper partial moment
/// `e -> E(Z - e)_+` and mean, inside the bracket `[lo, hi]`.
pub fn expectile_root(upper: impl Fn(f64) -> f64, mean: f64, tau: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::invalid(format!("tau must lie in (0, 1), got {tau}")));
    }
    // E(Z-e)_- = E(Z-e)_+ - (mean - e); g is strictly decreasing in e
    let g = |e: f64| {
        let plus = upper(e);
        tau * plus - (1.0 - tau) * (plus - (mean - e))
    };
    let (mut a, mut b) = (lo, hi);
    let (ga, gb) = (g(a), g(b));
    if !(ga >= 0.0 && gb <= 0.0) {
        return Err(Error::BracketFailure { lo, hi });
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if g(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let e = if g(a).abs() <= g(b).abs() { a } else { b };
    if g(e).abs() > ROOT_TOL {
        return Err(Error::BracketFailure { lo, hi });
    }
    Ok(e)
}
