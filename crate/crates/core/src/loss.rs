//! Asymmetric Huber-type loss `L(u) = |tau - 1(u < 0)| * gamma^2 * huber(u / gamma)`.
//!
//! `gamma = +inf` is a first-class value and selects the asymmetric squared
//! loss `|tau - 1(u < 0)| * u^2 / 2` exactly.

use crate::error::{Error, Result};

/// Base robust loss `l` with `l_gamma(u) = gamma^2 * l(u / gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossKind {
    #[default]
    Huber,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSpec {
    tau: f64,
    gamma: f64,
    kind: LossKind,
}

impl LossSpec {
    pub fn new(tau: f64, gamma: f64) -> Result<Self> {
        Self::with_kind(tau, gamma, LossKind::Huber)
    }

    pub fn with_kind(tau: f64, gamma: f64, kind: LossKind) -> Result<Self> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::invalid(format!("tau must lie in (0, 1), got {tau}")));
        }
        if gamma.is_nan() || gamma <= 0.0 {
            return Err(Error::invalid(format!(
                "gamma must be positive or +inf, got {gamma}"
            )));
        }
        Ok(Self { tau, gamma, kind })
    }

    /// Asymmetric squared loss (expectile regression).
    pub fn asymmetric_squared(tau: f64) -> Result<Self> {
        Self::new(tau, f64::INFINITY)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn is_squared(&self) -> bool {
        self.gamma.is_infinite()
    }

    /// Same loss with a different robustification parameter.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::with_kind(self.tau, gamma, self.kind)
    }

    /// `|tau - 1(u < 0)|`; `u = 0` is weighted by `tau`.
    #[inline]
    pub fn weight(&self, u: f64) -> f64 {
        if u < 0.0 {
            1.0 - self.tau
        } else {
            self.tau
        }
    }

    #[inline]
    pub fn value(&self, u: f64) -> f64 {
        let a = u.abs();
        let base = if a <= self.gamma {
            0.5 * u * u
        } else {
            self.gamma * a - 0.5 * self.gamma * self.gamma
        };
        self.weight(u) * base
    }

    /// First derivative, `zeta(u)`.
    #[inline]
    pub fn grad(&self, u: f64) -> f64 {
        if u < 0.0 {
            (1.0 - self.tau) * u.max(-self.gamma)
        } else {
            self.tau * u.min(self.gamma)
        }
    }

    /// Second derivative; the closed branch is used at `|u| = gamma`.
    #[inline]
    pub fn hess(&self, u: f64) -> f64 {
        if u.abs() > self.gamma {
            0.0
        } else {
            self.weight(u)
        }
    }

    /// Mean loss over a residual vector.
    pub fn mean_value(&self, residuals: &[f64]) -> f64 {
        if residuals.is_empty() {
            return 0.0;
        }
        crate::sum::compensated(residuals.iter().map(|&r| self.value(r))) / residuals.len() as f64
    }
}

/// Asymmetric squared loss `|tau - 1(u < 0)| * u^2 / 2`.
#[inline]
pub fn asymmetric_squared(tau: f64, u: f64) -> f64 {
    let w = if u < 0.0 { 1.0 - tau } else { tau };
    w * (0.5 * u * u)
}
