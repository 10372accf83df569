//! Folded-concave penalty derivatives used as IRW-l1 weights.

use crate::error::{Error, Result};

pub const DEFAULT_SCAD_A: f64 = 3.7;
pub const DEFAULT_MCP_B: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PenaltyKind {
    L1,
    /// SCAD with shape `a > 2`.
    Scad { a: f64 },
    /// MCP with shape `b > 1`.
    Mcp { b: f64 },
}

impl PenaltyKind {
    pub fn scad() -> Self {
        PenaltyKind::Scad { a: DEFAULT_SCAD_A }
    }

    pub fn mcp() -> Self {
        PenaltyKind::Mcp { b: DEFAULT_MCP_B }
    }

    /// Derivative of the unit-level primitive `p0`, so that
    /// `p'_lambda(t) = lambda * p0'(t / lambda)`.
    pub fn unit_derivative(&self, s: f64) -> f64 {
        match *self {
            PenaltyKind::L1 => 1.0,
            PenaltyKind::Scad { a } => {
                if s <= 1.0 {
                    1.0
                } else {
                    (a - s).max(0.0) / (a - 1.0)
                }
            }
            PenaltyKind::Mcp { b } => (1.0 - s / b).max(0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PenaltyKind::L1 => Ok(()),
            PenaltyKind::Scad { a } if a > 2.0 && a.is_finite() => Ok(()),
            PenaltyKind::Mcp { b } if b > 1.0 && b.is_finite() => Ok(()),
            PenaltyKind::Scad { a } => Err(Error::invalid(format!("SCAD shape must exceed 2, got {a}"))),
            PenaltyKind::Mcp { b } => Err(Error::invalid(format!("MCP shape must exceed 1, got {b}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySpec {
    kind: PenaltyKind,
    lambda: f64,
}

impl PenaltySpec {
    pub fn new(kind: PenaltyKind, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
        }
        kind.validate()?;
        Ok(Self { kind, lambda })
    }

    pub fn kind(&self) -> PenaltyKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.kind, lambda)
    }

    /// `p'_lambda(t)` for `t >= 0`. Always in `[0, lambda]` and nonincreasing.
    pub fn weight_derivative(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::invalid(format!(
                "penalty derivative needs t >= 0, got {t}"
            )));
        }
        let lam = self.lambda;
        Ok(match self.kind {
            PenaltyKind::L1 => lam,
            PenaltyKind::Scad { a } => {
                if t <= lam {
                    lam
                } else {
                    (a * lam - t).max(0.0) / (a - 1.0)
                }
            }
            PenaltyKind::Mcp { b } => (lam - t / b).max(0.0),
        })
    }

    /// Weights `p'_lambda(|beta_j|)` for the penalized slopes of the previous iterate.
    pub fn weight_vector(&self, slopes: &[f64]) -> Result<Vec<f64>> {
        slopes.iter().map(|b| self.weight_derivative(b.abs())).collect()
    }
}
