//! Robust expectile regression (retire).
//!
//! The estimator minimizes an asymmetric Huber loss, optionally with a
//! weighted l1 or folded-concave (SCAD, MCP) penalty solved by iteratively
//! reweighted l1 and semismooth Newton coordinate descent. Also included:
//! sandwich confidence intervals, K-fold cross-validation, and a seeded
//! simulation harness.

pub mod cli;
pub mod data;
pub mod error;
pub mod loss;
pub mod model;
pub mod parallel;
pub mod penalty;
pub mod sim;
pub mod solver;
pub mod sum;

pub use data::Dataset;
pub use error::{Error, Result};
pub use loss::{LossKind, LossSpec};
pub use model::{cross_validate, fit_retire_lowdim, fit_retire_penalized, CvOptions, CvResult, CvRule, IrwSpec};
pub use penalty::{PenaltyKind, PenaltySpec};
pub use solver::{fit_smooth, fit_sncd, FitResult, SolveOptions};
