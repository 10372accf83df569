//! Estimation drivers: low-dimensional retire with confidence intervals,
//! IRW-l1 penalized retire, the gamma heuristic and cross-validation.

mod cv;
mod gamma;
mod lowdim;
mod penalized;

pub use cv::{cross_validate, cross_validate_grid, lambda_grid, select_lambda, CvOptions, CvResult, CvRule};
pub use gamma::{gamma_heuristic, gamma_initial, PHI_INV_075};
pub use lowdim::{fit_retire_lowdim, sandwich_covariance, ConfidenceInterval};
pub use penalized::{fit_retire_penalized, IrwSpec};
