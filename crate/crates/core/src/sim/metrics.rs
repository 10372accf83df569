use serde::Serialize;

use super::generate::TruthVector;
use crate::solver::FitResult;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub l2_error: f64,
    pub tpr: f64,
    pub fpr: f64,
}

/// l2 error over intercept and slopes; TPR/FPR over slopes only, a slope
/// counting as selected when `|beta_j| > threshold`.
pub fn evaluate(fit: &FitResult, truth: &TruthVector, threshold: f64) -> Metrics {
    assert_eq!(fit.slopes.len(), truth.slopes().len(), "fit and truth dimensions differ");
    let coef = fit.coefficients();
    let l2_error = coef
        .iter()
        .zip(&truth.beta_star)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let (mut tp, mut fp, mut s) = (0usize, 0usize, 0usize);
    for (est, tru) in fit.slopes.iter().zip(truth.slopes()) {
        let selected = est.abs() > threshold;
        if *tru != 0.0 {
            s += 1;
            tp += usize::from(selected);
        } else {
            fp += usize::from(selected);
        }
    }
    let nulls = fit.slopes.len() - s;
    let tpr = if s == 0 { 1.0 } else { tp as f64 / s as f64 };
    let fpr = if nulls == 0 { 0.0 } else { fp as f64 / nulls as f64 };
    Metrics { l2_error, tpr, fpr }
}
