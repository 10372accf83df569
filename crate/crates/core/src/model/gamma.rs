use crate::error::{Error, Result};

/// `Phi^{-1}(0.75)`, the MAD consistency constant for Gaussian data.
pub const PHI_INV_075: f64 = 0.674_489_750_196_081_7;

/// Starting value `sqrt(n / log(n p))` with `p = d + 1` columns (intercept included).
pub fn gamma_initial(n: usize, d: usize) -> f64 {
    let np = (n * (d + 1)) as f64;
    (n as f64 / np.max(3.0).ln()).sqrt()
}

fn median(v: &mut [f64]) -> f64 {
    let m = v.len();
    v.sort_unstable_by(f64::total_cmp);
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Robustification parameter from the asymmetric residuals
/// `(1 - tau) r` (for `r <= 0`) and `tau r` (for `r > 0`):
/// `max(floor, mad * sqrt(n / log(n p)))` with `mad` scaled by `1 / Phi^{-1}(0.75)`.
pub fn gamma_heuristic(residuals: &[f64], tau: f64, n: usize, p: usize, floor: f64) -> Result<f64> {
    if residuals.is_empty() {
        return Err(Error::invalid("gamma heuristic needs residuals"));
    }
    if n < 2 || p < 1 || n * p < 3 {
        return Err(Error::invalid(format!("gamma heuristic needs n >= 2, p >= 1, n p >= 3 (n={n}, p={p})")));
    }
    let mut asym: Vec<f64> = residuals
        .iter()
        .map(|&r| if r <= 0.0 { (1.0 - tau) * r } else { tau * r })
        .collect();
    let center = median(&mut asym);
    let mut dev: Vec<f64> = asym.iter().map(|a| (a - center).abs()).collect();
    let mad = median(&mut dev) / PHI_INV_075;
    let scale = (n as f64 / ((n * p) as f64).ln()).sqrt();
    Ok((mad * scale).max(floor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn consistency_constant_matches_normal_quantile() {
        let q = Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.75);
        assert!((q - PHI_INV_075).abs() < 1e-12);
    }

    #[test]
    fn hand_evaluated_example() {
        let g = gamma_heuristic(&[-2.0, -1.0, 0.0, 1.0, 2.0], 0.5, 5, 10, 1e-3).unwrap();
        let mad = 0.5 / 0.674490;
        let expected = mad * (5.0f64 / 50f64.ln()).sqrt();
        assert!((g - expected).abs() < 1e-5);
        assert!((g - 0.838).abs() < 5e-4);
    }

    #[test]
    fn constant_residuals_fall_to_floor() {
        assert_eq!(gamma_heuristic(&[1.3; 7], 0.7, 7, 3, 0.25).unwrap(), 0.25);
    }

    #[test]
    fn symmetric_under_negation_at_half() {
        let r = [0.3, -1.2, 2.5, 0.1, -0.7, 4.0];
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let a = gamma_heuristic(&r, 0.5, 6, 2, 1e-3).unwrap();
        let b = gamma_heuristic(&neg, 0.5, 6, 2, 1e-3).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn preconditions() {
        assert!(gamma_heuristic(&[], 0.5, 5, 1, 1e-3).is_err());
        assert!(gamma_heuristic(&[1.0], 0.5, 1, 2, 1e-3).is_err());
        assert!(gamma_heuristic(&[1.0, 2.0], 0.5, 2, 1, 1e-3).is_err());
    }
}
