mod common;

use common::{golden, gaussian_data, ols, proximal_gradient, sup_dist};
use nalgebra::DMatrix;
use proptest::prelude::*;
use retire::solver::{fit_intercept_only, kkt_residual, lambda_max, penalized_objective};
use retire::{fit_smooth, fit_sncd, Dataset, LossSpec, SolveOptions};

fn tight() -> SolveOptions {
    SolveOptions { tol: 1e-9, max_iter: 20_000, ..SolveOptions::default() }
}

#[test]
fn smooth_solver_matches_normal_equations() {
    let data = gaussian_data(120, &[1.0, 2.0, -1.0, 0.5, 0.0], 1.0, 3);
    let fit = fit_smooth(&data, &LossSpec::asymmetric_squared(0.5).unwrap(), &tight(), None).unwrap();
    assert!(sup_dist(&fit.coefficients(), &ols(&data)) < 1e-9);
}

#[test]
fn sncd_without_penalty_matches_smooth_solver() {
    let data = gaussian_data(80, &[0.5, 1.0, 0.0, -2.0], 1.5, 5);
    for (tau, gamma) in [(0.3, 1.0), (0.8, 2.5), (0.5, f64::INFINITY)] {
        let loss = LossSpec::new(tau, gamma).unwrap();
        let a = fit_sncd(&data, &loss, &[0.0; 3], &tight(), None).unwrap();
        let b = fit_smooth(&data, &loss, &tight(), None).unwrap();
        assert!(sup_dist(&a.coefficients(), &b.coefficients()) < 1e-6, "tau={tau} gamma={gamma}");
    }
}

#[test]
fn sncd_matches_proximal_gradient() {
    for seed in 0..6 {
        let data = gaussian_data(60, &[1.0, 1.5, 0.0, -1.0, 0.0, 0.3], 1.0, 100 + seed);
        let tau = [0.2, 0.5, 0.9][seed as usize % 3];
        let loss = LossSpec::new(tau, 1.5).unwrap();
        let w = [0.05, 0.2, 0.1, 0.0, 0.3];
        let fit = fit_sncd(&data, &loss, &w, &tight(), None).unwrap();
        let reference = proximal_gradient(&data, &loss, &w, 200_000);
        assert!(sup_dist(&fit.coefficients(), &reference) < 1e-5, "seed {seed}");
        let mine = penalized_objective(&data, &loss, &w, fit.intercept, &fit.slopes);
        let theirs = penalized_objective(&data, &loss, &w, reference[0], &reference[1..]);
        assert!(mine <= theirs + 1e-10);
    }
}

#[test]
fn one_predictor_matches_nested_golden_section() {
    let data = gaussian_data(40, &[0.3, 1.2], 0.8, 9);
    let loss = LossSpec::new(0.7, 0.9).unwrap();
    let lam = 0.15;
    let obj = |b0: f64, b1: f64| penalized_objective(&data, &loss, &[lam], b0, &[b1]);
    let best_b0 = |b1: f64| golden(|b0| obj(b0, b1), -10.0, 10.0, 1e-11);
    let b1 = golden(|b1| obj(best_b0(b1), b1), -10.0, 10.0, 1e-10);
    let b0 = best_b0(b1);
    let fit = fit_sncd(&data, &loss, &[lam], &tight(), None).unwrap();
    assert!((fit.slopes[0] - b1).abs() < 1e-6);
    assert!((fit.intercept - b0).abs() < 1e-6);
}

#[test]
fn lambda_max_zeroes_every_slope() {
    let data = gaussian_data(70, &[1.0, 0.8, -0.6, 0.0, 0.4], 1.0, 21);
    let loss = LossSpec::new(0.6, 1.2).unwrap();
    let (lmax, base) = lambda_max(&data, &loss, &tight()).unwrap();
    let fit = fit_sncd(&data, &loss, &[lmax * 1.0001; 4], &tight(), None).unwrap();
    assert!(fit.slopes.iter().all(|b| *b == 0.0));
    assert!((fit.intercept - base.intercept).abs() < 1e-7);
    let below = fit_sncd(&data, &loss, &[lmax * 0.95; 4], &tight(), None).unwrap();
    assert!(below.nonzeros() > 0);
}

#[test]
fn certificate_holds_at_returned_fit() {
    let data = gaussian_data(90, &[0.0, 1.0, 1.0, 0.0, 0.0, -1.0, 0.0], 2.0, 31);
    let loss = LossSpec::new(0.25, 0.7).unwrap();
    let w = vec![0.08; 6];
    let opts = SolveOptions { tol: 1e-7, ..SolveOptions::default() };
    let fit = fit_sncd(&data, &loss, &w, &opts, None).unwrap();
    assert!(fit.converged);
    let k = kkt_residual(&data, &loss, &w, fit.intercept, &fit.slopes, &fit.subgradient);
    assert!(k <= opts.kkt_tol());
    assert!(fit.subgradient.iter().all(|z| z.abs() <= 1.0));
    for (b, z) in fit.slopes.iter().zip(&fit.subgradient) {
        if *b != 0.0 {
            assert_eq!(*z, b.signum());
        }
    }
}

#[test]
fn objective_not_above_simple_candidates() {
    let data = gaussian_data(50, &[2.0, 0.5, -0.5, 0.25], 1.0, 41);
    let loss = LossSpec::new(0.4, 1.0).unwrap();
    let w = [0.1; 3];
    let fit = fit_sncd(&data, &loss, &w, &tight(), None).unwrap();
    let f = penalized_objective(&data, &loss, &w, fit.intercept, &fit.slopes);
    let base = fit_intercept_only(&data, &loss, &tight()).unwrap();
    assert!(f <= penalized_objective(&data, &loss, &w, base.intercept, &[0.0; 3]) + 1e-12);
    let o = ols(&data);
    assert!(f <= penalized_objective(&data, &loss, &w, o[0], &o[1..]) + 1e-12);
}

#[test]
fn row_permutation_invariance() {
    let data = gaussian_data(64, &[1.0, 1.0, 0.0, -1.0, 0.5], 1.0, 51);
    let loss = LossSpec::new(0.8, 1.3).unwrap();
    let w = [0.05; 4];
    let fit = fit_sncd(&data, &loss, &w, &tight(), None).unwrap();
    let perm: Vec<usize> = (0..64).map(|i| (i * 37 + 11) % 64).collect();
    let shuffled = data.subset(&perm);
    let again = fit_sncd(&shuffled, &loss, &w, &tight(), None).unwrap();
    assert!(sup_dist(&fit.coefficients(), &again.coefficients()) < 1e-8);
}

#[test]
fn symmetric_huber_recovers_location_mean_for_symmetric_sample() {
    // tau = 1/2 collapses to half the Huber loss; a sample symmetric about 3 has location 3
    let y: Vec<f64> = [-4.0, -1.0, -0.5, 0.0, 0.5, 1.0, 4.0].iter().map(|v| 3.0 + v).collect();
    let data = Dataset::new(DMatrix::zeros(7, 0), y).unwrap();
    let fit = fit_intercept_only(&data, &LossSpec::new(0.5, 1.0).unwrap(), &tight()).unwrap();
    assert!((fit.intercept - 3.0).abs() < 1e-10);
}

#[test]
fn warm_start_reaches_cold_solution() {
    let data = gaussian_data(75, &[0.0, 1.0, -1.0, 0.0, 0.0], 1.0, 61);
    let loss = LossSpec::new(0.5, 1.0).unwrap();
    let cold = fit_sncd(&data, &loss, &[0.05; 4], &tight(), None).unwrap();
    let other = fit_sncd(&data, &loss, &[0.3; 4], &tight(), None).unwrap();
    let warm = fit_sncd(&data, &loss, &[0.05; 4], &tight(), Some(&other)).unwrap();
    assert!(sup_dist(&cold.coefficients(), &warm.coefficients()) < 1e-7);
}

#[test]
fn adaptive_gamma_fits_converge_and_certify() {
    let data = gaussian_data(200, &[1.0, 2.0, 0.0, 0.0, -1.5, 0.0, 0.0, 0.0], 2.0, 71);
    let opts = SolveOptions { tol: 1e-7, gamma_adaptive: true, ..SolveOptions::default() };
    for tau in [0.2, 0.5, 0.8] {
        let loss = LossSpec::new(tau, 1.0).unwrap();
        let w = vec![0.05; 7];
        let fit = fit_sncd(&data, &loss, &w, &opts, None).unwrap();
        let used = loss.with_gamma(fit.gamma_used).unwrap();
        let k = kkt_residual(&data, &used, &w, fit.intercept, &fit.slopes, &fit.subgradient);
        assert!(k <= opts.kkt_tol(), "tau={tau}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mirror_equivariance(seed in 0u64..1000, tau in 0.1f64..0.9, gamma in 0.5f64..4.0, lam in 0.0f64..0.3) {
        // fitting -y at 1 - tau negates the tau fit
        let data = gaussian_data(40, &[0.5, 1.0, -0.5, 0.0], 1.0, seed);
        let neg = Dataset::new(data.predictors().clone(), data.response().iter().map(|v| -v).collect()).unwrap();
        let a = fit_sncd(&data, &LossSpec::new(tau, gamma).unwrap(), &[lam; 3], &tight(), None).unwrap();
        let b = fit_sncd(&neg, &LossSpec::new(1.0 - tau, gamma).unwrap(), &[lam; 3], &tight(), None).unwrap();
        let negated: Vec<f64> = b.coefficients().iter().map(|v| -v).collect();
        prop_assert!(sup_dist(&a.coefficients(), &negated) < 1e-6);
    }

    #[test]
    fn penalty_path_is_monotone_in_l1_norm(seed in 0u64..1000) {
        let data = gaussian_data(50, &[0.0, 1.0, -1.0, 0.5, 0.0], 1.0, seed);
        let loss = LossSpec::new(0.5, 1.0).unwrap();
        let norm = |lam: f64| {
            let f = fit_sncd(&data, &loss, &[lam; 4], &tight(), None).unwrap();
            penalized_objective(&data, &loss, &[1.0; 4], 0.0, &f.slopes) - loss.mean_value(&data.residuals(0.0, &f.slopes))
        };
        prop_assert!(norm(0.02) >= norm(0.2) - 1e-9);
    }
}
