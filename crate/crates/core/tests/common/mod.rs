//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use retire::{Dataset, LossSpec};

/// Design with an intercept column prepended.
pub fn augmented(data: &Dataset) -> DMatrix<f64> {
    let (n, d) = (data.n(), data.d());
    DMatrix::from_fn(n, d + 1, |i, j| if j == 0 { 1.0 } else { data.predictors()[(i, j - 1)] })
}

/// Least squares by the normal equations.
pub fn ols(data: &Dataset) -> Vec<f64> {
    let x = augmented(data);
    let y = DVector::from_column_slice(data.response());
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * y;
    xtx.cholesky().expect("full rank").solve(&xty).as_slice().to_vec()
}

fn objective(x: &DMatrix<f64>, y: &[f64], loss: &LossSpec, w: &[f64], theta: &DVector<f64>) -> f64 {
    let n = y.len() as f64;
    let fitted = x * theta;
    let l: f64 = y.iter().zip(fitted.iter()).map(|(yi, fi)| loss.value(yi - fi)).sum::<f64>() / n;
    l + w.iter().zip(theta.iter().skip(1)).map(|(wj, b)| wj * b.abs()).sum::<f64>()
}

/// Accelerated proximal gradient (FISTA with restart) for
/// `n^-1 sum L(y - b0 - x'beta) + sum_j w_j |beta_j|`. Returns `(b0, beta)` stacked.
pub fn proximal_gradient(data: &Dataset, loss: &LossSpec, w: &[f64], iters: usize) -> Vec<f64> {
    let x = augmented(data);
    let y = data.response();
    let n = y.len() as f64;
    let p = x.ncols();
    let gram = x.transpose() * &x / n;
    let top = gram.symmetric_eigen().eigenvalues.max();
    let step = 1.0 / (loss.tau().max(1.0 - loss.tau()) * top);
    let grad = |theta: &DVector<f64>| -> DVector<f64> {
        let r = DVector::from_iterator(y.len(), y.iter().zip((&x * theta).iter()).map(|(yi, fi)| loss.grad(yi - fi)));
        -(x.transpose() * r) / n
    };
    let prox = |v: DVector<f64>| -> DVector<f64> {
        DVector::from_iterator(p, v.iter().enumerate().map(|(j, &u)| {
            if j == 0 {
                u
            } else {
                let t = step * w[j - 1];
                u.signum() * (u.abs() - t).max(0.0)
            }
        }))
    };
    let mut theta = DVector::zeros(p);
    let mut yk = theta.clone();
    let mut t = 1.0f64;
    let mut fprev = f64::INFINITY;
    for _ in 0..iters {
        let next = prox(&yk - step * grad(&yk));
        let f = objective(&x, y, loss, w, &next);
        if f > fprev {
            // adaptive restart
            t = 1.0;
            yk = theta.clone();
            continue;
        }
        fprev = f;
        let tn = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        yk = &next + (&next - &theta) * ((t - 1.0) / tn);
        let moved = (&next - &theta).amax();
        theta = next;
        t = tn;
        if moved < 1e-14 {
            break;
        }
    }
    theta.as_slice().to_vec()
}

/// Minimizer of a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// Empirical tau-expectile by bisection on the sample first-order condition.
pub fn sample_expectile(z: &[f64], tau: f64) -> f64 {
    let cond = |e: f64| -> f64 {
        z.iter().map(|&v| if v >= e { tau * (v - e) } else { (1.0 - tau) * (v - e) }).sum::<f64>()
    };
    let (mut lo, mut hi) = z.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cond(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sample tau-quantile (lower order statistic).
pub fn sample_quantile(z: &[f64], tau: f64) -> f64 {
    let mut v = z.to_vec();
    let k = ((tau * v.len() as f64).ceil() as usize).saturating_sub(1);
    *v.select_nth_unstable_by(k, |a, b| a.total_cmp(b)).1
}

/// Gaussian design with i.i.d. standard entries and response `y = x'b + noise * N(0, 1)`.
pub fn gaussian_data(n: usize, beta: &[f64], noise: f64, seed: u64) -> Dataset {
    let d = beta.len() - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let y = (0..n)
        .map(|i| beta[0] + (0..d).map(|j| x[(i, j)] * beta[j + 1]).sum::<f64>() + noise * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Dataset::new(x, y).unwrap()
}

pub fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
