//! Damped semismooth Newton solver for the unpenalized problem (intercept included).

use nalgebra::{DMatrix, DVector};

use super::{FitResult, SolveOptions};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::model::{gamma_heuristic, gamma_initial};
use crate::sum::{self, Accumulator};

const ARMIJO_C: f64 = 1e-4;
const MAX_BACKTRACK: usize = 60;
const MAX_GAMMA_ROUNDS: usize = 50;

struct Problem<'a> {
    data: &'a Dataset,
    loss: LossSpec,
}

impl Problem<'_> {
    fn p(&self) -> usize {
        self.data.d() + 1
    }

    fn residuals(&self, theta: &DVector<f64>) -> Vec<f64> {
        self.data.residuals(theta[0], &theta.as_slice()[1..])
    }

    fn objective(&self, r: &[f64]) -> f64 {
        self.loss.mean_value(r)
    }

    /// Gradient of the mean loss in `theta`.
    fn gradient(&self, r: &[f64]) -> DVector<f64> {
        let n = r.len() as f64;
        let psi: Vec<f64> = r.iter().map(|&u| self.loss.grad(u)).collect();
        let mut g = DVector::zeros(self.p());
        g[0] = -sum::compensated(psi.iter().copied()) / n;
        for j in 0..self.data.d() {
            g[j + 1] = -sum::dot(&psi, self.data.column(j)) / n;
        }
        g
    }

    /// Generalized Hessian `n^-1 sum L''(r_i) x_i x_i'` over the augmented regressor.
    fn hessian(&self, r: &[f64]) -> DMatrix<f64> {
        let n = r.len() as f64;
        let p = self.p();
        let curv: Vec<f64> = r.iter().map(|&u| self.loss.hess(u)).collect();
        let col = |j: usize| -> Option<&[f64]> { (j > 0).then(|| self.data.column(j - 1)) };
        let mut h = DMatrix::zeros(p, p);
        for a in 0..p {
            for b in 0..=a {
                let mut acc = Accumulator::default();
                match (col(a), col(b)) {
                    (None, None) => curv.iter().for_each(|c| acc.add(*c)),
                    (Some(xa), None) => curv.iter().zip(xa).for_each(|(c, x)| acc.add(c * x)),
                    (None, Some(_)) => unreachable!(),
                    (Some(xa), Some(xb)) => {
                        for i in 0..curv.len() {
                            acc.add(curv[i] * xa[i] * xb[i]);
                        }
                    }
                }
                let v = acc.value() / n;
                h[(a, b)] = v;
                h[(b, a)] = v;
            }
        }
        h
    }
}

fn newton_direction(h: DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    let scale = h.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let mut ridge = 0.0;
    loop {
        let mut m = h.clone();
        for k in 0..m.nrows() {
            m[(k, k)] += ridge;
        }
        if let Some(chol) = m.cholesky() {
            return -chol.solve(g);
        }
        ridge = if ridge == 0.0 { 1e-12 * scale } else { ridge * 10.0 };
    }
}

fn sup_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn minimize(problem: &Problem, mut theta: DVector<f64>, opts: &SolveOptions) -> Result<(DVector<f64>, usize, bool, f64)> {
    let mut r = problem.residuals(&theta);
    let mut f = problem.objective(&r);
    let mut g = problem.gradient(&r);
    let mut gnorm = sup_norm(&g);
    for iter in 0..opts.max_iter {
        if gnorm <= opts.tol {
            return Ok((theta, iter, true, gnorm));
        }
        let dir = newton_direction(problem.hessian(&r), &g);
        let slope = g.dot(&dir);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACK {
            let cand = &theta + &dir * t;
            let rc = problem.residuals(&cand);
            let fc = problem.objective(&rc);
            let armijo = fc <= f + ARMIJO_C * t * slope;
            // below rounding level the objective cannot discriminate; fall back to the gradient
            let flat = fc <= f + 4.0 * f64::EPSILON * f.abs();
            let gc = if armijo { None } else { Some(problem.gradient(&rc)) };
            if armijo || (flat && gc.as_ref().is_some_and(|gc| sup_norm(gc) < gnorm)) {
                theta = cand;
                r = rc;
                f = fc;
                g = gc.unwrap_or_else(|| problem.gradient(&r));
                gnorm = sup_norm(&g);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::DegenerateDesign(format!(
                "line search stalled with gradient sup-norm {gnorm:e}"
            )));
        }
    }
    Ok((theta, opts.max_iter, gnorm <= opts.tol, gnorm))
}

fn finish(data: &Dataset, loss: &LossSpec, theta: &DVector<f64>, iterations: usize, converged: bool, kkt: f64) -> FitResult {
    let slopes = theta.as_slice()[1..].to_vec();
    FitResult {
        intercept: theta[0],
        residuals: data.residuals(theta[0], &slopes),
        subgradient: vec![0.0; slopes.len()],
        slopes,
        gamma_used: loss.gamma(),
        iterations,
        converged,
        kkt_residual: kkt,
    }
}

/// Minimize `n^-1 sum L(y_i - b0 - x_i' beta)` without penalty (`n > d`).
///
/// Converged when the gradient sup-norm is at most `tol`. With
/// `gamma_adaptive`, gamma starts at `sqrt(n / log(n p))` and is re-tuned from
/// the residuals of each fit until it stabilizes.
pub fn fit_smooth(data: &Dataset, loss: &LossSpec, opts: &SolveOptions, init: Option<&[f64]>) -> Result<FitResult> {
    opts.validate()?;
    let (n, d) = (data.n(), data.d());
    if n <= d {
        return Err(Error::invalid(format!("unpenalized fit needs n > d, got n={n}, d={d}")));
    }
    let mut theta = match init {
        Some(c) if c.len() == d + 1 => DVector::from_column_slice(c),
        Some(c) => return Err(Error::invalid(format!("init has length {}, expected {}", c.len(), d + 1))),
        None => DVector::zeros(d + 1),
    };
    let mut spec = *loss;
    if opts.gamma_adaptive {
        spec = spec.with_gamma(gamma_initial(n, d).max(opts.gamma_floor))?;
    }
    let mut rounds = 0;
    loop {
        let problem = Problem { data, loss: spec };
        let (t, iters, converged, gnorm) = minimize(&problem, theta, opts)?;
        theta = t;
        rounds += 1;
        if !opts.gamma_adaptive || rounds >= MAX_GAMMA_ROUNDS || !converged {
            let fit = finish(data, &spec, &theta, iters, converged, gnorm);
            if converged {
                return Ok(fit);
            }
            return Err(Error::NonConvergence { max_iter: opts.max_iter, kkt_residual: gnorm, best: Box::new(fit) });
        }
        let r = problem.residuals(&theta);
        let next = gamma_heuristic(&r, spec.tau(), n, d + 1, opts.gamma_floor)?;
        let done = (next - spec.gamma()).abs() <= 1e-10 * spec.gamma();
        if done {
            return Ok(finish(data, &spec, &theta, iters, true, gnorm));
        }
        spec = spec.with_gamma(next)?;
    }
}

/// Intercept-only fit (the sample location of the loss).
pub fn fit_intercept_only(data: &Dataset, loss: &LossSpec, opts: &SolveOptions) -> Result<FitResult> {
    let y = Dataset::new(DMatrix::zeros(data.n(), 0), data.response().to_vec())?;
    let mut fit = fit_smooth(&y, loss, opts, None)?;
    fit.slopes = vec![0.0; data.d()];
    fit.subgradient = vec![0.0; data.d()];
    Ok(fit)
}
