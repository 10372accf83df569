//! Semismooth Newton coordinate descent.
//!
//! Each sweep updates the intercept by a Newton step on its score equation,
//! then each pair `(beta_j, z_j)` by a semismooth Newton step on
//!
//! ```text
//! -n^-1 sum L'(r_i) x_ij + w_j z_j = 0,    beta_j - S(beta_j + z_j) = 0.
//! ```
//!
//! A slope step that would change the sign of a nonzero coefficient stops at
//! zero. Once a sweep fails to decrease the penalized objective, each later
//! step is halved until the objective along its coordinate does not increase.
//!
//! Coordinates are visited in index order and all sums accumulate in index
//! order with compensated summation, so a fit is a deterministic function of
//! its inputs.

use super::{kkt_residual, sign, FitResult, SolveOptions};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::model::{gamma_heuristic, gamma_initial};
use crate::sum::{self, Accumulator};

/// Sweeps after which an adaptive gamma is frozen even if the iterate is still moving.
const MAX_ADAPTIVE_SWEEPS: usize = 50;

/// Step halvings tried before a coordinate is left unchanged for the sweep.
const MAX_HALVINGS: usize = 40;

/// Minimum fraction of residuals inside `[-gamma, gamma]` below which the
/// curvature sum is replaced by the continuity approximation.
const MIN_CORE_FRACTION: f64 = 0.05;

/// True when the curvature sum is unusable: it vanishes, or fewer than
/// `max(5%, 1/n)` of the residuals lie inside `[-gamma, gamma]`.
pub fn continuity_triggered(core_count: usize, n: usize, curvature: f64) -> bool {
    let threshold = MIN_CORE_FRACTION.max(1.0 / n as f64);
    curvature <= 0.0 || (core_count as f64) / (n as f64) < threshold
}

fn continuity_substitute(residuals: &[f64], column: Option<&[f64]>, gamma: f64, floor: f64) -> f64 {
    let mut acc = Accumulator::default();
    for (i, &r) in residuals.iter().enumerate() {
        let a = r.abs();
        if a > gamma {
            let w = column.map_or(1.0, |x| x[i] * x[i]);
            acc.add(w / a.max(floor));
        }
    }
    acc.value()
}

/// Denominator of a coordinate Newton step: `sum L''(r_i) x_ij^2` (`x = 1`
/// for the intercept), or `sum_{|r_i| > gamma} x_ij^2 / |r_i|` when the
/// continuity approximation is triggered.
///
/// Fails with [`Error::AllZeroResiduals`] when neither sum carries any
/// curvature information.
pub fn stabilized_denominator(residuals: &[f64], column: Option<&[f64]>, loss: &LossSpec, floor: f64) -> Result<f64> {
    if residuals.is_empty() {
        return Err(Error::invalid("stabilized_denominator needs residuals"));
    }
    let gamma = loss.gamma();
    let mut acc = Accumulator::default();
    let mut core = 0usize;
    for (i, &r) in residuals.iter().enumerate() {
        if r.abs() <= gamma {
            core += 1;
        }
        let w = column.map_or(1.0, |x| x[i] * x[i]);
        acc.add(loss.hess(r) * w);
    }
    let den = if continuity_triggered(core, residuals.len(), acc.value()) {
        continuity_substitute(residuals, column, gamma, floor)
    } else {
        acc.value()
    };
    if den > 0.0 {
        Ok(den)
    } else {
        Err(Error::AllZeroResiduals)
    }
}

/// Mutable SNCD iterate with cached loss derivatives at the current residuals.
#[derive(Debug, Clone)]
pub struct SncdState<'a> {
    data: &'a Dataset,
    loss: LossSpec,
    weights: Vec<f64>,
    gamma_floor: f64,
    pub intercept: f64,
    pub slopes: Vec<f64>,
    pub subgradient: Vec<f64>,
    residuals: Vec<f64>,
    psi: Vec<f64>,
    curv: Vec<f64>,
    core: usize,
    sq_step: f64,
    guarded: bool,
}

impl<'a> SncdState<'a> {
    pub fn new(
        data: &'a Dataset,
        loss: LossSpec,
        weights: Vec<f64>,
        intercept: f64,
        slopes: Vec<f64>,
        subgradient: Vec<f64>,
        gamma_floor: f64,
    ) -> Result<Self> {
        let d = data.d();
        if weights.len() != d || slopes.len() != d || subgradient.len() != d {
            return Err(Error::invalid(format!("weights, slopes and subgradient must have length {d}")));
        }
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidWeight { index, value });
        }
        let residuals = data.residuals(intercept, &slopes);
        let n = data.n();
        let mut state = Self {
            data,
            loss,
            weights,
            gamma_floor,
            intercept,
            slopes,
            subgradient,
            residuals,
            psi: vec![0.0; n],
            curv: vec![0.0; n],
            core: 0,
            sq_step: 0.0,
            guarded: false,
        };
        state.refresh_derivatives();
        Ok(state)
    }

    pub fn loss(&self) -> &LossSpec {
        &self.loss
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn set_gamma(&mut self, gamma: f64) -> Result<()> {
        self.loss = self.loss.with_gamma(gamma)?;
        self.refresh_derivatives();
        Ok(())
    }

    fn refresh_derivatives(&mut self) {
        let loss = self.loss;
        let gamma = loss.gamma();
        let mut core = 0;
        for ((r, p), c) in self.residuals.iter().zip(&mut self.psi).zip(&mut self.curv) {
            *p = loss.grad(*r);
            *c = loss.hess(*r);
            core += usize::from(r.abs() <= gamma);
        }
        self.core = core;
    }

    /// `r <- r - delta * x` (or `- delta` for the intercept) with derivative caches kept in step.
    fn shift_residuals(&mut self, column: Option<usize>, delta: f64) {
        let loss = self.loss;
        let gamma = loss.gamma();
        let mut core = self.core;
        let x = column.map(|j| self.data.column(j));
        for i in 0..self.residuals.len() {
            let old = self.residuals[i];
            let new = old - x.map_or(delta, |x| x[i] * delta);
            self.residuals[i] = new;
            self.psi[i] = loss.grad(new);
            self.curv[i] = loss.hess(new);
            core = core + usize::from(new.abs() <= gamma) - usize::from(old.abs() <= gamma);
        }
        self.core = core;
    }

    fn stabilize(&self, column: Option<&[f64]>, curvature: f64) -> Option<f64> {
        let den = if continuity_triggered(self.core, self.residuals.len(), curvature) {
            continuity_substitute(&self.residuals, column, self.loss.gamma(), self.gamma_floor)
        } else {
            curvature
        };
        (den > 0.0).then_some(den)
    }

    /// `(sum psi_i x_i, sum L''(r_i) x_i^2)` in one index-ordered pass.
    fn score_and_curvature(&self, x: &[f64]) -> (f64, f64) {
        let mut score = Accumulator::default();
        let mut curv = Accumulator::default();
        for ((p, c), xi) in self.psi.iter().zip(&self.curv).zip(x) {
            score.add(p * xi);
            curv.add(c * xi * xi);
        }
        (score.value(), curv.value())
    }

    /// Largest `delta * 2^-k` that does not increase the penalized objective
    /// along the coordinate (`weight` is its l1 weight, `beta` its current
    /// value); zero when no halving succeeds.
    fn descent_step(&self, column: Option<usize>, beta: f64, delta: f64, weight: f64) -> f64 {
        let loss = self.loss;
        let x = column.map(|j| self.data.column(j));
        let n = self.residuals.len() as f64;
        let mut t = delta;
        let mut slack = None;
        for _ in 0..MAX_HALVINGS {
            let mut change = Accumulator::default();
            let mut base = Accumulator::default();
            for (i, &r) in self.residuals.iter().enumerate() {
                let old = loss.value(r);
                change.add(loss.value(r - x.map_or(t, |x| x[i] * t)) - old);
                base.add(old);
            }
            let slack = *slack.get_or_insert(4.0 * f64::EPSILON * base.value() / n);
            let phi = change.value() / n + weight * ((beta + t).abs() - beta.abs());
            if phi <= slack {
                return t;
            }
            t *= 0.5;
        }
        0.0
    }

    /// Newton step on the intercept score equation; returns the new intercept.
    pub fn sncd_update_intercept(&mut self) -> f64 {
        let mut num = Accumulator::default();
        let mut curv = Accumulator::default();
        for (p, c) in self.psi.iter().zip(&self.curv) {
            num.add(*p);
            curv.add(*c);
        }
        let num = num.value();
        if let Some(den) = self.stabilize(None, curv.value()) {
            let delta = if self.guarded { self.descent_step(None, self.intercept, num / den, 0.0) } else { num / den };
            if delta != 0.0 {
                self.intercept += delta;
                self.sq_step += delta * delta;
                self.shift_residuals(None, delta);
            }
        }
        self.intercept
    }

    /// Semismooth Newton step on the `j`-th (0-based) slope pair; returns `(beta_j, z_j)`.
    pub fn sncd_update_pair(&mut self, j: usize) -> (f64, f64) {
        let n = self.residuals.len() as f64;
        let x = self.data.column(j);
        let (score, curvature) = self.score_and_curvature(x);
        let score = score / n;
        let den = self.stabilize(Some(x), curvature).map(|h| h / n);
        let lam = self.weights[j];
        let beta = self.slopes[j];
        let z = self.subgradient[j];

        let (new_beta, new_z) = if lam == 0.0 {
            let b = den.map_or(beta, |h| beta + score / h);
            (b, sign(b))
        } else if (beta + z).abs() > 1.0 {
            let s = sign(beta + z);
            let b = den.map_or(beta, |h| beta + (score - lam * s) / h);
            if beta != 0.0 && sign(b) != sign(beta) {
                // stop at the kink; the inactive branch decides next sweep
                (0.0, s)
            } else {
                (b, s)
            }
        } else {
            let h = den.unwrap_or(0.0);
            (0.0, (score + h * beta) / lam)
        };

        let proposed = new_beta - beta;
        let delta = if proposed != 0.0 && self.guarded { self.descent_step(Some(j), beta, proposed, lam) } else { proposed };
        let (new_beta, new_z) = if delta == proposed { (new_beta, new_z) } else { (beta + delta, sign(beta + delta)) };
        if delta != 0.0 {
            self.sq_step += delta * delta;
            self.shift_residuals(Some(j), delta);
        }
        self.slopes[j] = new_beta;
        self.subgradient[j] = new_z;
        (new_beta, new_z)
    }

    /// One full cycle (intercept, then slopes in ascending order); returns `||beta^k - beta^{k-1}||_2`.
    ///
    /// A sweep that increases the penalized objective switches the state to
    /// damped coordinate steps for the rest of its life.
    pub fn sweep(&mut self) -> f64 {
        self.sq_step = 0.0;
        let before = (!self.guarded).then(|| self.objective());
        self.sncd_update_intercept();
        for j in 0..self.slopes.len() {
            self.sncd_update_pair(j);
        }
        if let Some(before) = before {
            if self.objective() > before + 4.0 * f64::EPSILON * before.abs() {
                self.guarded = true;
            }
        }
        self.sq_step.sqrt()
    }

    /// Penalized objective at the current iterate and gamma.
    pub fn objective(&self) -> f64 {
        let pen = sum::compensated(self.weights.iter().zip(&self.slopes).map(|(w, b)| w * b.abs()));
        self.loss.mean_value(&self.residuals) + pen
    }

    /// True once the state has fallen back to damped steps.
    pub fn is_guarded(&self) -> bool {
        self.guarded
    }

    fn certificate(&self) -> f64 {
        let z = clamped(&self.subgradient);
        kkt_residual(self.data, &self.loss, &self.weights, self.intercept, &self.slopes, &z)
    }

    fn into_result(self, iterations: usize, converged: bool, kkt: f64) -> FitResult {
        let residuals = self.data.residuals(self.intercept, &self.slopes);
        FitResult {
            intercept: self.intercept,
            subgradient: clamped(&self.subgradient),
            slopes: self.slopes,
            gamma_used: self.loss.gamma(),
            iterations,
            converged,
            kkt_residual: kkt,
            residuals,
        }
    }
}

fn clamped(z: &[f64]) -> Vec<f64> {
    z.iter().map(|v| v.clamp(-1.0, 1.0)).collect()
}

/// Solve `min n^-1 sum L(y_i - b0 - x_i' beta) + sum_j w_j |beta_j|` by SNCD.
///
/// Stops once `||beta^k - beta^{k-1}||_2 <= tol` and the KKT residual is at
/// most `10 * tol`. With `gamma_adaptive`, gamma is re-tuned from the
/// residuals before each sweep until the iterate distance falls below
/// `10 * tol` (or for at most 50 sweeps), then frozen. `init` warm-starts both coefficients and
/// subgradients; otherwise the solver starts from zero.
pub fn fit_sncd(
    data: &Dataset,
    loss: &LossSpec,
    weights: &[f64],
    opts: &SolveOptions,
    init: Option<&FitResult>,
) -> Result<FitResult> {
    opts.validate()?;
    let d = data.d();
    if weights.len() != d {
        return Err(Error::invalid(format!("expected {d} weights, got {}", weights.len())));
    }
    let (b0, slopes, z) = match init {
        Some(f) if f.slopes.len() == d => (f.intercept, f.slopes.clone(), f.subgradient.clone()),
        Some(_) => return Err(Error::invalid("warm start has the wrong dimension")),
        None => (0.0, vec![0.0; d], vec![0.0; d]),
    };
    let mut loss = *loss;
    if opts.gamma_adaptive && init.is_none() {
        loss = loss.with_gamma(gamma_initial(data.n(), d).max(opts.gamma_floor))?;
    }
    let mut state = SncdState::new(data, loss, weights.to_vec(), b0, slopes, z, opts.gamma_floor)?;

    let mut frozen = !opts.gamma_adaptive;
    let mut kkt = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        if !frozen && (iter > 1 || init.is_some()) {
            let g = gamma_heuristic(state.residuals(), loss.tau(), data.n(), d + 1, opts.gamma_floor)?;
            state.set_gamma(g)?;
        }
        let step = state.sweep();
        if !step.is_finite() {
            return Err(Error::DegenerateDesign(format!("iterate diverged at sweep {iter}")));
        }
        if !frozen {
            if step < opts.kkt_tol() || iter >= MAX_ADAPTIVE_SWEEPS {
                frozen = true;
            }
            continue;
        }
        if step <= opts.tol {
            kkt = state.certificate();
            if kkt <= opts.kkt_tol() {
                return Ok(state.into_result(iter, true, kkt));
            }
        }
    }
    if kkt.is_infinite() {
        kkt = state.certificate();
    }
    let best = state.into_result(opts.max_iter, false, kkt);
    Err(Error::NonConvergence { max_iter: opts.max_iter, kkt_residual: kkt, best: Box::new(best) })
}

/// Smallest uniform weight at which every slope is zero, from the score of
/// the intercept-only fit: `max_j |n^-1 sum L'(y_i - b0) x_ij|`.
pub fn lambda_max(data: &Dataset, loss: &LossSpec, opts: &SolveOptions) -> Result<(f64, FitResult)> {
    let base = super::fit_intercept_only(data, loss, opts)?;
    let spec = loss.with_gamma(base.gamma_used)?;
    let n = data.n() as f64;
    let psi: Vec<f64> = base.residuals.iter().map(|&r| spec.grad(r)).collect();
    let lmax = (0..data.d())
        .map(|j| (sum::dot(&psi, data.column(j)) / n).abs())
        .fold(0.0, f64::max);
    Ok((lmax, base))
}
