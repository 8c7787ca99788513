//! Penalized least squares on the observed (censored) response.
//!
//! This is the naive baseline that ignores censoring: it minimizes
//! `(1/2n) ||y - beta0 - X beta||^2 + penalty` by coordinate descent, with
//! SCAD and MCP handled by the same weighted-lasso LLA loop as the Tobit
//! solver. Results are returned as [`FitResult`] so they can be evaluated
//! alongside Tobit fits; `sigma` is the root mean squared residual and
//! `theta` is that natural solution written on the `(delta, gamma)` scale.

use nalgebra::{DMatrix, DVector};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::gcd::{soft_threshold, FitResult, Prepared, SolverConfig};
use crate::lla::{relative_weights, LlaConfig, LlaInit};
use crate::params::{from_natural, NaturalParams};
use crate::penalty::PenaltySpec;

#[derive(Debug, Clone)]
struct LsState<'a> {
    data: &'a Dataset,
    curvature: Vec<f64>,
    beta0: f64,
    beta: Vec<f64>,
    resid: Vec<f64>,
}

impl<'a> LsState<'a> {
    fn new(data: &'a Dataset, beta0: f64, beta: &[f64]) -> Self {
        let n = data.n() as f64;
        let curvature = data
            .x()
            .column_iter()
            .map(|c| c.norm_squared() / n)
            .collect();
        let fitted = data.x() * DVector::from_column_slice(beta);
        let resid = data
            .y()
            .iter()
            .zip(fitted.iter())
            .map(|(y, f)| y - beta0 - f)
            .collect();
        LsState {
            data,
            curvature,
            beta0,
            beta: beta.to_vec(),
            resid,
        }
    }

    fn column(&self, j: usize) -> &[f64] {
        let n = self.data.n();
        &self.data.x().as_slice()[j * n..(j + 1) * n]
    }

    fn slope_gradient(&self, j: usize) -> f64 {
        let s: f64 = self
            .column(j)
            .iter()
            .zip(&self.resid)
            .map(|(x, r)| x * r)
            .sum();
        -s / self.data.n() as f64
    }

    fn intercept_gradient(&self) -> f64 {
        -self.resid.iter().sum::<f64>() / self.data.n() as f64
    }

    fn objective(&self, lambda: f64, weights: &[f64]) -> f64 {
        let rss: f64 = self.resid.iter().map(|r| r * r).sum();
        let pen: f64 = self
            .beta
            .iter()
            .zip(weights)
            .filter(|(b, w)| **b != 0.0 && **w != 0.0)
            .map(|(b, w)| lambda * w * b.abs())
            .sum();
        0.5 * rss / self.data.n() as f64 + pen
    }

    fn cycle(&mut self, lambda: f64, weights: &[f64], coords: &[usize]) -> f64 {
        let n = self.data.n();
        let shift = -self.intercept_gradient();
        self.beta0 += shift;
        for r in &mut self.resid {
            *r -= shift;
        }
        let mut change = shift.abs();
        for &j in coords {
            let m = self.curvature[j];
            if m == 0.0 {
                continue;
            }
            let z = m * self.beta[j] - self.slope_gradient(j);
            let t = if weights[j] == 0.0 {
                0.0
            } else {
                lambda * weights[j]
            };
            let v = if t.is_infinite() {
                0.0
            } else {
                soft_threshold(z, t) / m
            };
            let diff = v - self.beta[j];
            if diff != 0.0 {
                self.beta[j] = v;
                let col = &self.data.x().as_slice()[j * n..(j + 1) * n];
                for (r, x) in self.resid.iter_mut().zip(col) {
                    *r -= diff * x;
                }
                change = change.max(diff.abs());
            }
        }
        change
    }

    fn kkt_residual(&self, lambda: f64, weights: &[f64]) -> f64 {
        let mut worst = self.intercept_gradient().abs();
        for (j, &w) in weights.iter().enumerate().take(self.beta.len()) {
            let g = self.slope_gradient(j);
            let t = if w == 0.0 { 0.0 } else { lambda * w };
            let v = if self.beta[j] == 0.0 {
                if t.is_infinite() {
                    0.0
                } else {
                    (g.abs() - t).max(0.0)
                }
            } else {
                (g + t * self.beta[j].signum()).abs()
            };
            worst = worst.max(v);
        }
        worst
    }

    fn solve(&mut self, lambda: f64, weights: &[f64], config: &SolverConfig) -> (usize, bool, f64) {
        let all: Vec<usize> = (0..self.beta.len()).collect();
        let mut cycles = 0;
        let mut full = 0;
        loop {
            let change = self.cycle(lambda, weights, &all);
            cycles += 1;
            full += 1;
            if change < config.tol {
                let kkt = self.kkt_residual(lambda, weights);
                if kkt <= 10.0 * config.tol {
                    return (cycles, true, kkt);
                }
            }
            if cycles >= config.max_cycles {
                return (cycles, false, self.kkt_residual(lambda, weights));
            }
            if config.active_set && full >= 2 {
                let active: Vec<usize> = all
                    .iter()
                    .copied()
                    .filter(|&j| self.beta[j] != 0.0)
                    .collect();
                if active.len() < all.len() {
                    while cycles < config.max_cycles {
                        cycles += 1;
                        if self.cycle(lambda, weights, &active) < config.tol {
                            break;
                        }
                    }
                }
            }
        }
    }
}

fn ls_result(
    prep: &Prepared,
    state: &LsState<'_>,
    lambda: f64,
    weights: &[f64],
    (cycles, converged, kkt): (usize, bool, f64),
) -> Result<FitResult> {
    let n = prep.data.n() as f64;
    let rss: f64 = state.resid.iter().map(|r| r * r).sum();
    let sigma = (rss / n).sqrt().max(f64::MIN_POSITIVE);
    let solver_scale = NaturalParams {
        beta0: state.beta0,
        beta: state.beta.clone(),
        sigma,
    };
    let natural = crate::data::destandardize_params(&solver_scale, &prep.std)?;
    Ok(FitResult {
        theta: from_natural(&solver_scale)?,
        natural,
        objective: state.objective(lambda, weights),
        cycles_used: cycles,
        kkt_residual: kkt,
        converged,
        lambda,
        weights_used: Some(weights.to_vec()),
        standardization: prep.std.clone(),
    })
}

fn check_weights(lambda: f64, weights: &[f64], p: usize) -> Result<()> {
    if !(lambda >= 0.0) {
        return Err(Error::invalid(format!("lambda must be >= 0, got {lambda}")));
    }
    if weights.len() != p {
        return Err(Error::ShapeMismatch(format!(
            "{} penalty weights for {p} columns",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::invalid("penalty weights must be finite and >= 0"));
    }
    Ok(())
}

/// Intercept-only start: `beta0 = mean(y)`, slopes zero.
fn null_start(data: &Dataset) -> (f64, Vec<f64>) {
    (data.y().mean(), vec![0.0; data.p()])
}

fn solve_prepared(
    prep: &Prepared,
    lambda: f64,
    weights: &[f64],
    config: &SolverConfig,
    start: &(f64, Vec<f64>),
) -> Result<(FitResult, (f64, Vec<f64>))> {
    config.validate()?;
    check_weights(lambda, weights, prep.data.p())?;
    let mut state = LsState::new(&prep.data, start.0, &start.1);
    let status = state.solve(lambda, weights, config);
    let fit = ls_result(prep, &state, lambda, weights, status)?;
    Ok((fit, (state.beta0, state.beta)))
}

/// Weighted-lasso least squares at one `lambda`.
pub fn fit_ls_weighted_lasso(
    data: &Dataset,
    lambda: f64,
    weights: &[f64],
    config: &SolverConfig,
) -> Result<FitResult> {
    let prep = Prepared::new(data, config)?;
    Ok(solve_prepared(&prep, lambda, weights, config, &null_start(&prep.data))?.0)
}

fn lla_prepared(
    prep: &Prepared,
    penalty: &PenaltySpec,
    lla: &LlaConfig,
    config: &SolverConfig,
    start: (f64, Vec<f64>),
) -> Result<(FitResult, (f64, Vec<f64>))> {
    let p = prep.data.p();
    let lam = penalty.lambda;
    let mut current = match &lla.init {
        LlaInit::Zero => start,
        LlaInit::Lasso(l) => solve_prepared(prep, *l, &vec![1.0; p], config, &start)?.1,
        LlaInit::Explicit(_) => {
            return Err(Error::invalid(
                "explicit LLA initial values are only defined for the Tobit model",
            ))
        }
    };
    let mut last = None;
    let mut all_converged = true;
    for _ in 0..lla.steps.max(1) {
        let w = relative_weights(penalty, &current.1)?;
        let (fit, next) = solve_prepared(prep, lam, &w, config, &current)?;
        all_converged &= fit.converged;
        current = next;
        last = Some(fit);
    }
    let mut fit = last.expect("at least one LLA step");
    fit.converged = all_converged;
    // sigma is the RMS residual, so the squared-error loss is sigma^2 / 2
    fit.objective = 0.5 * fit.natural.sigma.powi(2) + penalty.total(&current.1)?;
    Ok((fit, current))
}

/// Penalized least squares. Lasso families take one coordinate-descent solve;
/// SCAD and MCP take `lla.steps` reweighted solves.
pub fn fit_ls_penalized_with(
    data: &Dataset,
    penalty: &PenaltySpec,
    config: &SolverConfig,
    lla: &LlaConfig,
) -> Result<FitResult> {
    penalty.validate()?;
    let prep = Prepared::new(data, config)?;
    let start = null_start(&prep.data);
    if penalty.family.is_folded_concave() {
        Ok(lla_prepared(&prep, penalty, lla, config, start)?.0)
    } else {
        let w = penalty.lasso_weights(data.p())?;
        Ok(solve_prepared(&prep, penalty.lambda, &w, config, &start)?.0)
    }
}

/// [`fit_ls_penalized_with`] using three LLA steps from zero.
pub fn fit_ls_penalized(
    data: &Dataset,
    penalty: &PenaltySpec,
    config: &SolverConfig,
) -> Result<FitResult> {
    fit_ls_penalized_with(data, penalty, config, &LlaConfig::default())
}

/// `max_j |x_j'(y - ybar)| / n` on the solver's scale.
pub fn ls_lambda_max(data: &Dataset, config: &SolverConfig) -> Result<f64> {
    let prep = Prepared::new(data, config)?;
    Ok(ls_lambda_max_prepared(&prep))
}

fn ls_lambda_max_prepared(prep: &Prepared) -> f64 {
    let data = &prep.data;
    let ybar = data.y().mean();
    let centered = data.y().map(|v| v - ybar);
    let xr = data.x().tr_mul(&centered);
    // Margin for summation-order differences against the coordinate update.
    xr.amax() / data.n() as f64 * (1.0 + 1e-10)
}

/// Warm-started penalized least squares along a decreasing `lambda` grid.
/// `penalty` supplies the family and shape; its `lambda` is ignored.
pub fn fit_ls_path_at(
    data: &Dataset,
    penalty: &PenaltySpec,
    lambdas: &[f64],
    config: &SolverConfig,
    lla: &LlaConfig,
) -> Result<Vec<FitResult>> {
    if lambdas.is_empty() || lambdas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::invalid(
            "lambda sequence must be nonempty and strictly decreasing",
        ));
    }
    let prep = Prepared::new(data, config)?;
    let p = data.p();
    let mut lasso_warm = null_start(&prep.data);
    let mut fits = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let spec = penalty.with_lambda(lam)?;
        if spec.family.is_folded_concave() {
            // step one from zero is the lasso, which is carried along the grid
            let (first, next) = solve_prepared(&prep, lam, &vec![1.0; p], config, &lasso_warm)?;
            lasso_warm = next.clone();
            if lla.steps <= 1 {
                fits.push(first);
                continue;
            }
            let rest = LlaConfig {
                steps: lla.steps - 1,
                init: LlaInit::Zero,
            };
            let (mut fit, _) = lla_prepared(&prep, &spec, &rest, config, next)?;
            fit.converged &= first.converged;
            fits.push(fit);
        } else {
            let w = spec.lasso_weights(p)?;
            let (fit, next) = solve_prepared(&prep, lam, &w, config, &lasso_warm)?;
            lasso_warm = next;
            fits.push(fit);
        }
    }
    Ok(fits)
}

/// Log-spaced grid for the least-squares baselines.
pub fn ls_lambda_grid(
    data: &Dataset,
    n_lambda: usize,
    ratio: f64,
    config: &SolverConfig,
) -> Result<Vec<f64>> {
    let lmax = ls_lambda_max(data, config)?;
    if !(lmax > 0.0) {
        return Ok(vec![0.0]);
    }
    Ok(crate::gcd::lambda_grid(lmax, n_lambda, ratio))
}

/// Ordinary least squares of the shifted response on an intercept and the
/// columns in `columns` (all columns when `None`). Coefficients outside
/// `columns` are zero; `sigma` is the root mean squared residual.
pub fn ols(data: &Dataset, columns: Option<&[usize]>) -> Result<NaturalParams> {
    let p = data.p();
    let cols: Vec<usize> = match columns {
        Some(c) => c.to_vec(),
        None => (0..p).collect(),
    };
    if let Some(&j) = cols.iter().find(|&&j| j >= p) {
        return Err(Error::invalid(format!(
            "column index {j} out of range for {p} columns"
        )));
    }
    let n = data.n();
    if cols.len() + 1 > n {
        return Err(Error::invalid(format!(
            "least squares with {} coefficients needs more than {n} rows",
            cols.len() + 1
        )));
    }
    let mut design = DMatrix::from_element(n, cols.len() + 1, 1.0);
    for (k, &j) in cols.iter().enumerate() {
        design.set_column(k + 1, &data.x().column(j));
    }
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * (n.max(cols.len() + 1) as f64) * f64::EPSILON;
    if svd.singular_values.iter().any(|s| *s <= eps) {
        return Err(Error::degenerate("least-squares design is rank deficient"));
    }
    let coef = svd
        .solve(data.y(), eps)
        .map_err(|e| Error::degenerate(e.to_string()))?;
    let resid = data.y() - &design * &coef;
    let sigma = (resid.norm_squared() / n as f64)
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let mut beta = vec![0.0; p];
    for (k, &j) in cols.iter().enumerate() {
        beta[j] = coef[k + 1];
    }
    Ok(NaturalParams {
        beta0: coef[0],
        beta,
        sigma,
    })
}
