//! Generalized coordinate descent for the weighted-lasso Tobit objective
//!
//! ```text
//! R_n(delta0, delta, gamma) = l_n(delta0, delta, gamma) + lambda * sum_j w_j |delta_j|
//! ```
//!
//! Each slope is updated by minimizing a quadratic majorizer of the loss with
//! curvature `M_j = (1/n) sum_i x_ij^2` (exactly 1 on standardized columns)
//! plus the penalty, which is a soft-thresholding step. The intercept takes
//! the unthresholded step and `gamma` its exact closed-form minimizer. One
//! cycle visits `delta0`, `delta_1..delta_p`, then `gamma`.
//!
//! The linear predictor `eta_i = delta0 + x_i' delta` is cached and updated in
//! `O(n)` per coordinate.

use nalgebra::DVector;

use crate::data::destandardize_params;
use crate::data::{standardize, Dataset, Standardization};
use crate::error::{Error, Result};
use crate::loss::{eta_score, gradient_eta, neg_loglik_eta};
use crate::params::{to_natural, NaturalParams, OlsenParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoordinateOrder {
    #[default]
    Forward,
    Reverse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Convergence threshold on the largest parameter change in a cycle.
    pub tol: f64,
    pub max_cycles: usize,
    /// Iterate over the nonzero slopes between full sweeps.
    pub active_set: bool,
    pub standardize: bool,
    pub order: CoordinateOrder,
    /// End each cycle with an exact line search along `theta -> c * theta`.
    pub scale_step: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-7,
            max_cycles: 10_000,
            active_set: true,
            standardize: true,
            order: CoordinateOrder::Forward,
            scale_step: true,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol must be positive"));
        }
        if self.max_cycles == 0 {
            return Err(Error::invalid("max_cycles must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Solution on the solver's scale (standardized columns when requested).
    pub theta: OlsenParams,
    /// Solution on the raw column scale, response shifted to threshold zero.
    pub natural: NaturalParams,
    /// Loss plus penalty at `theta`.
    pub objective: f64,
    pub cycles_used: usize,
    pub kkt_residual: f64,
    pub converged: bool,
    pub lambda: f64,
    pub weights_used: Option<Vec<f64>>,
    pub standardization: Standardization,
}

impl FitResult {
    pub fn support(&self) -> Vec<usize> {
        self.theta.support()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub lambdas: Vec<f64>,
    pub fits: Vec<FitResult>,
    /// `(delta0, gamma)` of the slopes-zero fit.
    pub null_model: (f64, f64),
}

/// `lambda * w` with an unpenalized coordinate (`w = 0`) staying free even
/// at `lambda = inf`.
#[inline]
fn penalty_level(lambda: f64, w: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        lambda * w
    }
}

/// `S(z, t) = sgn(z) (|z| - t)_+`.
#[inline]
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Data on the solver's scale together with the map back to raw columns.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    pub data: Dataset,
    pub std: Standardization,
}

impl Prepared {
    pub fn new(data: &Dataset, config: &SolverConfig) -> Result<Self> {
        if config.standardize {
            let (data, std) = standardize(data)?;
            Ok(Prepared { data, std })
        } else {
            Ok(Prepared {
                std: Standardization::identity(data.p()),
                data: data.clone(),
            })
        }
    }

    pub fn natural(&self, theta: &OlsenParams) -> Result<NaturalParams> {
        destandardize_params(&to_natural(theta)?, &self.std)
    }
}

const DIVERGENCE_LIMIT: f64 = 1e8;

/// Mutable coordinate-descent state: current parameters plus the cached
/// linear predictor.
#[derive(Debug, Clone)]
pub struct GcdState<'a> {
    data: &'a Dataset,
    curvature: Vec<f64>,
    delta0: f64,
    delta: Vec<f64>,
    gamma: f64,
    eta: Vec<f64>,
    /// `d l_n / d eta_i` times `n`, kept in sync with `eta` and `gamma`.
    score: Vec<f64>,
    sum_y2: f64,
}

impl<'a> GcdState<'a> {
    pub fn new(data: &'a Dataset, theta: &OlsenParams) -> Result<Self> {
        theta.validate()?;
        if theta.p() != data.p() {
            return Err(Error::ShapeMismatch(format!(
                "initial value has {} slopes, data has {} columns",
                theta.p(),
                data.p()
            )));
        }
        let n = data.n() as f64;
        let curvature = data
            .x()
            .column_iter()
            .map(|c| c.norm_squared() / n)
            .collect();
        let y = data.y();
        let sum_y2: f64 = data
            .uncensored()
            .iter()
            .zip(y.iter())
            .filter(|(d, _)| **d)
            .map(|(_, v)| v * v)
            .sum();
        if !(sum_y2 > 0.0) {
            return Err(Error::degenerate(
                "sum of squared uncensored responses is zero",
            ));
        }
        let mut eta = data.x() * &theta.delta;
        eta.add_scalar_mut(theta.delta0);
        let mut state = GcdState {
            data,
            curvature,
            delta0: theta.delta0,
            delta: theta.delta.iter().copied().collect(),
            gamma: theta.gamma,
            eta: eta.as_slice().to_vec(),
            score: vec![0.0; data.n()],
            sum_y2,
        };
        state.refresh_scores();
        Ok(state)
    }

    fn refresh_scores(&mut self) {
        let y = self.data.y();
        let d = self.data.uncensored();
        for i in 0..self.eta.len() {
            self.score[i] = eta_score(d[i], y[i], self.eta[i], self.gamma);
        }
    }

    pub fn theta(&self) -> OlsenParams {
        OlsenParams {
            delta0: self.delta0,
            delta: DVector::from_column_slice(&self.delta),
            gamma: self.gamma,
        }
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    fn column(&self, j: usize) -> &[f64] {
        let n = self.data.n();
        &self.data.x().as_slice()[j * n..(j + 1) * n]
    }

    /// `d l_n / d delta0` at the current state.
    pub fn intercept_derivative(&self) -> f64 {
        self.score.iter().sum::<f64>() / self.data.n() as f64
    }

    /// `d l_n / d delta_j` at the current state.
    pub fn slope_derivative(&self, j: usize) -> f64 {
        let s: f64 = self
            .column(j)
            .iter()
            .zip(&self.score)
            .map(|(x, u)| x * u)
            .sum();
        s / self.data.n() as f64
    }

    /// Minimizer over `delta_j` of the quadratic majorizer plus
    /// `lambda * w_j * |delta_j|`. Does not modify the state.
    pub fn update_delta_j(&self, j: usize, lambda: f64, w_j: f64) -> f64 {
        let m = self.curvature[j];
        if m == 0.0 {
            return 0.0;
        }
        let z = m * self.delta[j] - self.slope_derivative(j);
        let t = penalty_level(lambda, w_j);
        if t.is_infinite() {
            return 0.0;
        }
        soft_threshold(z, t) / m
    }

    /// Majorizer step for the (unpenalized) intercept.
    pub fn update_delta0(&self) -> f64 {
        self.delta0 - self.intercept_derivative()
    }

    /// Exact minimizer of `l_n` over `gamma` with `delta` held fixed.
    pub fn update_gamma(&self) -> f64 {
        let y = self.data.y();
        let d = self.data.uncensored();
        let b: f64 = (0..self.eta.len())
            .filter(|&i| d[i])
            .map(|i| y[i] * self.eta[i])
            .sum();
        let a = self.sum_y2;
        let c = self.data.n_uncensored() as f64;
        let disc = (b * b + 4.0 * a * c).sqrt();
        // positive root, written to avoid cancellation when b < 0
        if b >= 0.0 {
            (b + disc) / (2.0 * a)
        } else {
            2.0 * c / (disc - b)
        }
    }

    pub fn commit_delta_j(&mut self, j: usize, value: f64) {
        let diff = value - self.delta[j];
        if diff == 0.0 {
            return;
        }
        self.delta[j] = value;
        let n = self.data.n();
        let col = &self.data.x().as_slice()[j * n..(j + 1) * n];
        let y = self.data.y();
        let d = self.data.uncensored();
        for i in 0..n {
            if col[i] != 0.0 {
                self.eta[i] += diff * col[i];
                self.score[i] = eta_score(d[i], y[i], self.eta[i], self.gamma);
            }
        }
    }

    pub fn commit_delta0(&mut self, value: f64) {
        let diff = value - self.delta0;
        if diff == 0.0 {
            return;
        }
        self.delta0 = value;
        for e in &mut self.eta {
            *e += diff;
        }
        self.refresh_scores();
    }

    pub fn commit_gamma(&mut self, value: f64) {
        debug_assert!(value > 0.0);
        if value == self.gamma {
            return;
        }
        self.gamma = value;
        let y = self.data.y();
        for (i, &unc) in self.data.uncensored().iter().enumerate() {
            if unc {
                self.score[i] = self.eta[i] - value * y[i];
            }
        }
    }

    pub fn loss(&self) -> f64 {
        neg_loglik_eta(self.data, &self.eta, self.gamma)
    }

    /// Loss plus `lambda * sum_j w_j |delta_j|`.
    pub fn objective(&self, lambda: f64, weights: &[f64]) -> f64 {
        let pen: f64 = self
            .delta
            .iter()
            .zip(weights)
            .filter(|(d, _)| **d != 0.0)
            .map(|(d, w)| penalty_level(lambda, *w) * d.abs())
            .sum();
        self.loss() + pen
    }

    /// Full gradient of `l_n`, length `p + 2`.
    pub fn gradient(&self) -> DVector<f64> {
        gradient_eta(self.data, &self.eta, self.gamma)
    }

    /// Largest violation of the optimality conditions over the intercept,
    /// `gamma` and the slopes in `coords`.
    pub fn kkt_residual(&self, lambda: f64, weights: &[f64], coords: &[usize]) -> f64 {
        let grad = self.gradient();
        let p = self.delta.len();
        let mut worst = grad[0].abs().max(grad[p + 1].abs());
        for &j in coords {
            let g = grad[j + 1];
            let t = penalty_level(lambda, weights[j]);
            let v = if self.delta[j] == 0.0 {
                if t.is_infinite() {
                    0.0
                } else {
                    (g.abs() - t).max(0.0)
                }
            } else {
                (g + t * self.delta[j].signum()).abs()
            };
            worst = worst.max(v);
        }
        worst
    }

    /// True once the uncensored responses are fit to within `1e-8` of their
    /// scale, i.e. `gamma * rms(y) > 1e8`. This happens only when the
    /// objective has no finite minimizer (unpenalized slopes interpolating
    /// the uncensored rows); past that point rounding in `gamma * y - eta`
    /// swamps any further progress.
    pub fn diverged(&self) -> bool {
        self.gamma * self.gamma * self.sum_y2 / self.data.n() as f64
            > DIVERGENCE_LIMIT * DIVERGENCE_LIMIT
    }

    /// One cycle: intercept, the listed slopes, then `gamma`. Returns the
    /// largest absolute parameter change.
    fn cycle(&mut self, lambda: f64, weights: &[f64], coords: &[usize], scale: bool) -> f64 {
        let before = if cfg!(debug_assertions) {
            self.objective(lambda, weights)
        } else {
            0.0
        };
        let mut change: f64 = 0.0;
        let d0 = self.update_delta0();
        change = change.max((d0 - self.delta0).abs());
        self.commit_delta0(d0);
        for &j in coords {
            let v = self.update_delta_j(j, lambda, weights[j]);
            change = change.max((v - self.delta[j]).abs());
            self.commit_delta_j(j, v);
        }
        let g = self.update_gamma();
        change = change.max((g - self.gamma).abs());
        self.commit_gamma(g);
        if scale {
            change = change.max(self.scale_step(lambda, weights));
        }
        if cfg!(debug_assertions) && !self.diverged() {
            let after = self.objective(lambda, weights);
            debug_assert!(
                after <= before + 1e-10,
                "objective increased within a cycle: {before} -> {after}"
            );
        }
        change
    }

    /// Minimizes the objective along the ray `c * (delta0, delta, gamma)`,
    /// `c > 0`, by safeguarded Newton steps and commits the result. Returns
    /// the largest parameter change.
    ///
    /// Coordinate moves are slow along this ray: rescaling `sigma` with
    /// `beta / sigma` fixed pits the large `gamma` curvature (about mean
    /// `y^2`) against the slopes. The penalty is linear in `c`, so the line
    /// search is exact.
    pub fn scale_step(&mut self, lambda: f64, weights: &[f64]) -> f64 {
        let pen: f64 = self
            .delta
            .iter()
            .zip(weights)
            .filter(|(d, _)| **d != 0.0)
            .map(|(d, w)| penalty_level(lambda, *w) * d.abs())
            .sum();
        if !pen.is_finite() {
            return 0.0;
        }
        let y = self.data.y();
        let d = self.data.uncensored();
        let n = self.data.n() as f64;
        let n1 = self.data.n_uncensored() as f64;
        let (mut ss, mut cens) = (0.0, Vec::new());
        for i in 0..self.eta.len() {
            if d[i] {
                let r = self.gamma * y[i] - self.eta[i];
                ss += r * r;
            } else if self.eta[i] != 0.0 {
                cens.push(self.eta[i]);
            }
        }
        // f(c) - f(1), up to the constant -n1 ln(gamma) / n
        let value = |c: f64| {
            let mut v = 0.5 * c * c * ss - n1 * c.ln();
            for &e in &cens {
                v -= crate::special::log_norm_cdf(-c * e);
            }
            v / n + c * pen
        };
        let mut c = 1.0_f64;
        let mut fc = value(c);
        for _ in 0..50 {
            let (mut d1, mut d2) = (c * ss - n1 / c, ss + n1 / (c * c));
            for &e in &cens {
                let (g, sg) = crate::special::mills_parts(-c * e);
                d1 += e * g;
                d2 += e * e * g * sg;
            }
            let (d1, d2) = (d1 / n + pen, d2 / n);
            if !(d2 > 0.0) {
                break;
            }
            let mut step = d1 / d2;
            let mut next = c - step;
            while !(next > 0.5 * c) {
                step *= 0.5;
                next = c - step;
            }
            let mut fnext = value(next);
            let mut halvings = 0;
            while !(fnext <= fc) && halvings < 30 {
                step *= 0.5;
                next = c - step;
                fnext = value(next);
                halvings += 1;
            }
            if !(fnext <= fc) {
                break;
            }
            let moved = (next - c).abs();
            c = next;
            fc = fnext;
            if moved < 1e-13 {
                break;
            }
        }
        if c == 1.0 {
            return 0.0;
        }
        let largest = self
            .delta
            .iter()
            .fold(self.delta0.abs().max(self.gamma), |m, v| m.max(v.abs()));
        self.delta0 *= c;
        for v in &mut self.delta {
            *v *= c;
        }
        self.gamma *= c;
        for e in &mut self.eta {
            *e *= c;
        }
        self.refresh_scores();
        (c - 1.0).abs() * largest
    }

    /// Alternates intercept and `gamma` updates with every slope frozen.
    pub fn fit_null(&mut self, tol: f64, max_cycles: usize) -> usize {
        let no_slopes: [f64; 0] = [];
        for cycle in 1..=max_cycles {
            if self.cycle(0.0, &no_slopes, &[], false) < tol {
                return cycle;
            }
        }
        max_cycles
    }
}

/// Runs cycles to convergence on the slopes in `coords`. Returns
/// `(cycles, converged, kkt_residual)`.
pub(crate) fn solve(
    state: &mut GcdState<'_>,
    lambda: f64,
    weights: &[f64],
    coords: &[usize],
    config: &SolverConfig,
) -> (usize, bool, f64) {
    let mut order: Vec<usize> = coords.to_vec();
    if config.order == CoordinateOrder::Reverse {
        order.reverse();
    }
    let mut cycles = 0;
    let mut full_sweeps = 0;
    loop {
        let change = state.cycle(lambda, weights, &order, config.scale_step);
        cycles += 1;
        full_sweeps += 1;
        if change < config.tol {
            let kkt = state.kkt_residual(lambda, weights, coords);
            if kkt <= 10.0 * config.tol {
                return (cycles, true, kkt);
            }
        }
        if cycles >= config.max_cycles || state.diverged() {
            return (cycles, false, state.kkt_residual(lambda, weights, coords));
        }
        if config.active_set && full_sweeps >= 2 {
            let active: Vec<usize> = order
                .iter()
                .copied()
                .filter(|&j| state.delta[j] != 0.0)
                .collect();
            if active.len() < order.len() {
                while cycles < config.max_cycles {
                    let change = state.cycle(lambda, weights, &active, config.scale_step);
                    cycles += 1;
                    if change < config.tol {
                        break;
                    }
                }
            }
        }
    }
}

fn validate_penalty(lambda: f64, weights: &[f64], p: usize) -> Result<()> {
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

/// Slopes-zero maximum-likelihood fit, starting from `delta0 = 0` and
/// `gamma = 1 / sd(uncensored y)`.
fn null_tol(config: &SolverConfig) -> f64 {
    (config.tol * 1e-3).max(1e-14)
}

pub(crate) fn null_theta(data: &Dataset, config: &SolverConfig) -> Result<OlsenParams> {
    let ys: Vec<f64> = data
        .y()
        .iter()
        .zip(data.uncensored())
        .filter(|(_, d)| **d)
        .map(|(v, _)| *v)
        .collect();
    let m = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / m;
    let var = ys.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
    let spread = if var > 0.0 {
        var.sqrt()
    } else {
        (ys.iter().map(|v| v * v).sum::<f64>() / m).sqrt()
    };
    let start = OlsenParams::null(data.p(), 0.0, 1.0 / spread);
    let mut state = GcdState::new(data, &start)?;
    state.fit_null(null_tol(config), config.max_cycles.max(10_000));
    Ok(state.theta())
}

pub(crate) fn fit_prepared(
    prep: &Prepared,
    lambda: f64,
    weights: &[f64],
    config: &SolverConfig,
    init: Option<&OlsenParams>,
) -> Result<FitResult> {
    let p = prep.data.p();
    let coords: Vec<usize> = (0..p).collect();
    fit_prepared_on(prep, lambda, weights, &coords, config, init)
}

/// Solves with only the slopes in `coords` free; the rest are held at their
/// initial values (zero when starting from the null model).
pub(crate) fn fit_prepared_on(
    prep: &Prepared,
    lambda: f64,
    weights: &[f64],
    coords: &[usize],
    config: &SolverConfig,
    init: Option<&OlsenParams>,
) -> Result<FitResult> {
    config.validate()?;
    let data = &prep.data;
    validate_penalty(lambda, weights, data.p())?;
    let start = match init {
        Some(t) => t.clone(),
        None => null_theta(data, config)?,
    };
    let mut state = GcdState::new(data, &start)?;
    let (cycles, converged, kkt) = solve(&mut state, lambda, weights, coords, config);
    let theta = state.theta();
    let natural = prep.natural(&theta)?;
    Ok(FitResult {
        objective: state.objective(lambda, weights),
        theta,
        natural,
        cycles_used: cycles,
        kkt_residual: kkt,
        converged,
        lambda,
        weights_used: Some(weights.to_vec()),
        standardization: prep.std.clone(),
    })
}

/// Weighted-lasso penalized Tobit fit at a single `lambda`.
///
/// `init`, when given, is on the solver's scale (standardized columns when
/// `config.standardize` is set), e.g. the `theta` of a previous fit.
pub fn fit_weighted_lasso(
    data: &Dataset,
    lambda: f64,
    weights: &[f64],
    config: &SolverConfig,
    init: Option<&OlsenParams>,
) -> Result<FitResult> {
    let prep = Prepared::new(data, config)?;
    fit_prepared(&prep, lambda, weights, config, init)
}

/// Plain lasso (unit weights).
pub fn fit_lasso(data: &Dataset, lambda: f64, config: &SolverConfig) -> Result<FitResult> {
    fit_weighted_lasso(data, lambda, &vec![1.0; data.p()], config, None)
}

pub(crate) fn lambda_max_prepared(
    prep: &Prepared,
    weights: &[f64],
    config: &SolverConfig,
) -> Result<(f64, OlsenParams)> {
    let null = null_theta(&prep.data, config)?;
    let state = GcdState::new(&prep.data, &null)?;
    let grad = state.gradient();
    let mut lmax: f64 = 0.0;
    for (j, w) in weights.iter().enumerate() {
        if *w > 0.0 {
            lmax = lmax.max(grad[j + 1].abs() / w);
        }
    }
    // The null model is only converged to `null_tol`; without the margin the
    // first intercept step can leave a slope a few ulps past the threshold.
    Ok((lmax * (1.0 + 100.0 * null_tol(config)), null))
}

/// Smallest `lambda` at which the all-zero slope vector is optimal.
pub fn lambda_max(data: &Dataset, config: &SolverConfig) -> Result<f64> {
    let prep = Prepared::new(data, config)?;
    Ok(lambda_max_prepared(&prep, &vec![1.0; data.p()], config)?.0)
}

/// Log-spaced grid from `lmax` down to `ratio * lmax`.
pub fn lambda_grid(lmax: f64, n_lambda: usize, ratio: f64) -> Vec<f64> {
    if n_lambda == 1 {
        return vec![lmax];
    }
    let (hi, lo) = (lmax.ln(), (lmax * ratio).ln());
    (0..n_lambda)
        .map(|k| {
            if k == 0 {
                lmax
            } else {
                (hi + (lo - hi) * k as f64 / (n_lambda - 1) as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathOptions {
    pub n_lambda: usize,
    /// Defaults to 0.01, or 0.05 when `p > n`.
    pub lambda_min_ratio: Option<f64>,
    pub weights: Option<Vec<f64>>,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions {
            n_lambda: 100,
            lambda_min_ratio: None,
            weights: None,
        }
    }
}

pub fn default_min_ratio(n: usize, p: usize) -> f64 {
    if p > n {
        0.05
    } else {
        0.01
    }
}

fn check_decreasing(lambdas: &[f64]) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::invalid("empty lambda sequence"));
    }
    if lambdas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::invalid(
            "lambda sequence must be strictly decreasing",
        ));
    }
    Ok(())
}

/// Warm-started solutions along a decreasing `lambda` grid.
pub fn fit_path(
    data: &Dataset,
    options: &PathOptions,
    config: &SolverConfig,
) -> Result<PathResult> {
    if options.n_lambda == 0 {
        return Err(Error::invalid("n_lambda must be at least 1"));
    }
    let prep = Prepared::new(data, config)?;
    let weights = options
        .weights
        .clone()
        .unwrap_or_else(|| vec![1.0; data.p()]);
    validate_penalty(0.0, &weights, data.p())?;
    let (lmax, null) = lambda_max_prepared(&prep, &weights, config)?;
    let ratio = options
        .lambda_min_ratio
        .unwrap_or_else(|| default_min_ratio(data.n(), data.p()));
    let lambdas = if lmax > 0.0 {
        lambda_grid(lmax, options.n_lambda, ratio)
    } else {
        vec![0.0]
    };
    let fits = path_prepared(&prep, &lambdas, &weights, config, Some(&null))?;
    Ok(PathResult {
        lambdas,
        fits,
        null_model: (null.delta0, null.gamma),
    })
}

/// Warm-started path over caller-supplied `lambdas`.
pub fn fit_path_at(
    data: &Dataset,
    lambdas: &[f64],
    weights: Option<&[f64]>,
    config: &SolverConfig,
) -> Result<PathResult> {
    let prep = Prepared::new(data, config)?;
    let weights = weights
        .map(<[f64]>::to_vec)
        .unwrap_or_else(|| vec![1.0; data.p()]);
    let null = null_theta(&prep.data, config)?;
    let fits = path_prepared(&prep, lambdas, &weights, config, Some(&null))?;
    Ok(PathResult {
        lambdas: lambdas.to_vec(),
        fits,
        null_model: (null.delta0, null.gamma),
    })
}

pub(crate) fn path_prepared(
    prep: &Prepared,
    lambdas: &[f64],
    weights: &[f64],
    config: &SolverConfig,
    start: Option<&OlsenParams>,
) -> Result<Vec<FitResult>> {
    check_decreasing(lambdas)?;
    let mut fits: Vec<FitResult> = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let init = fits.last().map(|f| &f.theta).or(start);
        fits.push(fit_prepared(prep, lam, weights, config, init)?);
    }
    Ok(fits)
}
