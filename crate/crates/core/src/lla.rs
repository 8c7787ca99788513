//! Local linear approximation for SCAD and MCP penalized Tobit regression.
//!
//! Each step replaces the concave penalty by its tangent at the current
//! iterate, `sum_j P'(|delta_j|) |delta_j|`, and solves the resulting
//! weighted lasso with [`crate::gcd`]. Weights are passed to the solver as
//! `P'(|delta_j|) / lambda` at penalty level `lambda`, so a step taken from
//! `delta = 0` has unit weights and is the plain lasso bit for bit.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::gcd::{fit_prepared, fit_prepared_on, null_theta, FitResult, Prepared, SolverConfig};
use crate::loss::neg_loglik;
use crate::params::OlsenParams;
use crate::penalty::{lla_weights, PenaltySpec};

#[derive(Debug, Clone, PartialEq, Default)]
pub enum LlaInit {
    /// All slopes zero; the first step is the lasso.
    #[default]
    Zero,
    /// Start from the Tobit lasso at the given `lambda`.
    Lasso(f64),
    /// Start from a given point on the solver's scale.
    Explicit(OlsenParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlaConfig {
    pub steps: usize,
    pub init: LlaInit,
}

impl Default for LlaConfig {
    fn default() -> Self {
        LlaConfig {
            steps: 3,
            init: LlaInit::Zero,
        }
    }
}

impl LlaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::invalid("LLA needs at least one step"));
        }
        if let LlaInit::Lasso(l) = self.init {
            if !(l >= 0.0) {
                return Err(Error::invalid("initial lasso lambda must be >= 0"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlaStep {
    pub support: Vec<usize>,
    /// `l_n + sum_j P(|delta_j|)` after the step.
    pub objective: f64,
    pub converged: bool,
    pub cycles: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlaFit {
    /// The last step's solution; `converged` is false if any step failed to
    /// converge, and `objective` is the weighted-lasso objective of that
    /// step.
    pub fit: FitResult,
    /// Folded-concave objective at the initial point.
    pub initial_objective: f64,
    pub history: Vec<LlaStep>,
}

impl LlaFit {
    pub fn support(&self) -> Vec<usize> {
        self.fit.support()
    }
}

/// `P'(|delta_j|) / lambda`, so that a solve at `lambda` applies `P'`.
pub(crate) fn relative_weights(penalty: &PenaltySpec, coef: &[f64]) -> Result<Vec<f64>> {
    let w = lla_weights(penalty, coef)?;
    if penalty.lambda == 0.0 {
        return Ok(vec![0.0; coef.len()]);
    }
    if penalty.lambda.is_infinite() {
        // every slope is held at zero, where P' = lambda
        return Ok(vec![1.0; coef.len()]);
    }
    Ok(w.into_iter().map(|v| v / penalty.lambda).collect())
}

fn check_penalty(penalty: &PenaltySpec) -> Result<()> {
    penalty.validate()?;
    if !penalty.family.is_folded_concave() {
        return Err(Error::invalid(format!(
            "LLA needs a folded concave penalty, got {}",
            penalty.family
        )));
    }
    Ok(())
}

fn concave_objective(theta: &OlsenParams, prep: &Prepared, penalty: &PenaltySpec) -> Result<f64> {
    Ok(neg_loglik(theta, &prep.data)? + penalty.total(theta.delta.as_slice())?)
}

/// Runs the LLA steps from `start`, whose slopes define the first weights.
/// Step `k` is warm-started from `warm[k]` when given, otherwise from the
/// previous step's solution; only the weights depend on the previous step.
fn lla_steps(
    prep: &Prepared,
    penalty: &PenaltySpec,
    steps: usize,
    solver: &SolverConfig,
    start: OlsenParams,
    warm: Option<&[OlsenParams]>,
) -> Result<(LlaFit, Vec<OlsenParams>)> {
    let initial_objective = concave_objective(&start, prep, penalty)?;
    let mut current = start;
    let mut history = Vec::with_capacity(steps);
    let mut thetas = Vec::with_capacity(steps);
    let mut last: Option<FitResult> = None;
    for k in 0..steps {
        let w = relative_weights(penalty, current.delta.as_slice())?;
        let init = warm.and_then(|v| v.get(k)).unwrap_or(&current);
        let fit = fit_prepared(prep, penalty.lambda, &w, solver, Some(init))?;
        history.push(LlaStep {
            support: fit.support(),
            objective: concave_objective(&fit.theta, prep, penalty)?,
            converged: fit.converged,
            cycles: fit.cycles_used,
        });
        current = fit.theta.clone();
        thetas.push(current.clone());
        let stop = !fit.converged;
        last = Some(fit);
        // Later weights would be built from an unconverged (possibly
        // divergent) iterate.
        if stop {
            break;
        }
    }
    let mut fit = last.expect("steps >= 1");
    fit.converged = history.iter().all(|s| s.converged);
    Ok((
        LlaFit {
            fit,
            initial_objective,
            history,
        },
        thetas,
    ))
}

fn initial_point(prep: &Prepared, init: &LlaInit, solver: &SolverConfig) -> Result<OlsenParams> {
    let p = prep.data.p();
    match init {
        LlaInit::Zero => null_theta(&prep.data, solver),
        LlaInit::Lasso(l) => Ok(fit_prepared(prep, *l, &vec![1.0; p], solver, None)?.theta),
        LlaInit::Explicit(theta) => {
            theta.validate()?;
            if theta.p() != p {
                return Err(Error::ShapeMismatch(format!(
                    "initial value has {} slopes, data has {p} columns",
                    theta.p()
                )));
            }
            Ok(theta.clone())
        }
    }
}

/// SCAD or MCP penalized Tobit fit by `config.steps` LLA steps.
pub fn fit_folded_concave(
    data: &Dataset,
    penalty: &PenaltySpec,
    config: &LlaConfig,
    solver: &SolverConfig,
) -> Result<LlaFit> {
    check_penalty(penalty)?;
    config.validate()?;
    solver.validate()?;
    let prep = Prepared::new(data, solver)?;
    let start = initial_point(&prep, &config.init, solver)?;
    Ok(lla_steps(&prep, penalty, config.steps, solver, start, None)?.0)
}

/// Zero-initialized LLA along a decreasing `lambda` grid. The first step at
/// each `lambda` is the lasso, warm-started along the grid; the remaining
/// steps warm-start from it. `penalty.lambda` is ignored.
pub fn fit_folded_concave_path(
    data: &Dataset,
    penalty: &PenaltySpec,
    lambdas: &[f64],
    steps: usize,
    solver: &SolverConfig,
) -> Result<Vec<LlaFit>> {
    check_penalty(penalty)?;
    if steps == 0 {
        return Err(Error::invalid("LLA needs at least one step"));
    }
    if lambdas.is_empty() || lambdas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::invalid(
            "lambda sequence must be nonempty and strictly decreasing",
        ));
    }
    let prep = Prepared::new(data, solver)?;
    let p = data.p();
    let ones = vec![1.0; p];
    let mut lasso_warm = null_theta(&prep.data, solver)?;
    let mut out = Vec::with_capacity(lambdas.len());
    // solutions of steps 2.. at the previous lambda
    let mut later: Vec<OlsenParams> = Vec::new();
    for &lam in lambdas {
        let spec = penalty.with_lambda(lam)?;
        let zero = OlsenParams::null(p, lasso_warm.delta0, lasso_warm.gamma);
        let initial_objective = concave_objective(&zero, &prep, &spec)?;
        let first = fit_prepared(&prep, lam, &ones, solver, Some(&lasso_warm))?;
        lasso_warm = first.theta.clone();
        let step1 = LlaStep {
            support: first.support(),
            objective: concave_objective(&first.theta, &prep, &spec)?,
            converged: first.converged,
            cycles: first.cycles_used,
        };
        let fit = if steps > 1 {
            let (mut rest, thetas) = lla_steps(
                &prep,
                &spec,
                steps - 1,
                solver,
                first.theta.clone(),
                Some(&later),
            )?;
            later = if rest.fit.converged {
                thetas
            } else {
                Vec::new()
            };
            rest.history.insert(0, step1);
            rest.initial_objective = initial_objective;
            rest.fit.converged = rest.history.iter().all(|s| s.converged);
            rest
        } else {
            LlaFit {
                fit: first,
                initial_objective,
                history: vec![step1],
            }
        };
        out.push(fit);
    }
    Ok(out)
}

/// Unpenalized Tobit fit with every slope outside `support` held at zero.
///
/// Uses a cycle tolerance of at most `1e-11` so that a converged result has
/// `max_{j in support} |d l_n / d delta_j| <= 1e-10`.
pub fn fit_oracle(data: &Dataset, support: &[usize], solver: &SolverConfig) -> Result<FitResult> {
    let p = data.p();
    let mut coords = support.to_vec();
    coords.sort_unstable();
    coords.dedup();
    if coords.len() != support.len() {
        return Err(Error::invalid("support contains duplicate indices"));
    }
    if let Some(&j) = coords.iter().find(|&&j| j >= p) {
        return Err(Error::invalid(format!(
            "support index {j} out of range for {p} columns"
        )));
    }
    if coords.len() + 2 > data.n() {
        return Err(Error::degenerate(format!(
            "{} observations cannot identify {} parameters",
            data.n(),
            coords.len() + 2
        )));
    }
    let tight = solver.clone().with_tol(solver.tol.min(1e-11));
    let prep = Prepared::new(data, &tight)?;
    fit_prepared_on(&prep, 0.0, &vec![0.0; p], &coords, &tight, None)
}
