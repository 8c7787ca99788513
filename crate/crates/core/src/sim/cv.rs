use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{rep_rng, RngPurpose};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::gcd::{
    default_min_ratio, fit_path_at, lambda_grid, lambda_max, FitResult, SolverConfig,
};
use crate::lla::{fit_folded_concave_path, LlaConfig};
use crate::ls::{fit_ls_path_at, ls_lambda_max};
use crate::penalty::PenaltySpec;
use crate::predict::{predict, PredictMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    TobitLasso,
    TobitScad,
    LsLasso,
    LsScad,
}

impl Method {
    pub fn is_tobit(self) -> bool {
        matches!(self, Method::TobitLasso | Method::TobitScad)
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tobit_lasso" => Ok(Method::TobitLasso),
            "tobit_scad" => Ok(Method::TobitScad),
            "ls_lasso" => Ok(Method::LsLasso),
            "ls_scad" => Ok(Method::LsScad),
            other => Err(Error::invalid(format!("unknown method '{other}'"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::TobitLasso => "tobit_lasso",
            Method::TobitScad => "tobit_scad",
            Method::LsLasso => "ls_lasso",
            Method::LsScad => "ls_scad",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOptions {
    pub k: usize,
    pub n_lambda: usize,
    /// Defaults to [`default_min_ratio`].
    pub lambda_min_ratio: Option<f64>,
    /// Explicit decreasing grid; overrides `n_lambda` and
    /// `lambda_min_ratio`.
    pub lambdas: Option<Vec<f64>>,
    pub solver: SolverConfig,
    pub lla_steps: usize,
    /// SCAD concavity for the Tobit model.
    pub tobit_a: f64,
    /// SCAD concavity for least squares.
    pub ls_a: f64,
    /// How Tobit fits predict; least-squares fits always predict linearly.
    pub predict_mode: PredictMode,
    pub seed: u64,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            k: 5,
            n_lambda: 100,
            lambda_min_ratio: None,
            lambdas: None,
            solver: SolverConfig::default(),
            lla_steps: 3,
            tobit_a: 3.0,
            ls_a: 3.7,
            predict_mode: PredictMode::CensoredMean,
            seed: 0,
        }
    }
}

impl CvOptions {
    fn penalty(&self, method: Method) -> Result<PenaltySpec> {
        match method {
            Method::TobitLasso | Method::LsLasso => PenaltySpec::lasso(0.0),
            Method::TobitScad => PenaltySpec::scad(0.0, self.tobit_a),
            Method::LsScad => PenaltySpec::scad(0.0, self.ls_a),
        }
    }

    fn mode(&self, method: Method) -> PredictMode {
        if method.is_tobit() {
            self.predict_mode
        } else {
            PredictMode::Latent
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub lambdas: Vec<f64>,
    /// Pooled held-out mean squared error per `lambda`.
    pub cv_mse: Vec<f64>,
    /// Standard error of the per-fold MSEs.
    pub cv_se: Vec<f64>,
    pub best_index: usize,
    pub best_lambda: f64,
    pub folds: Vec<usize>,
}

/// Decreasing `lambda` grid for `method` on the full data, or `options.lambdas`
/// when given.
pub fn lambda_sequence(data: &Dataset, method: Method, options: &CvOptions) -> Result<Vec<f64>> {
    if let Some(grid) = &options.lambdas {
        if grid.is_empty()
            || grid.windows(2).any(|w| !(w[1] < w[0]))
            || !(grid[grid.len() - 1] >= 0.0)
        {
            return Err(Error::invalid(
                "lambda grid must be nonempty, nonnegative and strictly decreasing",
            ));
        }
        return Ok(grid.clone());
    }
    if options.n_lambda == 0 {
        return Err(Error::invalid("n_lambda must be at least 1"));
    }
    let lmax = if method.is_tobit() {
        lambda_max(data, &options.solver)?
    } else {
        ls_lambda_max(data, &options.solver)?
    };
    if !(lmax > 0.0) {
        return Ok(vec![0.0]);
    }
    let ratio = options
        .lambda_min_ratio
        .unwrap_or_else(|| default_min_ratio(data.n(), data.p()));
    Ok(lambda_grid(lmax, options.n_lambda, ratio))
}

/// Fits `method` along `lambdas` (decreasing) with warm starts.
pub fn fit_method_path(
    data: &Dataset,
    method: Method,
    lambdas: &[f64],
    options: &CvOptions,
) -> Result<Vec<FitResult>> {
    let penalty = options.penalty(method)?;
    match method {
        Method::TobitLasso => Ok(fit_path_at(data, lambdas, None, &options.solver)?.fits),
        Method::TobitScad => Ok(fit_folded_concave_path(
            data,
            &penalty,
            lambdas,
            options.lla_steps,
            &options.solver,
        )?
        .into_iter()
        .map(|f| f.fit)
        .collect()),
        Method::LsLasso | Method::LsScad => {
            let lla = LlaConfig {
                steps: options.lla_steps,
                ..LlaConfig::default()
            };
            fit_ls_path_at(data, &penalty, lambdas, &options.solver, &lla)
        }
    }
}

/// Fits `method` at a single `lambda`.
pub fn fit_method(
    data: &Dataset,
    method: Method,
    lambda: f64,
    options: &CvOptions,
) -> Result<FitResult> {
    Ok(fit_method_path(data, method, &[lambda], options)?.remove(0))
}

/// Fold labels `0..k`, stratified on the censoring indicator: each stratum
/// is shuffled and dealt round-robin, uncensored rows first.
pub fn stratified_folds(data: &Dataset, k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = data.n();
    if k < 2 || k > n {
        return Err(Error::invalid(format!(
            "need 2 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    let mut rng = rep_rng(seed, 0, RngPurpose::Folds);
    let d = data.uncensored();
    let mut unc: Vec<usize> = (0..n).filter(|&i| d[i]).collect();
    let mut cens: Vec<usize> = (0..n).filter(|&i| !d[i]).collect();
    unc.shuffle(&mut rng);
    cens.shuffle(&mut rng);
    let mut folds = vec![0; n];
    for (pos, &i) in unc.iter().chain(&cens).enumerate() {
        folds[i] = pos % k;
    }
    Ok(folds)
}

fn check_folds(data: &Dataset, folds: &[usize]) -> Result<usize> {
    if folds.len() != data.n() {
        return Err(Error::ShapeMismatch(format!(
            "{} fold labels for {} rows",
            folds.len(),
            data.n()
        )));
    }
    let k = folds.iter().max().map_or(0, |m| m + 1);
    if k < 2 {
        return Err(Error::invalid("need at least two folds"));
    }
    for f in 0..k {
        if !folds.contains(&f) {
            return Err(Error::invalid(format!("fold {f} is empty")));
        }
        let has_uncensored = folds
            .iter()
            .zip(data.uncensored())
            .any(|(&g, &u)| g != f && u);
        if !has_uncensored {
            return Err(Error::Stratification { fold: f });
        }
    }
    Ok(k)
}

/// K-fold cross-validation with folds from [`stratified_folds`].
pub fn kfold_cv(data: &Dataset, method: Method, options: &CvOptions) -> Result<CvResult> {
    let folds = stratified_folds(data, options.k, options.seed)?;
    kfold_cv_with_folds(data, method, &folds, options)
}

/// Cross-validation over caller-supplied fold labels. The `lambda` grid is
/// computed once on the full data.
pub fn kfold_cv_with_folds(
    data: &Dataset,
    method: Method,
    folds: &[usize],
    options: &CvOptions,
) -> Result<CvResult> {
    let k = check_folds(data, folds)?;
    let lambdas = lambda_sequence(data, method, options)?;
    let mode = options.mode(method);

    let per_fold: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|f| -> Result<Vec<f64>> {
            let train_rows: Vec<usize> = (0..data.n()).filter(|&i| folds[i] != f).collect();
            let test_rows: Vec<usize> = (0..data.n()).filter(|&i| folds[i] == f).collect();
            let train = data.subset(&train_rows)?;
            let x_test = data.x().select_rows(test_rows.iter());
            let fits = fit_method_path(&train, method, &lambdas, options)?;
            // summed squared errors for this fold, one entry per lambda
            fits.iter()
                .map(|fit| {
                    let pred = predict(&fit.natural, &x_test, mode, 0.0)?;
                    Ok(test_rows
                        .iter()
                        .zip(pred.iter())
                        .map(|(&i, a)| (a - data.y()[i]).powi(2))
                        .sum())
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let sizes: Vec<f64> = (0..k)
        .map(|f| folds.iter().filter(|&&g| g == f).count() as f64)
        .collect();
    let n = data.n() as f64;
    let mut cv_mse = Vec::with_capacity(lambdas.len());
    let mut cv_se = Vec::with_capacity(lambdas.len());
    for l in 0..lambdas.len() {
        let total: f64 = per_fold.iter().map(|v| v[l]).sum();
        cv_mse.push(total / n);
        let means: Vec<f64> = per_fold.iter().zip(&sizes).map(|(v, s)| v[l] / s).collect();
        let m = means.iter().sum::<f64>() / k as f64;
        let var = means.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (k as f64 - 1.0);
        cv_se.push((var / k as f64).sqrt());
    }
    // first minimum along a decreasing grid: ties go to the larger lambda
    let mut best_index = 0;
    for (l, v) in cv_mse.iter().enumerate() {
        if *v < cv_mse[best_index] {
            best_index = l;
        }
    }
    Ok(CvResult {
        best_lambda: lambdas[best_index],
        lambdas,
        cv_mse,
        cv_se,
        best_index,
        folds: folds.to_vec(),
    })
}
