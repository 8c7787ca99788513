use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::params::NaturalParams;
use crate::predict::{predict, PredictMode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Test-set mean squared error against the censored response.
    pub mse: f64,
    /// `||beta_hat - beta||_1` over the slopes.
    pub l1: f64,
    pub l2: f64,
    /// Selected slopes that are truly zero.
    pub fp: usize,
    /// True slopes that were not selected.
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Metrics {
    pub const NAMES: [&'static str; 5] = ["mse", "l1", "l2", "fp", "fn"];

    pub fn values(&self) -> [f64; 5] {
        [self.mse, self.l1, self.l2, self.fp as f64, self.fn_ as f64]
    }
}

/// Scores a fit on held-out data. `fit` is on the raw response scale of
/// `test` minus its censoring shift, as produced by the solvers.
pub fn evaluate(
    fit: &NaturalParams,
    test: &Dataset,
    truth: &NaturalParams,
    selection: &[usize],
    mode: PredictMode,
) -> Result<Metrics> {
    let p = truth.beta.len();
    if fit.beta.len() != p || test.p() != p {
        return Err(Error::ShapeMismatch(format!(
            "fit has {} slopes, truth {p}, test data {} columns",
            fit.beta.len(),
            test.p()
        )));
    }
    if let Some(&j) = selection.iter().find(|&&j| j >= p) {
        return Err(Error::invalid(format!("selected index {j} out of range")));
    }
    let pred = predict(fit, test.x(), mode, 0.0)?;
    let mse = pred
        .iter()
        .zip(test.y().iter())
        .map(|(a, y)| (a - y) * (a - y))
        .sum::<f64>()
        / test.n() as f64;
    let diff = fit.beta.iter().zip(&truth.beta).map(|(a, b)| a - b);
    let l1 = diff.clone().map(f64::abs).sum();
    let l2 = diff.map(|d| d * d).sum::<f64>().sqrt();
    let mut selected = vec![false; p];
    for &j in selection {
        selected[j] = true;
    }
    let truly = |j: usize| truth.beta[j] != 0.0;
    let fp = (0..p).filter(|&j| selected[j] && !truly(j)).count();
    let fn_ = (0..p).filter(|&j| !selected[j] && truly(j)).count();
    Ok(Metrics {
        mse,
        l1,
        l2,
        fp,
        fn_,
    })
}
