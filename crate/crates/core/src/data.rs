//! Observed data for a left-censored regression.
//!
//! The censoring threshold is subtracted from the response once, at
//! construction, so every downstream computation can assume a threshold of
//! zero. `censor_shift` remembers the original threshold for prediction.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::NaturalParams;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
    d: Vec<bool>,
    n_uncensored: usize,
    censor_shift: f64,
}

impl Dataset {
    /// Builds a dataset from a raw response censored from below at
    /// `censor_value`. Responses equal to the threshold are censored;
    /// responses below it are rejected.
    pub fn new(x: DMatrix<f64>, y_raw: &[f64], censor_value: f64) -> Result<Self> {
        if !censor_value.is_finite() {
            return Err(Error::invalid("censoring threshold must be finite"));
        }
        if let Some(i) = y_raw.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("response row {i} is not finite")));
        }
        if let Some(i) = y_raw.iter().position(|&v| v < censor_value) {
            return Err(Error::invalid(format!(
                "response row {i} ({}) is below the censoring threshold {censor_value}",
                y_raw[i]
            )));
        }
        let y: Vec<f64> = y_raw.iter().map(|&v| (v - censor_value).max(0.0)).collect();
        Self::from_shifted(x, DVector::from_vec(y), censor_value)
    }

    /// Builds a dataset whose response has already been shifted so the
    /// threshold is zero.
    pub fn from_shifted(x: DMatrix<f64>, y: DVector<f64>, censor_shift: f64) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::ShapeMismatch(format!(
                "x has {} rows but y has {} entries",
                x.nrows(),
                y.len()
            )));
        }
        if y.is_empty() {
            return Err(Error::degenerate("no observations"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("design matrix contains non-finite values"));
        }
        if let Some(i) = y.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid(format!(
                "shifted response row {i} must be >= 0"
            )));
        }
        let d: Vec<bool> = y.iter().map(|&v| v > 0.0).collect();
        let n_uncensored = d.iter().filter(|&&b| b).count();
        if n_uncensored == 0 {
            return Err(Error::degenerate(
                "every observation is censored; the scale parameter is unidentifiable",
            ));
        }
        Ok(Dataset {
            x,
            y,
            d,
            n_uncensored,
            censor_shift,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    /// Shifted response (threshold at zero).
    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn uncensored(&self) -> &[bool] {
        &self.d
    }

    pub fn n_uncensored(&self) -> usize {
        self.n_uncensored
    }

    pub fn censor_shift(&self) -> f64 {
        self.censor_shift
    }

    /// Response on the original scale.
    pub fn y_raw(&self) -> DVector<f64> {
        self.y.map(|v| v + self.censor_shift)
    }

    /// Rows `rows` in the given order.
    pub fn subset(&self, rows: &[usize]) -> Result<Dataset> {
        let x = self.x.select_rows(rows.iter());
        let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| self.y[i]));
        Dataset::from_shifted(x, y, self.censor_shift)
    }

    /// Columns `cols` in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_columns(cols.iter()),
            ..self.clone()
        }
    }

    /// Same rows with the response rescaled by `k > 0`.
    pub fn scale_response(&self, k: f64) -> Result<Dataset> {
        if !(k > 0.0) {
            return Err(Error::invalid("response scale must be positive"));
        }
        Dataset::from_shifted(self.x.clone(), &self.y * k, self.censor_shift * k)
    }
}

/// Column centering and scaling with the `1/n` convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardization {
    pub fn identity(p: usize) -> Self {
        Standardization {
            means: vec![0.0; p],
            scales: vec![1.0; p],
        }
    }

    pub fn fit(x: &DMatrix<f64>) -> Result<Self> {
        let n = x.nrows() as f64;
        let mut means = Vec::with_capacity(x.ncols());
        let mut scales = Vec::with_capacity(x.ncols());
        for (j, col) in x.column_iter().enumerate() {
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let scale = var.sqrt();
            if !(scale > 1e-13 * mean.abs().max(1.0)) {
                return Err(Error::ZeroVariance { column: j });
            }
            means.push(mean);
            scales.push(scale);
        }
        Ok(Standardization { means, scales })
    }

    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if x.ncols() != self.means.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} columns, got {}",
                self.means.len(),
                x.ncols()
            )));
        }
        let mut out = x.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            let (m, s) = (self.means[j], self.scales[j]);
            col.apply(|v| *v = (*v - m) / s);
        }
        Ok(out)
    }
}

/// Centers and scales every column so that `(1/n) sum x_ij = 0` and
/// `(1/n) sum x_ij^2 = 1`.
pub fn standardize(data: &Dataset) -> Result<(Dataset, Standardization)> {
    let s = Standardization::fit(&data.x)?;
    let x = s.apply(&data.x)?;
    let out = Dataset { x, ..data.clone() };
    Ok((out, s))
}

/// Maps coefficients fit on standardized columns back to the raw columns.
pub fn destandardize_params(np: &NaturalParams, s: &Standardization) -> Result<NaturalParams> {
    if np.beta.len() != s.scales.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} coefficients for {} columns",
            np.beta.len(),
            s.scales.len()
        )));
    }
    let beta: Vec<f64> = np
        .beta
        .iter()
        .zip(&s.scales)
        .map(|(b, sc)| b / sc)
        .collect();
    let offset: f64 = beta.iter().zip(&s.means).map(|(b, m)| b * m).sum();
    Ok(NaturalParams {
        beta0: np.beta0 - offset,
        beta,
        sigma: np.sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifts_and_flags() {
        let x = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let d = Dataset::new(x, &[2.0, 3.5, 2.0], 2.0).unwrap();
        assert_eq!(d.y().as_slice(), &[0.0, 1.5, 0.0]);
        assert_eq!(d.uncensored(), &[false, true, false]);
        assert_eq!(d.n_uncensored(), 1);
        assert_eq!(d.censor_shift(), 2.0);
    }

    #[test]
    fn rejects_all_censored_and_below_threshold() {
        let x = DMatrix::from_column_slice(2, 1, &[1.0, 2.0]);
        assert!(matches!(
            Dataset::new(x.clone(), &[0.0, 0.0], 0.0),
            Err(Error::DegenerateData(_))
        ));
        assert!(matches!(
            Dataset::new(x, &[-1.0, 1.0], 0.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn standardizes_simple_column() {
        let x = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let d = Dataset::new(x, &[1.0, 1.0, 1.0], 0.0).unwrap();
        let (sd, _) = standardize(&d).unwrap();
        let expect = [-1.224_744_871_391_589, 0.0, 1.224_744_871_391_589];
        for (a, b) in sd.x().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let (again, _) = standardize(&sd).unwrap();
        assert!((again.x() - sd.x()).amax() < 1e-12);
    }

    #[test]
    fn zero_variance_names_column() {
        let x = DMatrix::from_column_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 4.0, 4.0]);
        let d = Dataset::new(x, &[1.0, 1.0, 1.0], 0.0).unwrap();
        assert_eq!(
            standardize(&d).unwrap_err(),
            Error::ZeroVariance { column: 1 }
        );
    }
}
