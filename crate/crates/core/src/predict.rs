//! Predictions from natural-scale Tobit parameters.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::NaturalParams;
use crate::special::{mills_parts, norm_cdf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictMode {
    /// `c + beta0 + x' beta`
    Latent,
    /// `E[max(y*, c) | x]`
    #[default]
    CensoredMean,
    /// `P(y* > c | x)`
    ProbUncensored,
}

/// `E[max(m + sigma Z, 0)] = sigma Phi(z) (z + g(z))` with `z = m / sigma`.
///
/// Equivalent to `Phi(z) m + sigma phi(z)` but free of cancellation in the
/// left tail.
pub fn censored_mean(m: f64, sigma: f64) -> f64 {
    let z = m / sigma;
    let (_, z_plus_g) = mills_parts(z);
    sigma * norm_cdf(z) * z_plus_g
}

pub fn predict(
    np: &NaturalParams,
    x_new: &DMatrix<f64>,
    mode: PredictMode,
    censor_shift: f64,
) -> Result<DVector<f64>> {
    np.validate()?;
    if x_new.ncols() != np.beta.len() {
        return Err(Error::ShapeMismatch(format!(
            "model has {} coefficients, input has {} columns",
            np.beta.len(),
            x_new.ncols()
        )));
    }
    let beta = DVector::from_column_slice(&np.beta);
    let mut m = x_new * beta;
    m.add_scalar_mut(np.beta0);
    let out = match mode {
        PredictMode::Latent => m.map(|v| v + censor_shift),
        PredictMode::CensoredMean => m.map(|v| censor_shift + censored_mean(v, np.sigma)),
        PredictMode::ProbUncensored => m.map(|v| norm_cdf(v / np.sigma)),
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn censored_mean_at_zero_is_pdf() {
        let np = NaturalParams {
            beta0: 0.0,
            beta: vec![],
            sigma: 1.0,
        };
        let out = predict(&np, &DMatrix::zeros(1, 0), PredictMode::CensoredMean, 0.0).unwrap();
        assert!((out[0] - 0.398_942_280_401_432_7).abs() < 1e-12);
    }

    #[test]
    fn latent_is_linear() {
        let np = NaturalParams {
            beta0: 3.0,
            beta: vec![5.0],
            sigma: 2.0,
        };
        let x = DMatrix::from_element(1, 1, 1.0);
        assert_eq!(predict(&np, &x, PredictMode::Latent, 0.0).unwrap()[0], 8.0);
        assert_eq!(predict(&np, &x, PredictMode::Latent, 1.5).unwrap()[0], 9.5);
    }

    #[test]
    fn censored_mean_limits() {
        assert!((censored_mean(50.0, 1.0) - 50.0).abs() < 1e-12);
        let far = censored_mean(-60.0, 1.0);
        assert!((0.0..1e-300).contains(&far));
        // naive form agrees in the body of the distribution
        for &m in &[-3.0, -0.4, 0.0, 1.2, 4.0] {
            let s = 1.7;
            let z: f64 = m / s;
            let naive = norm_cdf(z) * m + s * crate::special::norm_pdf(z);
            assert!((censored_mean(m, s) - naive).abs() < 1e-13);
        }
    }

    #[test]
    fn shape_mismatch() {
        let np = NaturalParams {
            beta0: 0.0,
            beta: vec![1.0, 2.0],
            sigma: 1.0,
        };
        assert!(predict(&np, &DMatrix::zeros(3, 1), PredictMode::Latent, 0.0).is_err());
    }
}
