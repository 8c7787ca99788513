//! The Tobit loss `l_n = -(1/n) log L_n` on the convex `(delta0, delta, gamma)`
//! scale, with its gradient and Hessian.
//!
//! Parameter ordering everywhere is `delta0, delta_1..delta_p, gamma`.

use nalgebra::{DMatrix, DVector};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::params::OlsenParams;
use crate::special::{hazard_h, log_norm_cdf, mills_g};

fn check(theta: &OlsenParams, data: &Dataset) -> Result<()> {
    theta.validate()?;
    if theta.p() != data.p() {
        return Err(Error::ShapeMismatch(format!(
            "parameters have {} slopes, data has {} columns",
            theta.p(),
            data.p()
        )));
    }
    Ok(())
}

/// `eta_i = delta0 + x_i' delta`.
pub fn linear_predictor(theta: &OlsenParams, data: &Dataset) -> DVector<f64> {
    let mut eta = data.x() * &theta.delta;
    eta.add_scalar_mut(theta.delta0);
    eta
}

/// Loss given a precomputed linear predictor.
pub(crate) fn neg_loglik_eta(data: &Dataset, eta: &[f64], gamma: f64) -> f64 {
    let y = data.y();
    let d = data.uncensored();
    let ln_gamma = gamma.ln();
    let mut total = 0.0;
    for i in 0..eta.len() {
        if d[i] {
            let r = gamma * y[i] - eta[i];
            total += 0.5 * r * r - ln_gamma;
        } else {
            total -= log_norm_cdf(-eta[i]);
        }
    }
    total / data.n() as f64
}

/// Per-row derivative of the loss with respect to `eta_i` (times n).
#[inline]
pub(crate) fn eta_score(uncensored: bool, y: f64, eta: f64, gamma: f64) -> f64 {
    if uncensored {
        eta - gamma * y
    } else {
        mills_g(-eta)
    }
}

/// Tobit loss `l_n(theta)`.
pub fn neg_loglik(theta: &OlsenParams, data: &Dataset) -> Result<f64> {
    check(theta, data)?;
    let eta = linear_predictor(theta, data);
    Ok(neg_loglik_eta(data, eta.as_slice(), theta.gamma))
}

/// Gradient of `l_n`, length `p + 2`.
pub fn gradient(theta: &OlsenParams, data: &Dataset) -> Result<DVector<f64>> {
    check(theta, data)?;
    let eta = linear_predictor(theta, data);
    Ok(gradient_eta(data, eta.as_slice(), theta.gamma))
}

pub(crate) fn gradient_eta(data: &Dataset, eta: &[f64], gamma: f64) -> DVector<f64> {
    let n = data.n();
    let p = data.p();
    let y = data.y();
    let d = data.uncensored();
    let u = DVector::from_iterator(n, (0..n).map(|i| eta_score(d[i], y[i], eta[i], gamma)));
    let mut grad = DVector::zeros(p + 2);
    grad[0] = u.sum();
    let xu = data.x().tr_mul(&u);
    grad.rows_mut(1, p).copy_from(&xu);
    let mut g_gamma = 0.0;
    for i in 0..n {
        if d[i] {
            g_gamma += (gamma * y[i] - eta[i]) * y[i] - 1.0 / gamma;
        }
    }
    grad[p + 1] = g_gamma;
    grad / n as f64
}

/// Hessian of `l_n`, `(p + 2) x (p + 2)`.
pub fn hessian(theta: &OlsenParams, data: &Dataset) -> Result<DMatrix<f64>> {
    check(theta, data)?;
    let n = data.n();
    let p = data.p();
    let eta = linear_predictor(theta, data);
    let y = data.y();
    let d = data.uncensored();
    let x = data.x();

    // augmented design [1, X, -y] with row weights; the -y column only
    // carries weight on uncensored rows
    let mut h = DMatrix::zeros(p + 2, p + 2);
    let mut row = vec![0.0; p + 2];
    for i in 0..n {
        let w = if d[i] { 1.0 } else { hazard_h(-eta[i]) };
        row[0] = 1.0;
        for j in 0..p {
            row[j + 1] = x[(i, j)];
        }
        row[p + 1] = if d[i] { -y[i] } else { 0.0 };
        for a in 0..p + 2 {
            let ra = w * row[a];
            if ra == 0.0 {
                continue;
            }
            for b in a..p + 2 {
                h[(a, b)] += ra * row[b];
            }
        }
    }
    h[(p + 1, p + 1)] += data.n_uncensored() as f64 / (theta.gamma * theta.gamma);
    for a in 0..p + 2 {
        for b in 0..a {
            h[(a, b)] = h[(b, a)];
        }
    }
    Ok(h / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(y: f64) -> Dataset {
        Dataset::new(DMatrix::from_element(1, 1, 1.0), &[y], 0.0).unwrap()
    }

    #[test]
    fn single_uncensored() {
        let data = one(1.0);
        let theta = OlsenParams::null(1, 0.0, 1.0);
        assert!((neg_loglik(&theta, &data).unwrap() - 0.5).abs() < 1e-15);
        let g = gradient(&theta, &data).unwrap();
        assert!((g[0] + 1.0).abs() < 1e-15);
        assert!(g[2].abs() < 1e-15);
    }

    #[test]
    fn single_censored() {
        // A censored-only dataset is invalid, so pair it with an uncensored
        // row and isolate the censored contribution.
        let x = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        let data = Dataset::new(x, &[0.0, 1.0], 0.0).unwrap();
        let theta = OlsenParams::null(1, 0.0, 1.0);
        let total = neg_loglik(&theta, &data).unwrap() * 2.0;
        assert!((total - 0.5 - std::f64::consts::LN_2).abs() < 1e-15);
        let g = gradient(&theta, &data).unwrap() * 2.0;
        // censored row adds g(0) to d/d delta0, uncensored adds -1
        assert!((g[0] - (0.797_884_560_802_865_4 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn intercept_only_hessian() {
        let data = Dataset::new(DMatrix::zeros(1, 0), &[1.0], 0.0).unwrap();
        let theta = OlsenParams::null(0, 0.0, 1.0);
        let h = hessian(&theta, &data).unwrap();
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 2.0]));
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let data = one(1.0);
        let theta = OlsenParams::null(2, 0.0, 1.0);
        assert!(matches!(
            neg_loglik(&theta, &data),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
