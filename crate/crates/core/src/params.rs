//! The two parameterizations of the Tobit model.
//!
//! The solver works on the convex scale `(delta0, delta, gamma)` with
//! `delta = beta / sigma` and `gamma = 1 / sigma`; reporting and prediction
//! use the natural scale `(beta0, beta, sigma)`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OlsenParams {
    pub delta0: f64,
    pub delta: DVector<f64>,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaturalParams {
    pub beta0: f64,
    pub beta: Vec<f64>,
    pub sigma: f64,
}

impl OlsenParams {
    pub fn new(delta0: f64, delta: DVector<f64>, gamma: f64) -> Result<Self> {
        let theta = OlsenParams {
            delta0,
            delta,
            gamma,
        };
        theta.validate()?;
        Ok(theta)
    }

    /// Slopes at zero, with the given intercept and precision.
    pub fn null(p: usize, delta0: f64, gamma: f64) -> Self {
        OlsenParams {
            delta0,
            delta: DVector::zeros(p),
            gamma,
        }
    }

    pub fn p(&self) -> usize {
        self.delta.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta0.is_finite() && self.gamma.is_finite())
            || self.delta.iter().any(|v| !v.is_finite())
        {
            return Err(Error::invalid("non-finite parameter"));
        }
        if self.gamma <= 0.0 {
            return Err(Error::invalid(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Flattened `(delta0, delta_1..delta_p, gamma)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.p() + 2);
        v.push(self.delta0);
        v.extend(self.delta.iter());
        v.push(self.gamma);
        v
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() < 2 {
            return Err(Error::ShapeMismatch(
                "parameter vector needs at least 2 entries".into(),
            ));
        }
        let p = v.len() - 2;
        OlsenParams::new(v[0], DVector::from_column_slice(&v[1..=p]), v[p + 1])
    }

    /// Indices `j` (0-based slope index) with `delta_j != 0`.
    pub fn support(&self) -> Vec<usize> {
        self.delta
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn to_natural(&self) -> Result<NaturalParams> {
        to_natural(self)
    }
}

impl NaturalParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::invalid(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }

    pub fn support(&self) -> Vec<usize> {
        self.beta
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, _)| j)
            .collect()
    }
}

pub fn to_natural(theta: &OlsenParams) -> Result<NaturalParams> {
    theta.validate()?;
    let sigma = 1.0 / theta.gamma;
    Ok(NaturalParams {
        beta0: theta.delta0 / theta.gamma,
        beta: theta.delta.iter().map(|d| d / theta.gamma).collect(),
        sigma,
    })
}

pub fn from_natural(np: &NaturalParams) -> Result<OlsenParams> {
    np.validate()?;
    let gamma = 1.0 / np.sigma;
    OlsenParams::new(
        np.beta0 / np.sigma,
        DVector::from_iterator(np.beta.len(), np.beta.iter().map(|b| b / np.sigma)),
        gamma,
    )
}
