use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "rho")]
pub enum Covariance {
    Independent,
    /// Compound symmetry: unit diagonal, `rho` elsewhere.
    Cs(f64),
    /// `Sigma_ij = rho^|i - j|`.
    Ar1(f64),
}

impl std::fmt::Display for Covariance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Covariance::Independent => write!(f, "independent"),
            Covariance::Cs(r) => write!(f, "cs({r})"),
            Covariance::Ar1(r) => write!(f, "ar1({r})"),
        }
    }
}

pub fn build_covariance(kind: Covariance, p: usize) -> Result<DMatrix<f64>> {
    let sigma = match kind {
        Covariance::Independent => DMatrix::identity(p, p),
        Covariance::Cs(rho) => {
            let lower = if p > 1 { -1.0 / (p as f64 - 1.0) } else { -1.0 };
            if !(rho < 1.0 && rho > lower) {
                return Err(Error::invalid(format!(
                    "cs({rho}) is not positive definite for p = {p}"
                )));
            }
            DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { rho })
        }
        Covariance::Ar1(rho) => {
            if !(rho.abs() < 1.0) {
                return Err(Error::invalid(format!("ar1 requires |rho| < 1, got {rho}")));
            }
            DMatrix::from_fn(p, p, |i, j| rho.powi(i.abs_diff(j) as i32))
        }
    };
    if sigma.clone().cholesky().is_none() {
        return Err(Error::invalid(format!(
            "{kind} covariance is not positive definite"
        )));
    }
    Ok(sigma)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimDesign {
    pub n_train: usize,
    pub n_test: usize,
    pub p: usize,
    pub covariance: Covariance,
    /// Target censored fraction.
    pub q: f64,
    pub beta0: f64,
    pub beta: Vec<f64>,
    pub sigma: f64,
    pub replications: usize,
    pub seed: u64,
}

impl SimDesign {
    /// The five-coefficient signal followed by `p - 5` zeros (truncated
    /// when `p < 5`).
    pub fn default_beta(p: usize) -> Vec<f64> {
        let mut beta = vec![0.0; p];
        for (b, v) in beta.iter_mut().zip([5.0, 1.0, 0.5, -2.0, 0.1]) {
            *b = v;
        }
        beta
    }

    /// Covariance of the numbered benchmark design (1 to 5).
    pub fn table_covariance(table: usize) -> Result<Covariance> {
        Ok(match table {
            1 => Covariance::Independent,
            2 => Covariance::Cs(0.5),
            3 => Covariance::Cs(0.8),
            4 => Covariance::Ar1(0.5),
            5 => Covariance::Ar1(0.8),
            _ => return Err(Error::invalid(format!("unknown design table{table}"))),
        })
    }

    /// Benchmark design: 100 training and 5000 test rows, `beta0 = 3`,
    /// `sigma = 1`.
    pub fn table(table: usize, q: f64, p: usize, replications: usize, seed: u64) -> Result<Self> {
        if p < 5 {
            return Err(Error::invalid(format!(
                "the benchmark signal needs p >= 5, got {p}"
            )));
        }
        let design = SimDesign {
            n_train: 100,
            n_test: 5000,
            p,
            covariance: Self::table_covariance(table)?,
            q,
            beta0: 3.0,
            beta: Self::default_beta(p),
            sigma: 1.0,
            replications,
            seed,
        };
        design.validate()?;
        Ok(design)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::invalid(format!(
                "censored fraction must be in (0, 1), got {}",
                self.q
            )));
        }
        if self.beta.len() != self.p {
            return Err(Error::ShapeMismatch(format!(
                "beta has {} entries for p = {}",
                self.beta.len(),
                self.p
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("sigma must be positive"));
        }
        if self.n_train < 2 || self.n_test < 1 {
            return Err(Error::invalid(
                "need at least 2 training rows and 1 test row",
            ));
        }
        if self.replications == 0 {
            return Err(Error::invalid("replications must be at least 1"));
        }
        if self
            .beta
            .iter()
            .chain([&self.beta0])
            .any(|v| !v.is_finite())
        {
            return Err(Error::invalid("coefficients must be finite"));
        }
        build_covariance(self.covariance, self.p)?;
        Ok(())
    }

    /// Indices of the nonzero true slopes.
    pub fn true_support(&self) -> Vec<usize> {
        self.beta
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(j, _)| j)
            .collect()
    }
}
