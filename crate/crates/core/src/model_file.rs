//! Self-describing JSON model files.
//!
//! Floats are written in shortest round-trip form and parsed exactly, so
//! write, read, write reproduces the same bytes.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::Standardization;
use crate::error::{Error, Result};
use crate::gcd::FitResult;
use crate::params::NaturalParams;
use crate::penalty::PenaltyFamily;
use crate::predict::{predict, PredictMode};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Tobit,
    LeastSquares,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub objective: f64,
    pub kkt_residual: f64,
    pub cycles: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub model: ModelKind,
    pub family: PenaltyFamily,
    pub lambda: f64,
    /// Concavity parameter for SCAD and MCP.
    pub a: Option<f64>,
    pub response: String,
    pub column_names: Vec<String>,
    /// Natural-scale coefficients for the raw columns; `beta0` is relative
    /// to the shifted response.
    pub beta0: f64,
    pub beta: Vec<f64>,
    pub sigma: f64,
    pub censor_shift: f64,
    pub standardization: Standardization,
    pub diagnostics: FitDiagnostics,
}

impl ModelFile {
    #[allow(clippy::too_many_arguments)]
    pub fn from_fit(
        fit: &FitResult,
        model: ModelKind,
        family: PenaltyFamily,
        a: Option<f64>,
        response: &str,
        column_names: &[String],
        censor_shift: f64,
    ) -> Result<Self> {
        let file = ModelFile {
            schema_version: SCHEMA_VERSION,
            model,
            family,
            lambda: fit.lambda,
            a,
            response: response.to_string(),
            column_names: column_names.to_vec(),
            beta0: fit.natural.beta0,
            beta: fit.natural.beta.clone(),
            sigma: fit.natural.sigma,
            censor_shift,
            standardization: fit.standardization.clone(),
            diagnostics: FitDiagnostics {
                objective: fit.objective,
                kkt_residual: fit.kkt_residual,
                cycles: fit.cycles_used,
                converged: fit.converged,
            },
        };
        file.validate()?;
        Ok(file)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::ModelFile(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let p = self.beta.len();
        if self.column_names.len() != p
            || self.standardization.means.len() != p
            || self.standardization.scales.len() != p
        {
            return Err(Error::ModelFile(format!(
                "{p} coefficients but {} column names and {} standardization entries",
                self.column_names.len(),
                self.standardization.means.len()
            )));
        }
        let finite = [self.lambda, self.beta0, self.sigma, self.censor_shift]
            .iter()
            .chain(&self.beta)
            .chain(self.a.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::ModelFile("model values must be finite".into()));
        }
        self.natural()
            .validate()
            .map_err(|e| Error::ModelFile(e.to_string()))
    }

    pub fn natural(&self) -> NaturalParams {
        NaturalParams {
            beta0: self.beta0,
            beta: self.beta.clone(),
            sigma: self.sigma,
        }
    }

    /// Predictions on the raw response scale. Least-squares models are
    /// linear and ignore `mode`.
    pub fn predict(&self, x: &DMatrix<f64>, mode: PredictMode) -> Result<nalgebra::DVector<f64>> {
        let mode = match self.model {
            ModelKind::Tobit => mode,
            ModelKind::LeastSquares => PredictMode::Latent,
        };
        predict(&self.natural(), x, mode, self.censor_shift)
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        let mut s =
            serde_json::to_string_pretty(self).map_err(|e| Error::ModelFile(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(s).map_err(|e| Error::ModelFile(e.to_string()))?;
        file.validate()?;
        Ok(file)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)
            .map_err(|e| Error::ModelFile(format!("{}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::ModelFile(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }
}
