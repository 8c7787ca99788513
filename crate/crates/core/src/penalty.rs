//! Penalty families and the local-linear-approximation weight map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PenaltyFamily {
    Lasso,
    WeightedLasso,
    Scad,
    Mcp,
}

impl PenaltyFamily {
    pub fn is_folded_concave(self) -> bool {
        matches!(self, PenaltyFamily::Scad | PenaltyFamily::Mcp)
    }

    /// Concavity parameter used when none is given.
    pub fn default_a(self) -> f64 {
        3.0
    }
}

impl std::str::FromStr for PenaltyFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lasso" => Ok(PenaltyFamily::Lasso),
            "weighted-lasso" | "weighted_lasso" => Ok(PenaltyFamily::WeightedLasso),
            "scad" => Ok(PenaltyFamily::Scad),
            "mcp" => Ok(PenaltyFamily::Mcp),
            other => Err(Error::invalid(format!("unknown penalty family '{other}'"))),
        }
    }
}

impl std::fmt::Display for PenaltyFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PenaltyFamily::Lasso => "lasso",
            PenaltyFamily::WeightedLasso => "weighted-lasso",
            PenaltyFamily::Scad => "scad",
            PenaltyFamily::Mcp => "mcp",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySpec {
    pub family: PenaltyFamily,
    pub lambda: f64,
    /// Concavity parameter; ignored by the lasso families.
    pub a: f64,
    /// Per-coordinate weights for the weighted lasso.
    pub weights: Option<Vec<f64>>,
}

impl PenaltySpec {
    pub fn lasso(lambda: f64) -> Result<Self> {
        Self::build(PenaltyFamily::Lasso, lambda, f64::NAN, None)
    }

    pub fn weighted_lasso(lambda: f64, weights: Vec<f64>) -> Result<Self> {
        Self::build(
            PenaltyFamily::WeightedLasso,
            lambda,
            f64::NAN,
            Some(weights),
        )
    }

    pub fn scad(lambda: f64, a: f64) -> Result<Self> {
        Self::build(PenaltyFamily::Scad, lambda, a, None)
    }

    pub fn mcp(lambda: f64, a: f64) -> Result<Self> {
        Self::build(PenaltyFamily::Mcp, lambda, a, None)
    }

    pub fn build(
        family: PenaltyFamily,
        lambda: f64,
        a: f64,
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        let spec = PenaltySpec {
            family,
            lambda,
            a,
            weights,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Same family and shape parameters at a different `lambda`.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::build(self.family, lambda, self.a, self.weights.clone())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || self.lambda.is_nan() {
            return Err(Error::invalid(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        match self.family {
            PenaltyFamily::Scad if !(self.a > 2.0) => {
                return Err(Error::invalid(format!(
                    "SCAD requires a > 2, got {}",
                    self.a
                )))
            }
            PenaltyFamily::Mcp if !(self.a > 1.0) => {
                return Err(Error::invalid(format!(
                    "MCP requires a > 1, got {}",
                    self.a
                )))
            }
            _ => {}
        }
        match (&self.weights, self.family) {
            (Some(w), PenaltyFamily::WeightedLasso) => {
                if w.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                    return Err(Error::invalid("weights must be finite and >= 0"));
                }
            }
            (None, PenaltyFamily::WeightedLasso) => {
                return Err(Error::invalid("weighted lasso requires weights"))
            }
            (Some(_), _) => {
                return Err(Error::invalid(
                    "weights are only used by the weighted lasso",
                ))
            }
            (None, _) => {}
        }
        Ok(())
    }

    /// Multiplier applied to `lambda` for slope `j` in a lasso-type solve.
    pub fn coordinate_weight(&self, j: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[j])
    }

    /// Lasso-type weight vector of length `p` (all ones unless weighted).
    pub fn lasso_weights(&self, p: usize) -> Result<Vec<f64>> {
        match &self.weights {
            Some(w) if w.len() != p => Err(Error::ShapeMismatch(format!(
                "{} penalty weights for {p} coefficients",
                w.len()
            ))),
            Some(w) => Ok(w.clone()),
            None => Ok(vec![1.0; p]),
        }
    }

    /// Sum over slopes of `P_lambda(|delta_j|)`.
    pub fn total(&self, delta: &[f64]) -> Result<f64> {
        let mut sum = 0.0;
        for (j, v) in delta.iter().enumerate() {
            let w = if self.family == PenaltyFamily::WeightedLasso {
                self.weights
                    .as_ref()
                    .and_then(|w| w.get(j))
                    .copied()
                    .ok_or_else(|| {
                        Error::ShapeMismatch(
                            "penalty weights shorter than coefficient vector".into(),
                        )
                    })?
            } else {
                1.0
            };
            sum += w * penalty_value(self, v.abs())?;
        }
        Ok(sum)
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        return Err(Error::invalid(format!(
            "penalty argument must be >= 0, got {t}"
        )));
    }
    Ok(())
}

/// `P'_lambda(t)` for `t >= 0` (unweighted).
pub fn penalty_deriv(spec: &PenaltySpec, t: f64) -> Result<f64> {
    check_t(t)?;
    let (lam, a) = (spec.lambda, spec.a);
    Ok(match spec.family {
        PenaltyFamily::Lasso | PenaltyFamily::WeightedLasso => lam,
        PenaltyFamily::Scad => {
            if t <= lam {
                lam
            } else {
                (a * lam - t).max(0.0) / (a - 1.0)
            }
        }
        PenaltyFamily::Mcp => (lam - t / a).max(0.0),
    })
}

/// `P_lambda(t)` for `t >= 0` (unweighted), in closed form.
pub fn penalty_value(spec: &PenaltySpec, t: f64) -> Result<f64> {
    check_t(t)?;
    let (lam, a) = (spec.lambda, spec.a);
    Ok(match spec.family {
        PenaltyFamily::Lasso | PenaltyFamily::WeightedLasso => lam * t,
        PenaltyFamily::Scad => {
            if t <= lam {
                lam * t
            } else if t <= a * lam {
                (2.0 * a * lam * t - t * t - lam * lam) / (2.0 * (a - 1.0))
            } else {
                (a + 1.0) * lam * lam / 2.0
            }
        }
        PenaltyFamily::Mcp => {
            if t <= a * lam {
                lam * t - t * t / (2.0 * a)
            } else {
                a * lam * lam / 2.0
            }
        }
    })
}

/// `w_j = P'_lambda(|delta_j|)`.
pub fn lla_weights(spec: &PenaltySpec, delta: &[f64]) -> Result<Vec<f64>> {
    if !spec.family.is_folded_concave() {
        return Err(Error::invalid(format!(
            "no adaptive weight update is defined for the {} penalty",
            spec.family
        )));
    }
    delta.iter().map(|d| penalty_deriv(spec, d.abs())).collect()
}
