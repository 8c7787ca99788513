//! Penalized Tobit regression for left-censored responses.
//!
//! The Tobit negative log-likelihood is fit on the convex scale
//! `delta = beta / sigma`, `gamma = 1 / sigma`, where it admits a unit
//! quadratic majorizer per standardized coordinate. That gives a
//! soft-thresholding coordinate descent for (weighted) lasso penalties
//! ([`gcd`]), and a local linear approximation wrapper for SCAD and MCP
//! ([`lla`]). [`sim`] holds the synthetic-data experiment harness.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod diagnostics;
pub mod error;
pub mod gcd;
pub mod lla;
pub mod loss;
pub mod ls;
pub mod model_file;
pub mod params;
pub mod penalty;
pub mod predict;
pub mod sim;
pub mod special;

pub use data::{destandardize_params, standardize, Dataset, Standardization};
pub use error::{Error, Result};
pub use gcd::{
    fit_lasso, fit_path, fit_path_at, fit_weighted_lasso, lambda_max, soft_threshold, FitResult,
    GcdState, PathOptions, PathResult, SolverConfig,
};
pub use lla::{fit_folded_concave, fit_oracle, LlaConfig, LlaFit, LlaInit};
pub use loss::{gradient, hessian, neg_loglik};
pub use params::{from_natural, to_natural, NaturalParams, OlsenParams};
pub use penalty::{lla_weights, penalty_deriv, penalty_value, PenaltyFamily, PenaltySpec};
pub use predict::{predict, PredictMode};
pub use special::{hazard_h, mills_g};
