//! Synthetic censored-regression experiments: data generation, quantile
//! censoring, K-fold cross-validation, metrics and the replication driver.

mod cv;
mod design;
mod experiment;
mod generate;
mod metrics;

pub use cv::{
    fit_method, fit_method_path, kfold_cv, kfold_cv_with_folds, lambda_sequence, stratified_folds,
    CvOptions, CvResult, Method,
};
pub use design::{build_covariance, Covariance, SimDesign};
pub use experiment::{
    run_experiment, run_replication, ExperimentConfig, ExperimentTable, MethodKind,
    ReplicationResult, SummaryRow, Tuning,
};
pub use generate::{gen_dataset, rep_rng, RngPurpose, SimData};
pub use metrics::{evaluate, Metrics};
