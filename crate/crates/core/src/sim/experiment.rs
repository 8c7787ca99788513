use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{fit_method, kfold_cv, CvOptions, Method};
use super::design::SimDesign;
use super::generate::{gen_dataset, SimData};
use super::metrics::{evaluate, Metrics};
use crate::error::{Error, Result};
use crate::ls::ols;
use crate::predict::PredictMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    TobitLasso,
    TobitScad,
    LsLasso,
    LsScad,
    /// Least squares on the true support.
    OlsOracle,
    Ols,
}

impl MethodKind {
    pub const ALL: [MethodKind; 6] = [
        MethodKind::TobitLasso,
        MethodKind::TobitScad,
        MethodKind::LsLasso,
        MethodKind::LsScad,
        MethodKind::OlsOracle,
        MethodKind::Ols,
    ];

    fn penalized(self) -> Option<Method> {
        match self {
            MethodKind::TobitLasso => Some(Method::TobitLasso),
            MethodKind::TobitScad => Some(Method::TobitScad),
            MethodKind::LsLasso => Some(Method::LsLasso),
            MethodKind::LsScad => Some(Method::LsScad),
            MethodKind::OlsOracle | MethodKind::Ols => None,
        }
    }
}

impl std::str::FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ols_oracle" => Ok(MethodKind::OlsOracle),
            "ols" => Ok(MethodKind::Ols),
            other => Ok(match other.parse::<Method>()? {
                Method::TobitLasso => MethodKind::TobitLasso,
                Method::TobitScad => MethodKind::TobitScad,
                Method::LsLasso => MethodKind::LsLasso,
                Method::LsScad => MethodKind::LsScad,
            }),
        }
    }
}

impl std::fmt::Display for MethodKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.penalized() {
            Some(m) => m.fmt(f),
            None if *self == MethodKind::Ols => f.write_str("ols"),
            None => f.write_str("ols_oracle"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tuning {
    /// K-fold cross-validation with `CvOptions::k` folds.
    Cv,
    /// The same `lambda` for every replication.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub design: SimDesign,
    pub methods: Vec<MethodKind>,
    pub tuning: Tuning,
    /// Solver and CV settings; `seed` is ignored in favor of per-replication
    /// streams derived from the design seed.
    pub cv: CvOptions,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(design: SimDesign, methods: Vec<MethodKind>) -> Self {
        ExperimentConfig {
            design,
            methods,
            tuning: Tuning::Cv,
            cv: CvOptions::default(),
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.design.validate()?;
        if self.methods.is_empty() {
            return Err(Error::invalid("no methods requested"));
        }
        let d = &self.design;
        if self.methods.contains(&MethodKind::Ols) && d.p + 1 >= d.n_train {
            return Err(Error::invalid(format!(
                "ols needs p < n - 1 (p = {}, n_train = {})",
                d.p, d.n_train
            )));
        }
        if let Tuning::Fixed(l) = self.tuning {
            if !(l >= 0.0) {
                return Err(Error::invalid("fixed lambda must be >= 0"));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("threads must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub rep: usize,
    /// Metrics per requested method, in request order.
    pub metrics: Vec<Metrics>,
    /// Selected `lambda` per method (`NaN` for least squares).
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub metric: String,
    pub mean: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentTable {
    pub methods: Vec<MethodKind>,
    pub rows: Vec<SummaryRow>,
    pub replications: Vec<ReplicationResult>,
}

impl ExperimentTable {
    pub fn get(&self, method: MethodKind, metric: &str) -> Option<&SummaryRow> {
        let name = method.to_string();
        self.rows
            .iter()
            .find(|r| r.method == name && r.metric == metric)
    }

    /// `method,metric,mean,se` with shortest round-trip float formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,metric,mean,se\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", r.method, r.metric, r.mean, r.se);
        }
        out
    }

    /// One line per method, `mean(se)` per metric.
    pub fn to_pretty(&self) -> String {
        let mut out = format!("{:<12}", "method");
        for m in Metrics::NAMES {
            let _ = write!(out, " {:>16}", m);
        }
        out.push('\n');
        for method in &self.methods {
            let _ = write!(out, "{:<12}", method.to_string());
            for m in Metrics::NAMES {
                let r = self.get(*method, m).expect("every metric is summarized");
                let _ = write!(out, " {:>16}", format!("{:.3}({:.3})", r.mean, r.se));
            }
            out.push('\n');
        }
        out
    }
}

fn fit_one(
    sim: &SimData,
    design: &SimDesign,
    kind: MethodKind,
    config: &ExperimentConfig,
    rep: usize,
) -> Result<(Metrics, f64)> {
    let truth = &sim.truth;
    match kind.penalized() {
        Some(method) => {
            let mut cv = config.cv.clone();
            cv.seed = design.seed ^ (rep as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let lambda = match config.tuning {
                Tuning::Fixed(l) => l,
                Tuning::Cv => kfold_cv(&sim.train, method, &cv)?.best_lambda,
            };
            let fit = fit_method(&sim.train, method, lambda, &cv)?;
            let mode = if method.is_tobit() {
                cv.predict_mode
            } else {
                PredictMode::Latent
            };
            let m = evaluate(&fit.natural, &sim.test, truth, &fit.support(), mode)?;
            Ok((m, lambda))
        }
        None => {
            let support = design.true_support();
            let (np, selection) = if kind == MethodKind::Ols {
                (ols(&sim.train, None)?, (0..design.p).collect::<Vec<_>>())
            } else {
                (ols(&sim.train, Some(&support))?, support)
            };
            Ok((
                evaluate(&np, &sim.test, truth, &selection, PredictMode::Latent)?,
                f64::NAN,
            ))
        }
    }
}

/// One replication: generate data, tune and fit each method, score it.
pub fn run_replication(config: &ExperimentConfig, rep: usize) -> Result<ReplicationResult> {
    let design = &config.design;
    let sim = gen_dataset(design, rep)?;
    let mut metrics = Vec::with_capacity(config.methods.len());
    let mut lambdas = Vec::with_capacity(config.methods.len());
    for &kind in &config.methods {
        let (m, l) = fit_one(&sim, design, kind, config, rep)?;
        metrics.push(m);
        lambdas.push(l);
    }
    Ok(ReplicationResult {
        rep,
        metrics,
        lambdas,
    })
}

fn summarize(methods: &[MethodKind], reps: &[ReplicationResult]) -> Vec<SummaryRow> {
    let r = reps.len() as f64;
    let mut rows = Vec::new();
    for (mi, method) in methods.iter().enumerate() {
        for (k, name) in Metrics::NAMES.iter().enumerate() {
            let vals: Vec<f64> = reps.iter().map(|rep| rep.metrics[mi].values()[k]).collect();
            let mean = vals.iter().sum::<f64>() / r;
            let se = if reps.len() > 1 {
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
                (var / r).sqrt()
            } else {
                0.0
            };
            rows.push(SummaryRow {
                method: method.to_string(),
                metric: name.to_string(),
                mean,
                se,
            });
        }
    }
    rows
}

/// Runs every replication (in parallel) and reduces them in replication
/// order, so the table depends only on the configuration.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentTable> {
    config.validate()?;
    let run = || -> Result<Vec<ReplicationResult>> {
        (0..config.design.replications)
            .into_par_iter()
            .map(|rep| run_replication(config, rep))
            .collect()
    };
    let replications = match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    Ok(ExperimentTable {
        rows: summarize(&config.methods, &replications),
        methods: config.methods.clone(),
        replications,
    })
}
