use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use super::design::{build_covariance, Covariance, SimDesign};
use crate::data::Dataset;
use crate::error::Result;
use crate::params::NaturalParams;

/// Independent random streams drawn from one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RngPurpose {
    Data = 0,
    Folds = 1,
}

/// Generator for replication `rep`: the design seed picks the key and
/// `(purpose, rep)` picks the stream, so replications never share draws and
/// can be produced in any order.
pub fn rep_rng(seed: u64, rep: usize, purpose: RngPurpose) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 32) | rep as u64);
    rng
}

#[derive(Debug, Clone)]
pub struct SimData {
    pub train: Dataset,
    pub test: Dataset,
    /// True parameters on the raw response scale.
    pub truth: NaturalParams,
    /// Censoring threshold, the pooled empirical `q`-quantile of `y*`.
    pub c_q: f64,
}

fn draw_design(
    rng: &mut ChaCha20Rng,
    n: usize,
    p: usize,
    factor: Option<&DMatrix<f64>>,
) -> DMatrix<f64> {
    // row-major draws so a row's entries are consecutive in the stream
    let z = DMatrix::from_row_iterator(n, p, (0..n * p).map(|_| StandardNormal.sample(rng)));
    match factor {
        Some(l) => z * l.transpose(),
        None => z,
    }
}

/// Type-1 empirical quantile: the smallest order statistic whose empirical
/// CDF reaches `q`.
fn empirical_quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

pub fn gen_dataset(design: &SimDesign, rep: usize) -> Result<SimData> {
    design.validate()?;
    let p = design.p;
    let factor = match design.covariance {
        Covariance::Independent => None,
        kind => Some(
            build_covariance(kind, p)?
                .cholesky()
                .expect("validated covariance is positive definite")
                .unpack(),
        ),
    };
    let mut rng = rep_rng(design.seed, rep, RngPurpose::Data);
    let beta = DVector::from_column_slice(&design.beta);
    let mut split = |n: usize| {
        let x = draw_design(&mut rng, n, p, factor.as_ref());
        let eps: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let signal = &x * &beta;
        let y: Vec<f64> = (0..n)
            .map(|i| design.beta0 + signal[i] + design.sigma * eps[i])
            .collect();
        (x, y)
    };
    let (x_train, y_train) = split(design.n_train);
    let (x_test, y_test) = split(design.n_test);

    let pooled: Vec<f64> = y_train.iter().chain(&y_test).copied().collect();
    let c_q = empirical_quantile(&pooled, design.q);
    let censor = |y: Vec<f64>| -> Vec<f64> { y.into_iter().map(|v| v.max(c_q)).collect() };
    let train = Dataset::new(x_train, &censor(y_train), c_q)?;
    let test = Dataset::new(x_test, &censor(y_test), c_q)?;
    Ok(SimData {
        train,
        test,
        truth: NaturalParams {
            beta0: design.beta0,
            beta: design.beta.clone(),
            sigma: design.sigma,
        },
        c_q,
    })
}
