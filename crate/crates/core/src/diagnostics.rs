//! Numerical self-checks: derivative consistency, the per-coordinate
//! majorization bound, and bounds on the Mills-ratio functions.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{standardize, Dataset};
use crate::loss::{gradient, hessian, neg_loglik};
use crate::params::OlsenParams;
use crate::special::{hazard_h, mills_g, mills_g_second_derivative, sqrt_2_over_pi};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    /// Largest observed violation measure (meaning depends on the check).
    pub worst: f64,
    pub detail: String,
}

/// `|a - b| / max(|a|, |b|, 1)`
fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// A random standardized instance with mixed censoring and a random
/// parameter point.
pub fn random_instance(
    rng: &mut ChaCha20Rng,
    max_n: usize,
    max_p: usize,
) -> (Dataset, OlsenParams) {
    loop {
        let n = rng.random_range(5..=max_n);
        let p = rng.random_range(1..=max_p);
        let x = DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(rng));
        let beta: Vec<f64> = (0..p).map(|_| rng.random_range(-2.0..2.0)).collect();
        let shift: f64 = rng.random_range(-1.0..1.0);
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let s: f64 = (0..p).map(|j| x[(i, j)] * beta[j]).sum();
                let e: f64 = StandardNormal.sample(rng);
                (shift + s + e).max(0.0)
            })
            .collect();
        let Ok(data) = Dataset::new(x, &y, 0.0) else {
            continue;
        };
        if data.n_uncensored() == data.n() || data.n_uncensored() < 2 {
            continue;
        }
        let Ok((std, _)) = standardize(&data) else {
            continue;
        };
        let theta = OlsenParams {
            delta0: rng.random_range(-1.5..1.5),
            delta: DVector::from_fn(p, |_, _| rng.random_range(-1.5..1.5)),
            gamma: rng.random_range(0.3..3.0),
        };
        return (std, theta);
    }
}

fn bump(theta: &OlsenParams, k: usize, h: f64) -> OlsenParams {
    let mut v = theta.to_vec();
    v[k] += h;
    OlsenParams::from_slice(&v).expect("bumped parameters stay valid")
}

/// Gradient against central differences of the loss, Hessian against
/// central differences of the gradient.
pub fn derivative_check(instances: usize, seed: u64) -> [CheckReport; 2] {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let h = 1e-5;
    let (mut g_worst, mut h_worst) = (0.0_f64, 0.0_f64);
    for _ in 0..instances {
        let (data, theta) = random_instance(&mut rng, 50, 8);
        let g = gradient(&theta, &data).expect("valid instance");
        let hess = hessian(&theta, &data).expect("valid instance");
        for k in 0..theta.p() + 2 {
            let up = bump(&theta, k, h);
            let dn = bump(&theta, k, -h);
            let fd =
                (neg_loglik(&up, &data).unwrap() - neg_loglik(&dn, &data).unwrap()) / (2.0 * h);
            g_worst = g_worst.max(rel_err(g[k], fd));
            let col = (gradient(&up, &data).unwrap() - gradient(&dn, &data).unwrap()) / (2.0 * h);
            for r in 0..theta.p() + 2 {
                h_worst = h_worst.max(rel_err(hess[(r, k)], col[r]));
            }
        }
    }
    [
        CheckReport {
            name: "gradient vs finite differences",
            passed: g_worst <= 1e-6,
            worst: g_worst,
            detail: format!("{instances} instances, max relative error {g_worst:.3e} (limit 1e-6)"),
        },
        CheckReport {
            name: "hessian vs finite differences",
            passed: h_worst <= 1e-5,
            worst: h_worst,
            detail: format!("{instances} instances, max relative error {h_worst:.3e} (limit 1e-5)"),
        },
    ]
}

/// `l(delta_j + a) <= l(delta_j) + l'(delta_j) a + a^2 / 2` on standardized
/// data.
pub fn majorization_check(tuples: usize, seed: u64) -> CheckReport {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..tuples {
        let (data, theta) = random_instance(&mut rng, 40, 6);
        let j = rng.random_range(0..theta.p());
        let a: f64 = rng.random_range(-3.0..3.0);
        let base = neg_loglik(&theta, &data).unwrap();
        let slope = gradient(&theta, &data).unwrap()[j + 1];
        let moved = bump(&theta, j + 1, a);
        let excess = neg_loglik(&moved, &data).unwrap() - (base + slope * a + 0.5 * a * a);
        worst = worst.max(excess);
    }
    CheckReport {
        name: "unit-curvature majorization",
        passed: worst <= 1e-9,
        worst,
        detail: format!("{tuples} tuples, largest excess over the bound {worst:.3e} (limit 1e-9)"),
    }
}

fn grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
}

/// `0 < h(s) < 1` over `[-400, 37]`, where `h` is representable.
pub fn hazard_sweep(points: usize) -> CheckReport {
    let bad = grid(-400.0, 37.0, points).filter(|&s| {
        let h = hazard_h(s);
        !(h > 0.0 && h < 1.0)
    });
    let count = bad.count();
    CheckReport {
        name: "0 < h(s) < 1",
        passed: count == 0,
        worst: count as f64,
        detail: format!("{points} points on [-400, 37], {count} violations"),
    }
}

/// `|g''(s)| < 4.3` over `[-400, 40]`.
pub fn second_derivative_sweep(points: usize) -> CheckReport {
    let worst = grid(-400.0, 40.0, points)
        .map(|s| mills_g_second_derivative(s).abs())
        .fold(0.0, f64::max);
    CheckReport {
        name: "|g''(s)| < 4.3",
        passed: worst < 4.3,
        worst,
        detail: format!("{points} points on [-400, 40], max |g''| = {worst:.6}"),
    }
}

/// `g(-s) <= s + sqrt(2/pi)` over `[0, 100]`.
pub fn kesavan_sweep(points: usize) -> CheckReport {
    let c = sqrt_2_over_pi();
    let worst = grid(0.0, 100.0, points)
        .map(|s| mills_g(-s) - (s + c))
        .fold(f64::NEG_INFINITY, f64::max);
    CheckReport {
        name: "g(-s) <= s + sqrt(2/pi)",
        passed: worst <= 1e-12,
        worst,
        detail: format!("{points} points on [0, 100], max excess {worst:.3e}"),
    }
}

/// Every check at its default size.
pub fn run_all(seed: u64) -> Vec<CheckReport> {
    let mut out: Vec<CheckReport> = derivative_check(100, seed).into();
    out.push(majorization_check(1000, seed.wrapping_add(1)));
    out.push(hazard_sweep(100_000));
    out.push(second_derivative_sweep(100_000));
    out.push(kesavan_sweep(100_000));
    out
}
