//! Helpers shared by the integration tests, including oracles that avoid the
//! crate's own special functions and solvers.

#![allow(dead_code)]

use censreg::{Dataset, OlsenParams};
use nalgebra::{DMatrix, DVector};
use statrs::function::erf::erfc;

/// `ln Phi(-eta)` through statrs' `erfc`.
fn log_phi_neg(eta: f64) -> f64 {
    (0.5 * erfc(eta / std::f64::consts::SQRT_2)).ln()
}

/// `phi(eta) / Phi(-eta)`.
fn ratio_neg(eta: f64) -> f64 {
    let pdf = (-0.5 * eta * eta).exp() / (2.0 * std::f64::consts::PI).sqrt();
    pdf / (0.5 * erfc(eta / std::f64::consts::SQRT_2))
}

/// Tobit loss and gradient written out directly from the likelihood, over
/// `v = (delta0, delta, gamma)`.
pub fn oracle_loss_grad(data: &Dataset, v: &[f64]) -> (f64, Vec<f64>) {
    let n = data.n();
    let p = data.p();
    let gamma = v[p + 1];
    let mut f = 0.0;
    let mut g = vec![0.0; p + 2];
    for i in 0..n {
        let xi = data.x().row(i);
        let eta = v[0] + (0..p).map(|j| xi[j] * v[j + 1]).sum::<f64>();
        let y = data.y()[i];
        let (u, dgamma) = if data.uncensored()[i] {
            let r = gamma * y - eta;
            f += 0.5 * r * r - gamma.ln();
            (-r, r * y - 1.0 / gamma)
        } else {
            f -= log_phi_neg(eta);
            (ratio_neg(eta), 0.0)
        };
        g[0] += u;
        for j in 0..p {
            g[j + 1] += u * xi[j];
        }
        g[p + 1] += dgamma;
    }
    let nf = n as f64;
    (f / nf, g.into_iter().map(|v| v / nf).collect())
}

fn penalty(v: &[f64], lambda: f64, weights: &[f64]) -> f64 {
    weights
        .iter()
        .enumerate()
        .map(|(j, w)| lambda * w * v[j + 1].abs())
        .sum()
}

fn prox(v: &[f64], step: f64, lambda: f64, weights: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    for (j, w) in weights.iter().enumerate() {
        let t = step * lambda * w;
        let z = v[j + 1];
        out[j + 1] = z.signum() * (z.abs() - t).max(0.0);
    }
    out
}

/// Hessian of [`oracle_loss_grad`], from `d/d eta [phi / Phi(-eta)] = r (r - eta)`.
pub fn oracle_hessian(data: &Dataset, v: &[f64]) -> DMatrix<f64> {
    let n = data.n();
    let p = data.p();
    let gamma = v[p + 1];
    let mut h = DMatrix::zeros(p + 2, p + 2);
    let mut z = vec![0.0; p + 2];
    for i in 0..n {
        let xi = data.x().row(i);
        z[0] = 1.0;
        for j in 0..p {
            z[j + 1] = xi[j];
        }
        let eta = v[0] + (0..p).map(|j| xi[j] * v[j + 1]).sum::<f64>();
        if data.uncensored()[i] {
            let y = data.y()[i];
            for a in 0..=p {
                for b in 0..=p {
                    h[(a, b)] += z[a] * z[b];
                }
                h[(a, p + 1)] -= y * z[a];
                h[(p + 1, a)] -= y * z[a];
            }
            h[(p + 1, p + 1)] += y * y + 1.0 / (gamma * gamma);
        } else {
            let r = ratio_neg(eta);
            let w = r * (r - eta);
            for a in 0..=p {
                for b in 0..=p {
                    h[(a, b)] += w * z[a] * z[b];
                }
            }
        }
    }
    h / n as f64
}

fn objective(data: &Dataset, v: &[f64], lambda: f64, weights: &[f64]) -> f64 {
    if v[v.len() - 1] <= 0.0 {
        return f64::INFINITY;
    }
    let f = oracle_loss_grad(data, v).0 + penalty(v, lambda, weights);
    if f.is_finite() {
        f
    } else {
        f64::INFINITY
    }
}

/// Accelerated proximal gradient with backtracking and adaptive restart,
/// until successive iterates differ by less than `tol` in every coordinate.
fn proximal_gradient(
    data: &Dataset,
    lambda: f64,
    weights: &[f64],
    start: &[f64],
    tol: f64,
    max_iter: usize,
) -> Vec<f64> {
    let obj = |v: &[f64]| objective(data, v, lambda, weights);
    let mut x = start.to_vec();
    let mut y = x.clone();
    let mut fx = obj(&x);
    let mut t_mom = 1.0_f64;
    let mut step = 1.0_f64;
    for _ in 0..max_iter {
        let (fy, gy) = oracle_loss_grad(data, &y);
        let next = loop {
            let trial: Vec<f64> = y.iter().zip(&gy).map(|(a, g)| a - step * g).collect();
            let cand = prox(&trial, step, lambda, weights);
            let smooth = if cand[cand.len() - 1] > 0.0 {
                oracle_loss_grad(data, &cand).0
            } else {
                f64::INFINITY
            };
            let diff: Vec<f64> = cand.iter().zip(&y).map(|(a, b)| a - b).collect();
            let model = fy
                + diff.iter().zip(&gy).map(|(d, g)| d * g).sum::<f64>()
                + diff.iter().map(|d| d * d).sum::<f64>() / (2.0 * step);
            if smooth.is_finite() && smooth <= model + 1e-15 * model.abs() {
                break cand;
            }
            step *= 0.5;
            assert!(step > 1e-20, "backtracking collapsed");
        };
        let fnext = obj(&next);
        let moved = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if fnext > fx {
            // Restart momentum from the last iterate.
            y = x.clone();
            t_mom = 1.0;
            continue;
        }
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t_mom * t_mom).sqrt());
        y = next
            .iter()
            .zip(&x)
            .map(|(a, b)| a + (t_mom - 1.0) / t_new * (a - b))
            .collect();
        x = next;
        fx = fnext;
        t_mom = t_new;
        step *= 1.1;
        if moved < tol {
            break;
        }
    }
    x
}

/// Active-set Newton: damped Newton on the face where the penalized
/// coordinates keep their current signs, dropping a coordinate when a step
/// reaches zero and adding the worst violator of the optimality conditions
/// once the face is solved. Returns `None` if it stalls.
fn newton_polish(data: &Dataset, lambda: f64, weights: &[f64], v: &[f64]) -> Option<Vec<f64>> {
    let p = data.p();
    let mut sign: Vec<f64> = (0..p + 2)
        .map(|k| {
            if v[k] > 0.0 {
                1.0
            } else if v[k] < 0.0 {
                -1.0
            } else {
                0.0
            }
        })
        .collect();
    sign[0] = 0.0;
    sign[p + 1] = 0.0;
    let mut free: Vec<usize> = (0..p + 2)
        .filter(|&k| k == 0 || k == p + 1 || sign[k] != 0.0)
        .collect();
    let mut x = v.to_vec();
    let mut fx = objective(data, &x, lambda, weights);
    let mut last_gnorm = f64::INFINITY;
    for _ in 0..500 {
        let (_, mut g) = oracle_loss_grad(data, &x);
        for j in 0..p {
            g[j + 1] += lambda * weights[j] * sign[j + 1];
        }
        let h = oracle_hessian(data, &x);
        let m = free.len();
        let hs = DMatrix::from_fn(m, m, |a, b| h[(free[a], free[b])]);
        let gs = DVector::from_fn(m, |a, _| g[free[a]]);
        let d = hs.cholesky()?.solve(&-&gs);
        let decrement = -gs.dot(&d);
        let gnorm = gs.amax();
        // Below ~1e-14 the objective cannot resolve a step any more, so the
        // face counts as solved once pure Newton stops shrinking the gradient.
        let solved = decrement < 1e-14 && gnorm >= 0.5 * last_gnorm;
        last_gnorm = if decrement < 1e-14 {
            gnorm
        } else {
            f64::INFINITY
        };
        if solved || gnorm == 0.0 {
            let (_, g) = oracle_loss_grad(data, &x);
            let worst = (0..p)
                .filter(|j| sign[j + 1] == 0.0)
                .map(|j| (j, g[j + 1].abs() - lambda * weights[j]))
                .filter(|(_, e)| *e > 1e-14)
                .max_by(|a, b| a.1.total_cmp(&b.1));
            match worst {
                None => return Some(x),
                Some((j, _)) => {
                    sign[j + 1] = -g[j + 1].signum();
                    free.push(j + 1);
                    last_gnorm = f64::INFINITY;
                    continue;
                }
            }
        }
        // largest step keeping every penalized coordinate on its side of zero
        let mut t_max = 1.0;
        let mut hit = None;
        for (a, &k) in free.iter().enumerate() {
            if sign[k] != 0.0 && d[a] * sign[k] < 0.0 {
                let t = -x[k] / d[a];
                if t < t_max {
                    t_max = t;
                    hit = Some(a);
                }
            }
        }
        if t_max <= 0.0 {
            // A coordinate just added, which the joint direction would push
            // the wrong way: step along it alone, where the violated
            // condition guarantees descent toward its sign.
            let k = free[hit?];
            let step = -g[k] / h[(k, k)];
            let mut cand = x.clone();
            cand[k] += step;
            let fc = objective(data, &cand, lambda, weights);
            if step * sign[k] <= 0.0 || fc > fx {
                return None;
            }
            x = cand;
            fx = fc;
            continue;
        }
        let mut t = t_max;
        loop {
            let mut cand = x.clone();
            for (a, &k) in free.iter().enumerate() {
                cand[k] += t * d[a];
            }
            let fc = objective(data, &cand, lambda, weights);
            if fc <= fx - 0.25 * t * decrement || decrement < 1e-14 {
                if t == t_max {
                    if let Some(a) = hit {
                        cand[free[a]] = 0.0;
                        sign[free[a]] = 0.0;
                        free.remove(a);
                    }
                }
                x = cand;
                fx = objective(data, &x, lambda, weights);
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                return None;
            }
        }
    }
    None
}

/// Largest violation of the weighted-lasso optimality conditions at `v`.
pub fn kkt_violation(data: &Dataset, lambda: f64, weights: &[f64], v: &[f64]) -> f64 {
    let p = data.p();
    let (_, g) = oracle_loss_grad(data, v);
    let mut worst = g[0].abs().max(g[p + 1].abs());
    for j in 0..p {
        let t = lambda * weights[j];
        let e = if v[j + 1] == 0.0 {
            (g[j + 1].abs() - t).max(0.0)
        } else {
            (g[j + 1] + t * v[j + 1].signum()).abs()
        };
        worst = worst.max(e);
    }
    worst
}

/// Minimizes the weighted-lasso Tobit objective from `start`: proximal
/// gradient to identify the signs, then Newton on that face, checked against
/// the optimality conditions. Falls back to long proximal-gradient runs when
/// the polished point does not verify. Returns the objective and minimizer.
pub fn proximal_oracle(
    data: &Dataset,
    lambda: f64,
    weights: &[f64],
    start: &[f64],
) -> (f64, Vec<f64>) {
    let mut x = start.to_vec();
    for tol in [1e-6, 1e-8, 1e-10, 1e-12, 1e-13] {
        x = proximal_gradient(data, lambda, weights, &x, tol, 400_000);
        if let Some(v) = newton_polish(data, lambda, weights, &x) {
            if kkt_violation(data, lambda, weights, &v) <= 1e-12 {
                return (objective(data, &v, lambda, weights), v);
            }
        }
    }
    (objective(data, &x, lambda, weights), x)
}

pub fn normal_equations(x: &DMatrix<f64>, y: &DVector<f64>) -> (f64, Vec<f64>, f64) {
    let n = x.nrows();
    let mut z = DMatrix::from_element(n, x.ncols() + 1, 1.0);
    z.columns_mut(1, x.ncols()).copy_from(x);
    let zty = z.tr_mul(y);
    let coef = (z.tr_mul(&z)).cholesky().expect("full rank").solve(&zty);
    let resid = y - &z * &coef;
    (
        coef[0],
        coef.iter().skip(1).copied().collect(),
        resid.norm_squared(),
    )
}

pub fn theta_vec(t: &OlsenParams) -> Vec<f64> {
    t.to_vec()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
