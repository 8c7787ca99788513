use censreg::diagnostics::random_instance;
use censreg::gcd::{CoordinateOrder, GcdState};
use censreg::special::{hazard_h, mills_g, sqrt_2_over_pi};
use censreg::{
    fit_folded_concave, fit_lasso, fit_weighted_lasso, from_natural, hessian, lambda_max,
    neg_loglik, predict, standardize, to_natural, Dataset, LlaConfig, NaturalParams, OlsenParams,
    PenaltySpec, PredictMode, SolverConfig,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn instance(seed: u64) -> (Dataset, OlsenParams) {
    random_instance(&mut ChaCha20Rng::seed_from_u64(seed), 50, 8)
}

/// An instance whose objective has a finite minimizer for every penalty
/// weight vector, including all-zero weights.
fn solver_instance(seed: u64) -> (Dataset, OlsenParams) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    loop {
        let (data, theta) = random_instance(&mut rng, 50, 8);
        if data.n_uncensored() >= 2 * (data.p() + 1) {
            return (data, theta);
        }
    }
}

fn tight() -> SolverConfig {
    SolverConfig::default().with_tol(1e-10)
}

fn objective(theta: &OlsenParams, data: &Dataset, lambda: f64) -> f64 {
    neg_loglik(theta, data).unwrap() + lambda * theta.delta.iter().map(|v| v.abs()).sum::<f64>()
}

fn params_close(a: &OlsenParams, b: &OlsenParams, tol: f64) -> bool {
    a.to_vec()
        .iter()
        .zip(b.to_vec())
        .all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // g underflows to zero past s ~ 38.6, so positivity is checked below that.
    #[test]
    fn mills_is_positive_and_nonincreasing(a in -400.0..40.0f64, b in -400.0..40.0f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(mills_g(lo) >= mills_g(hi));
        if lo < 38.0 {
            prop_assert!(mills_g(lo) > 0.0);
        }
    }

    #[test]
    fn hazard_in_open_unit_interval(s in -50.0..37.0f64) {
        let h = hazard_h(s);
        prop_assert!(h > 0.0 && h < 1.0, "h({s}) = {h}");
    }

    #[test]
    fn kesavan_bound(s in 0.0..100.0f64) {
        prop_assert!(mills_g(-s) <= s + sqrt_2_over_pi() + 1e-12);
    }

    #[test]
    fn loss_is_jointly_convex(seed in any::<u64>(), t in 0.01..0.99f64) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (data, a) = random_instance(&mut rng, 40, 6);
        let b = OlsenParams {
            delta0: rng.random_range(-1.5..1.5),
            delta: DVector::from_fn(a.p(), |_, _| rng.random_range(-1.5..1.5)),
            gamma: rng.random_range(0.3..3.0),
        };
        let mix = OlsenParams::from_slice(
            &a.to_vec().iter().zip(b.to_vec()).map(|(x, y)| t * x + (1.0 - t) * y).collect::<Vec<_>>(),
        ).unwrap();
        let lhs = neg_loglik(&mix, &data).unwrap();
        let rhs = t * neg_loglik(&a, &data).unwrap() + (1.0 - t) * neg_loglik(&b, &data).unwrap();
        prop_assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn hessian_is_symmetric_psd(seed in any::<u64>()) {
        let (data, theta) = instance(seed);
        let h = hessian(&theta, &data).unwrap();
        prop_assert!((&h - h.transpose()).amax() <= 1e-12 * h.amax());
        let min_eig = h.clone().symmetric_eigen().eigenvalues.min();
        prop_assert!(min_eig >= -1e-8 * h.norm());
    }

    #[test]
    fn natural_round_trip(d0 in -5.0..5.0f64, d in prop::collection::vec(-5.0..5.0f64, 1..6), g in 0.05..20.0f64) {
        let theta = OlsenParams::new(d0, DVector::from_vec(d), g).unwrap();
        let back = from_natural(&to_natural(&theta).unwrap()).unwrap();
        for (x, y) in theta.to_vec().iter().zip(back.to_vec()) {
            prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300));
        }
    }

    #[test]
    fn standardization_invariants(seed in any::<u64>()) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (n, p) = (rng.random_range(5..40), rng.random_range(1..6));
        let x = DMatrix::from_fn(n, p, |_, j| rng.random_range(-3.0..3.0) * (j + 1) as f64 + j as f64);
        let y: Vec<f64> = (0..n).map(|i| if i % 3 == 0 { 0.0 } else { rng.random_range(0.1..4.0) }).collect();
        let data = Dataset::new(x, &y, 0.0).unwrap();
        let (std_data, s) = standardize(&data).unwrap();
        for col in std_data.x().column_iter() {
            let mean = col.sum() / n as f64;
            let ms = col.norm_squared() / n as f64;
            prop_assert!(mean.abs() <= 1e-12 && (ms - 1.0).abs() <= 1e-12);
        }
        let (twice, _) = standardize(&std_data).unwrap();
        prop_assert!((twice.x() - std_data.x()).amax() <= 1e-12);

        // Destandardized coefficients predict identically on raw x.
        let np = NaturalParams {
            beta0: rng.random_range(-1.0..1.0),
            beta: (0..p).map(|_| rng.random_range(-2.0..2.0)).collect(),
            sigma: rng.random_range(0.5..2.0),
        };
        let raw = censreg::destandardize_params(&np, &s).unwrap();
        for mode in [PredictMode::Latent, PredictMode::CensoredMean, PredictMode::ProbUncensored] {
            let a = predict(&np, std_data.x(), mode, 0.0).unwrap();
            let b = predict(&raw, data.x(), mode, 0.0).unwrap();
            prop_assert!((a - b).amax() <= 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_update_is_a_descent_step(seed in any::<u64>(), lambda in 0.0..0.5f64) {
        let (data, theta) = solver_instance(seed);
        let p = theta.p();
        let w = vec![1.0; p];
        let mut state = GcdState::new(&data, &theta).unwrap();
        let mut prev = state.objective(lambda, &w);
        for _ in 0..3 {
            let v = state.update_delta0();
            state.commit_delta0(v);
            let now = state.objective(lambda, &w);
            prop_assert!(now <= prev + 1e-12 * prev.abs().max(1.0));
            prev = now;
            for j in 0..p {
                let v = state.update_delta_j(j, lambda, w[j]);
                state.commit_delta_j(j, v);
                let now = state.objective(lambda, &w);
                prop_assert!(now <= prev + 1e-12 * prev.abs().max(1.0), "coordinate {j}");
                prev = now;
            }
            let v = state.update_gamma();
            state.commit_gamma(v);
            let now = state.objective(lambda, &w);
            prop_assert!(now <= prev + 1e-12 * prev.abs().max(1.0));
            prev = now;
        }
    }

    #[test]
    fn gamma_update_is_exact(seed in any::<u64>()) {
        let (data, theta) = instance(seed);
        let mut state = GcdState::new(&data, &theta).unwrap();
        let g = state.update_gamma();
        state.commit_gamma(g);
        let p = theta.p();
        prop_assert!(state.gradient()[p + 1].abs() <= 1e-10);
        let base = state.loss();
        for eps in [1e-4, -1e-4] {
            let mut t = state.theta();
            t.gamma = g + eps;
            prop_assert!(neg_loglik(&t, &data).unwrap() > base);
        }
    }

    #[test]
    fn response_scaling_moves_only_gamma(seed in any::<u64>(), k in 0.2..5.0f64) {
        let (data, _) = solver_instance(seed);
        let lambda = 0.3 * lambda_max(&data, &tight()).unwrap();
        let a = fit_lasso(&data, lambda, &tight()).unwrap();
        let b = fit_lasso(&data.scale_response(k).unwrap(), lambda, &tight()).unwrap();
        prop_assert!((a.theta.delta0 - b.theta.delta0).abs() <= 1e-8);
        prop_assert!((&a.theta.delta - &b.theta.delta).amax() <= 1e-8);
        prop_assert!((a.theta.gamma / k - b.theta.gamma).abs() <= 1e-8 * a.theta.gamma.max(1.0));
    }

    #[test]
    fn coordinate_order_does_not_change_the_optimum(seed in any::<u64>()) {
        let (data, _) = solver_instance(seed);
        let lambda = 0.2 * lambda_max(&data, &tight()).unwrap();
        let fwd = fit_lasso(&data, lambda, &tight()).unwrap();
        let rev_cfg = SolverConfig { order: CoordinateOrder::Reverse, ..tight() };
        let rev = fit_lasso(&data, lambda, &rev_cfg).unwrap();
        prop_assert!((fwd.objective - rev.objective).abs() <= 1e-8);
        prop_assert!(params_close(&fwd.theta, &rev.theta, 1e-5));
    }

    #[test]
    fn scale_step_does_not_change_the_optimum(seed in any::<u64>()) {
        let (data, _) = solver_instance(seed);
        let lambda = 0.1 * lambda_max(&data, &tight()).unwrap();
        let with = fit_lasso(&data, lambda, &tight()).unwrap();
        let without = fit_lasso(&data, lambda, &SolverConfig { scale_step: false, max_cycles: 200_000, ..tight() }).unwrap();
        prop_assert!(with.converged && without.converged);
        prop_assert!((with.objective - without.objective).abs() <= 1e-8);
        prop_assert!(params_close(&with.theta, &without.theta, 1e-5));
    }

    #[test]
    fn warm_and_cold_starts_agree(seed in any::<u64>()) {
        let (data, _) = solver_instance(seed);
        let path = censreg::fit_path(&data, &censreg::PathOptions { n_lambda: 8, ..Default::default() }, &tight()).unwrap();
        prop_assert!(path.fits[0].theta.delta.iter().all(|v| *v == 0.0));
        for (lam, warm) in path.lambdas.iter().zip(&path.fits) {
            prop_assert!(warm.converged && warm.kkt_residual <= 10.0 * 1e-10);
            let cold = fit_lasso(&data, *lam, &tight()).unwrap();
            prop_assert!(params_close(&warm.theta, &cold.theta, 1e-5));
        }
    }

    #[test]
    fn lambda_max_is_the_zero_threshold(seed in any::<u64>(), col in 0usize..8) {
        let (data, _) = solver_instance(seed);
        let lmax = lambda_max(&data, &tight()).unwrap();
        let above = fit_lasso(&data, 1.01 * lmax, &tight()).unwrap();
        prop_assert!(above.theta.delta.iter().all(|v| *v == 0.0));
        let below = fit_lasso(&data, 0.99 * lmax, &tight()).unwrap();
        prop_assert!(below.theta.delta.iter().any(|v| *v != 0.0));

        let j = col % data.p();
        let mut x = data.x().clone();
        x.column_mut(j).neg_mut();
        let flipped = Dataset::from_shifted(x, data.y().clone(), 0.0).unwrap();
        let l2 = lambda_max(&flipped, &tight()).unwrap();
        prop_assert!((lmax - l2).abs() <= 1e-12 * lmax);
    }

    #[test]
    fn lla_objective_never_increases(seed in any::<u64>(), mcp in any::<bool>()) {
        let (data, _) = solver_instance(seed);
        let lam = 0.3 * lambda_max(&data, &tight()).unwrap();
        let spec = if mcp { PenaltySpec::mcp(lam, 3.0) } else { PenaltySpec::scad(lam, 3.0) }.unwrap();
        let fit = fit_folded_concave(&data, &spec, &LlaConfig { steps: 4, ..Default::default() }, &tight()).unwrap();
        let mut prev = fit.initial_objective;
        for step in &fit.history {
            prop_assert!(step.objective <= prev + 1e-8, "{} > {prev}", step.objective);
            prev = step.objective;
        }
    }

    #[test]
    fn weighted_lasso_kkt(seed in any::<u64>()) {
        let (data, _) = solver_instance(seed);
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 1);
        let w: Vec<f64> = (0..data.p()).map(|j| if j == 0 { 0.0 } else { rng.random_range(0.2..2.0) }).collect();
        let lambda = rng.random_range(0.01..0.3);
        let fit = fit_weighted_lasso(&data, lambda, &w, &SolverConfig::default(), None).unwrap();
        prop_assert!(fit.converged && fit.kkt_residual <= 10.0 * 1e-7);
        prop_assert!(objective(&fit.theta, &data, 0.0).is_finite());
    }
}

#[test]
fn interpolating_instance_is_flagged_not_fitted() {
    // The line y = x passes through both uncensored rows and is negative at
    // every censored row, so scaling it up drives the loss to -infinity.
    let x = DMatrix::from_column_slice(5, 1, &[1.0, 2.0, -1.0, -2.0, -0.5]);
    let y = [1.0, 2.0, 0.0, 0.0, 0.0];
    let data = Dataset::new(x, &y, 0.0).unwrap();
    let fit = fit_weighted_lasso(&data, 0.1, &[0.0], &tight(), None).unwrap();
    assert!(!fit.converged, "{fit:?}");
    assert!(fit.cycles_used < tight().max_cycles);
}
