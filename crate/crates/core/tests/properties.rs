//! Invariants of the public API over randomly generated problems.

use gp_core::gpc::mode_residual;
use gp_core::gplvm::fit_lvm;
use gp_core::{BinaryGpcModel, GprModel, KernelExpr, KernelTerm, LvmConfig, Matrix, MultiGpcModel};
use proptest::prelude::*;

fn inputs(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, 2..=max_n)
}

fn se_noise() -> impl Strategy<Value = KernelExpr> {
    (0.3..2.0f64, 0.3..2.0f64, 0.05..0.8f64)
        .prop_map(|(sf, l, sn)| KernelExpr::se_noise(sf, l, sn).unwrap())
}

fn se() -> impl Strategy<Value = KernelExpr> {
    (0.3..2.0f64, 0.3..2.0f64)
        .prop_map(|(sf, l)| KernelExpr::new(vec![KernelTerm::se(sf, l)]).unwrap())
}

/// Labels ±1 from a threshold, with both classes forced present.
fn labels_for(x: &[f64], cut: f64) -> Vec<f64> {
    let mut y: Vec<f64> = x
        .iter()
        .map(|v| if *v > cut { 1.0 } else { -1.0 })
        .collect();
    y[0] = 1.0;
    y[1] = -1.0;
    y
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gpr_variance_bounded_by_prior(
        x in inputs(12),
        kernel in se_noise(),
        t in prop::collection::vec(-4.0..4.0f64, 1..6),
        seed in 0u64..1000,
    ) {
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| (v + (seed + i as u64) as f64).sin()).collect();
        let model = GprModel::fit(Matrix::column(&x), y, kernel.clone()).unwrap();
        let xt = Matrix::column(&t);
        let pred = model.predict(&xt).unwrap();
        let prior = kernel.self_variance(&xt).unwrap();
        for (v, p) in pred.variance.iter().zip(&prior) {
            prop_assert!(*v >= 0.0);
            // Conditioning never adds uncertainty; noise is the floor.
            prop_assert!(*v <= p + 1e-12);
            prop_assert!(*v >= kernel.noise_variance() - 1e-12);
        }
        prop_assert!(model.log_marginal_likelihood().is_finite());
    }

    #[test]
    fn gpr_log_ml_ignores_row_order(x in inputs(10), kernel in se_noise(), shift in 0usize..10) {
        let n = x.len();
        let y: Vec<f64> = x.iter().map(|v| v.cos()).collect();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let xp: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
        let yp: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        let a = GprModel::fit(Matrix::column(&x), y, kernel.clone()).unwrap().log_marginal_likelihood();
        let b = GprModel::fit(Matrix::column(&xp), yp, kernel).unwrap().log_marginal_likelihood();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn binary_gpc_probabilities_and_mirror(
        x in inputs(15),
        cut in -1.0..1.0f64,
        kernel in se(),
        t in prop::collection::vec(-4.0..4.0f64, 1..6),
    ) {
        let y = labels_for(&x, cut);
        let xs = Matrix::column(&x);
        let model = BinaryGpcModel::fit(xs.clone(), y.clone(), kernel.clone()).unwrap();
        prop_assert!(mode_residual(model.gram(), &y, model.f_hat()).unwrap() < 1e-6);
        let flipped: Vec<f64> = y.iter().map(|v| -v).collect();
        let mirror = BinaryGpcModel::fit(xs, flipped, kernel).unwrap();
        let xt = Matrix::column(&t);
        let p = model.predict_prob(&xt).unwrap();
        let q = mirror.predict_prob(&xt).unwrap();
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((0.0..=1.0).contains(a));
            prop_assert!((a + b - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn multi_gpc_rows_are_distributions(
        x in prop::collection::vec(-3.0..3.0f64, 3..15),
        kernel in se(),
        classes in 2usize..5,
        t in prop::collection::vec(-4.0..4.0f64, 1..6),
    ) {
        let labels: Vec<usize> = (0..x.len()).map(|i| i % classes).collect();
        let model = MultiGpcModel::fit(Matrix::column(&x), labels, vec![kernel; classes]).unwrap();
        for row in model.predict_proba(&Matrix::column(&t)).unwrap() {
            prop_assert_eq!(row.len(), classes);
            prop_assert!(row.iter().all(|p| (0.0..=1.0).contains(p)));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}

/// Seventeen points on two curves in the plane, left then right.
fn two_curves() -> Matrix {
    let mut rows = Vec::new();
    for i in 0..9 {
        let t = -1.0 + 2.0 * i as f64 / 8.0;
        rows.push([-1.0 - 0.4 * (1.4 * t).cos(), t]);
    }
    for i in 0..8 {
        let t = -1.0 + 2.0 * i as f64 / 7.0;
        rows.push([1.0 + 0.4 * (1.4 * t).cos(), 0.8 * t + 0.1]);
    }
    Matrix::from_rows(&rows).unwrap()
}

#[test]
fn lvm_two_curves_beats_pca_start() {
    let config = LvmConfig {
        q: 1,
        ..LvmConfig::default()
    };
    let model = fit_lvm(&two_curves(), &config).unwrap();
    assert_eq!(model.x_latent.rows(), 17);
    assert_eq!(model.x_latent.cols(), 1);
    assert!(model.log_likelihood >= model.history[0]);
    assert!(model.history.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn lvm_is_deterministic_for_a_seed() {
    let config = LvmConfig {
        q: 1,
        max_iters: 50,
        seed: 3,
        ..LvmConfig::default()
    };
    let a = fit_lvm(&two_curves(), &config).unwrap();
    let b = fit_lvm(&two_curves(), &config).unwrap();
    assert_eq!(a.x_latent, b.x_latent);
    assert_eq!(a.history, b.history);
}
