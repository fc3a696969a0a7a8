use rdpc_core::restoration::*;

fn reference_model() -> RestorationModel {
    RestorationModel::reference()
}

#[test]
fn metric_minimizers_on_reference_model() {
    let m = reference_model();
    let (a, v) = m.argmin(Metric::Mse, 0.05, 1.5, 300).unwrap();
    assert!((a - 2.0 / 3.0).abs() < 1e-6 && (v - 2.0 / 3.0).abs() < 1e-6, "{a} {v}");
    assert!((m.mse_argmin() - 2.0 / 3.0).abs() < 1e-15);

    let (a, v) = m.argmin(Metric::ErrorRate, 0.05, 1.5, 300).unwrap();
    assert!((a - 0.50).abs() <= 0.02, "{a}");
    assert!((v - 0.204).abs() <= 0.003, "{v}");

    let (a, _) = m.argmin(Metric::Kl, 0.05, 1.5, 300).unwrap();
    assert!((a - 0.81).abs() <= 0.02, "{a}");
    assert!(m.kl(std::f64::consts::FRAC_1_SQRT_2).unwrap() > m.kl(a).unwrap());
}

#[test]
fn sweep_preserves_order_and_argmins() {
    let m = reference_model();
    let grid: Vec<f64> = (2..=30).map(|i| 0.05 * i as f64).collect();
    let pts = sweep(&m, &grid).unwrap();
    assert_eq!(pts.iter().map(|p| p.a).collect::<Vec<_>>(), grid);
    let best = |metric: Metric| pts.iter().min_by(|x, y| metric.of(x).total_cmp(&metric.of(y))).unwrap().a;
    assert!((best(Metric::Mse) - 0.667).abs() <= 0.05);
    assert!((best(Metric::ErrorRate) - 0.50).abs() <= 0.02 + 1e-12);
    assert!((best(Metric::Kl) - 0.81).abs() <= 0.05);
    for p in &pts {
        assert!(p.mse >= 0.0 && p.kl >= 0.0 && (0.0..=1.0).contains(&p.error_rate));
    }
    assert_eq!(sweep(&m, &[0.3]).unwrap().len(), 1);
}

#[test]
fn negative_gain_uses_absolute_scale() {
    let m = reference_model();
    let p = m.point(-0.5).unwrap();
    assert!(p.kl.is_finite() && (0.0..=1.0).contains(&p.error_rate));
    assert!(m.kl(0.0).is_err());
}

#[test]
fn fixed_threshold_rule_is_homogeneous() {
    let m = reference_model();
    for &a in &[0.2, 0.5, 0.9, 1.4] {
        for &lam in &[0.3, 2.0, 7.5] {
            let base = m.error_rate_at_threshold(a, m.threshold_c0).unwrap();
            let scaled = m.error_rate_at_threshold(lam * a, lam * m.threshold_c0).unwrap();
            assert!((base - scaled).abs() <= 1e-12);
        }
    }
}

#[test]
fn reoptimized_threshold_is_flat_in_gain() {
    let m = reference_model();
    let base = m.error_rate_reoptimized(0.1).unwrap();
    for i in 1..=60 {
        let a = 0.1 + 0.025 * i as f64;
        assert!((m.error_rate_reoptimized(a).unwrap() - base).abs() <= 1e-9);
    }
}

#[test]
fn noiseless_minimizers_coincide_at_identity() {
    let m = RestorationModel::reference_with_noise(0.0).unwrap();
    let step = 0.01;
    for metric in [Metric::Mse, Metric::Kl, Metric::ErrorRate] {
        let (a, _) = m.argmin(metric, 0.5, 1.5, 101).unwrap();
        assert!((a - 1.0).abs() <= step, "{metric:?}: {a}");
    }
    let grid = linspace(0.5, 1.5, 101);
    let pts = sweep(&m, &grid).unwrap();
    let one = pts.iter().find(|p| p.a == 1.0).unwrap();
    assert!(pts.iter().all(|p| p.mse >= one.mse && p.kl >= one.kl - 1e-7 && p.error_rate >= one.error_rate - 1e-15));
}

#[test]
fn frontiers_are_monotone_and_nonconstant() {
    let m = reference_model();
    let bounds_mse = linspace(0.6, 2.0, 30);
    let bounds_err = linspace(0.2, 0.4, 30);
    let bounds_kl = linspace(0.0, 0.5, 30);
    // The error-rate minimizer a = 0.5 already meets MSE ≤ 0.75.
    let bounds_mse_tight = linspace(0.667, 0.76, 30);
    let cases = [
        (Metric::Kl, Metric::Mse, &bounds_mse),
        (Metric::ErrorRate, Metric::Mse, &bounds_mse_tight),
        (Metric::Kl, Metric::ErrorRate, &bounds_err),
        (Metric::ErrorRate, Metric::Kl, &bounds_kl),
    ];
    for (minimize, subject_to, bounds) in cases {
        let f = frontier(&m, minimize, subject_to, bounds, (0.05, 1.5), 200).unwrap();
        let vals: Vec<f64> = f.iter().filter_map(|p| p.value).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0]), "{minimize:?} | {subject_to:?}");
        let span = vals.first().unwrap() - vals.last().unwrap();
        assert!(span > 1e-4, "{minimize:?} | {subject_to:?} constant");
    }
    let f = frontier(&m, Metric::Kl, Metric::Mse, &[0.5, 0.7], (0.05, 1.5), 200).unwrap();
    assert!(!f[0].feasible() && f[1].feasible());
}

#[test]
fn frontier_rejects_bad_inputs() {
    let m = reference_model();
    assert!(frontier(&m, Metric::Kl, Metric::Kl, &[1.0], (0.1, 1.0), 10).is_err());
    assert!(frontier(&m, Metric::Kl, Metric::Mse, &[1.0, 0.5], (0.1, 1.0), 10).is_err());
    assert!(frontier(&m, Metric::Kl, Metric::Mse, &[1.0], (-1.0, 1.0), 10).is_err());
}

#[test]
fn monte_carlo_agrees_with_closed_form() {
    let m = reference_model();
    let gains = [0.1, 0.4, 2.0 / 3.0, 1.0, 1.3];
    let est = mse_monte_carlo(&m, &gains, 1_000_000, 7);
    for e in &est {
        assert!((e.mean - m.mse(e.a)).abs() <= 4.0 * e.std_error, "{e:?}");
    }
    assert_eq!(est, mse_monte_carlo(&m, &gains, 1_000_000, 7));
}

#[test]
fn model_validation() {
    assert!(RestorationModel::reference_with_noise(-1.0).is_err());
    assert!(RestorationModel::with_threshold(RestorationModel::reference_mixture(), 1.0, f64::NAN).is_err());
}
