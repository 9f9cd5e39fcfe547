//! Histogram error report: hand-checked metrics, zero on identical
//! inputs, aggregation, and shape validation.

use ndarray::{array, Array2};
use popdyn_dataset::ScalingBounds;
use popdyn_eval::{histogram_errors, METRIC_NAMES};
use popdyn_sim::rng::{stream_rng, StreamDomain};
use popdyn_sim::Trajectory;
use rand::Rng;

fn traj(values: Array2<f64>) -> Trajectory {
    Trajectory::new(values).unwrap()
}

fn unit_bounds(n: usize) -> ScalingBounds {
    ScalingBounds::new(vec![(0.0, 10.0); n], vec![]).unwrap()
}

fn random_group(seed: u64, k: usize, rows: usize, cols: usize) -> Vec<Trajectory> {
    let mut rng = stream_rng(seed, StreamDomain::Permute, 0);
    (0..k)
        .map(|_| traj(Array2::from_shape_fn((rows, cols), |_| rng.random_range(0.0..10.0))))
        .collect()
}

#[test]
fn identical_inputs_give_an_all_zero_report() {
    let group = random_group(31, 6, 9, 2);
    let real = vec![group.clone(), random_group(32, 6, 9, 2)];
    let report = histogram_errors(&real, &real, &unit_bounds(2)).unwrap();
    for g in report.per_setting.iter().chain([&report.mean, &report.std]) {
        for t in g.tables() {
            assert!(t.iter().all(|&v| v == 0.0));
        }
    }
}

#[test]
fn report_shape_is_steps_by_observables() {
    let real = vec![random_group(33, 4, 17, 3)];
    let fake = vec![random_group(34, 5, 17, 3)];
    let report = histogram_errors(&real, &fake, &unit_bounds(3)).unwrap();
    assert_eq!(report.steps(), 16);
    assert_eq!(report.n_obs(), 3);
    assert_eq!(report.n_settings(), 1);
    for t in report.mean.tables() {
        assert_eq!(t.dim(), (16, 3));
    }
    // One setting: no spread.
    for t in report.std.tables() {
        assert!(t.iter().all(|&v| v == 0.0));
    }
    assert_eq!(METRIC_NAMES.len(), 5);
}

#[test]
fn metrics_match_hand_computation() {
    // One species on bounds [0, 10] (scaled value = x/5 - 1), two steps.
    // Step 1: real {0, 0}, fake {1, 3}. Step 2: identical {4, 6}.
    let real = vec![vec![
        traj(array![[5.0], [0.0], [4.0]]),
        traj(array![[5.0], [0.0], [6.0]]),
    ]];
    let fake = vec![vec![
        traj(array![[5.0], [1.0], [4.0]]),
        traj(array![[5.0], [3.0], [6.0]]),
    ]];
    let report = histogram_errors(&real, &fake, &unit_bounds(1)).unwrap();
    let g = &report.per_setting[0];

    // Scaled step 1: real {-1, -1} vs fake {-0.8, -0.4}.
    assert!((g.wasserstein[(0, 0)] - 0.4).abs() < 1e-12);
    assert!((g.mean_abs[(0, 0)] - 0.4).abs() < 1e-12);
    assert!((g.var_abs[(0, 0)] - 0.04).abs() < 1e-12);
    // Count units: real mean 0 (guard kicks in), fake mean 2, variances 0 vs 1.
    assert!((g.mean_rel[(0, 0)] - 2.0).abs() < 1e-12);
    assert!((g.var_rel[(0, 0)] - 1.0).abs() < 1e-12);

    for t in g.tables() {
        assert_eq!(t[(1, 0)], 0.0, "step 2 distributions coincide");
    }
    // Single setting: aggregate mean equals the per-setting table.
    assert_eq!(report.mean.wasserstein, g.wasserstein);
}

#[test]
fn aggregation_averages_settings_with_equal_weight() {
    let real = vec![random_group(35, 5, 5, 1), random_group(36, 5, 5, 1)];
    let fake = vec![random_group(37, 5, 5, 1), random_group(38, 5, 5, 1)];
    let report = histogram_errors(&real, &fake, &unit_bounds(1)).unwrap();
    for k in 0..5 {
        let a = report.per_setting[0].tables()[k];
        let b = report.per_setting[1].tables()[k];
        let want_mean = (a + b) / 2.0;
        let want_std = ((a - b) / 2.0).mapv(f64::abs);
        let got_mean = report.mean.tables()[k];
        let got_std = report.std.tables()[k];
        for (w, g) in want_mean.iter().zip(got_mean) {
            assert!((w - g).abs() < 1e-12);
        }
        for (w, g) in want_std.iter().zip(got_std) {
            assert!((w - g).abs() < 1e-12);
        }
    }
}

#[test]
fn values_outside_the_bounds_still_scale_affinely() {
    // 12 maps to 1.4; nothing clamps, nothing errors.
    let real = vec![vec![traj(array![[5.0], [12.0]]), traj(array![[5.0], [12.0]])]];
    let fake = vec![vec![traj(array![[5.0], [2.0]]), traj(array![[5.0], [2.0]])]];
    let report = histogram_errors(&real, &fake, &unit_bounds(1)).unwrap();
    assert!((report.mean.wasserstein[(0, 0)] - 2.0).abs() < 1e-12);
    assert!((report.mean.mean_rel[(0, 0)] - 10.0 / 12.0).abs() < 1e-12);
}

#[test]
fn mismatched_inputs_are_rejected() {
    let bounds = unit_bounds(1);
    let a = vec![random_group(39, 3, 5, 1)];
    let short = vec![random_group(40, 3, 4, 1)];
    assert!(histogram_errors(&a, &short, &bounds).is_err(), "different horizons");

    let two = vec![random_group(41, 3, 5, 1), random_group(42, 3, 5, 1)];
    assert!(histogram_errors(&a, &two, &bounds).is_err(), "different setting counts");

    let empty: Vec<Vec<Trajectory>> = vec![vec![]];
    assert!(histogram_errors(&a, &empty, &bounds).is_err(), "empty group");

    let none: Vec<Vec<Trajectory>> = vec![];
    assert!(histogram_errors(&none, &none, &bounds).is_err(), "no settings");

    let wide = vec![random_group(43, 3, 5, 2)];
    assert!(histogram_errors(&wide, &wide, &bounds).is_err(), "bounds arity");
}
