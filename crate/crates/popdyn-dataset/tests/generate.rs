use popdyn_dataset::{generate_test_set, generate_training_set, scale, unscale};
use popdyn_model::{builtin_model, parse_model};
use popdyn_sim::pool;
use proptest::prelude::*;

#[test]
fn esirs_defaults_produce_twenty_thousand_pairs() {
    let entry = builtin_model("esirs").unwrap();
    let (n, k) = entry.train_sizes;
    assert_eq!((n, k), (2000, 10));
    let ds = generate_training_set(&entry.network, &entry.grid, n, k, 11).unwrap();
    assert_eq!(ds.len(), 20000);
    assert_eq!(ds.settings.dim(), (20000, 2));
    assert_eq!(ds.trajectories.dim(), (20000, 33, 2));
    assert_eq!(ds.meta.observables, vec!["S", "I"]);
    assert_eq!(ds.meta.m_cond, 0);
    assert!(ds.warnings.is_empty(), "unexpected warnings: {:?}", ds.warnings);
}

#[test]
fn single_pair_row_zero_matches_setting() {
    let entry = builtin_model("sir").unwrap();
    let ds = generate_training_set(&entry.network, &entry.grid, 1, 1, 5).unwrap();
    assert_eq!(ds.len(), 1);
    for j in 0..ds.meta.n_obs {
        assert_eq!(ds.settings[(0, j)], ds.trajectories[(0, 0, j)]);
    }
}

#[test]
fn every_stored_entry_is_scaled_into_the_unit_interval() {
    let entry = builtin_model("toggle-switch").unwrap();
    let ds = generate_training_set(&entry.network, &entry.grid, 40, 5, 4).unwrap();
    for &v in ds.settings.iter().chain(ds.trajectories.iter()) {
        assert!((-1.0..=1.0).contains(&v), "entry {v} escaped [-1, 1]");
    }
    assert!(ds.warnings.is_empty());
}

#[test]
fn generation_is_deterministic_and_worker_count_invariant() {
    let entry = builtin_model("esirs").unwrap();
    let a = generate_training_set(&entry.network, &entry.grid, 12, 3, 99).unwrap();
    let b = generate_training_set(&entry.network, &entry.grid, 12, 3, 99).unwrap();
    let c = pool::with_serial(|| {
        generate_training_set(&entry.network, &entry.grid, 12, 3, 99).unwrap()
    });
    assert_eq!(a, b);
    assert_eq!(a, c);
    let other = generate_training_set(&entry.network, &entry.grid, 12, 3, 100).unwrap();
    assert_ne!(a, other);
}

// A hidden species that feeds an observed one: replicas of a single
// setting must spread far wider than one fixed hidden value could, which
// pins down that the unobserved initial state is redrawn per replica.
#[test]
fn hidden_initials_are_redrawn_for_each_replica() {
    let src = "
        species X Y
        param burst = 100.0
        init X in [0, 0]
        init Y in [0, 100]
        observe X
        reaction make: Y -> Y + X @ burst*Y
        grid t0=0 dt=1 H=1
    ";
    let parsed = parse_model(src).unwrap();
    let grid = parsed.grid.unwrap();
    let ds = generate_training_set(&parsed.network, &grid, 1, 30, 7).unwrap();

    let raw = ds.unscale_trajectories();
    let finals: Vec<f64> = (0..30).map(|p| raw[(p, 1, 0)]).collect();
    let lo = finals.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = finals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(
        hi - lo > 1000.0,
        "final X spans only [{lo}, {hi}]; hidden Y looks frozen across replicas"
    );

    // The observed part of the setting must stay pinned across replicas.
    for p in 0..30 {
        assert_eq!(ds.settings[(p, 0)], ds.settings[(0, 0)]);
        assert_eq!(ds.trajectories[(p, 0, 0)], ds.trajectories[(0, 0, 0)]);
    }
}

#[test]
fn test_sets_with_few_replicas_warn() {
    let entry = builtin_model("sir").unwrap();
    let ds = generate_test_set(&entry.network, &entry.grid, 2, 1, 3).unwrap();
    assert!(ds.warnings.iter().any(|w| w.contains("k=1")));
    let ok = generate_test_set(&entry.network, &entry.grid, 2, 10, 3).unwrap();
    assert!(ok.warnings.is_empty());
    let train = generate_training_set(&entry.network, &entry.grid, 2, 1, 3).unwrap();
    assert!(train.warnings.is_empty());
}

#[test]
fn species_bounds_cover_the_declared_initial_ranges() {
    let entry = builtin_model("sir").unwrap();
    let ds = generate_training_set(&entry.network, &entry.grid, 5, 2, 8).unwrap();
    for &(lo, hi) in ds.bounds.species() {
        assert!(lo <= 30.0, "lo={lo} ignores the declared range");
        assert!(hi >= 200.0, "hi={hi} ignores the declared range");
    }
    assert!(ds.bounds.params().is_empty());
}

#[test]
fn varying_parameters_are_scaled_with_their_declared_range() {
    let entry = builtin_model("esirs-1p").unwrap();
    let ds = generate_training_set(&entry.network, &entry.grid, 6, 2, 21).unwrap();
    assert_eq!(ds.meta.m_cond, 1);
    assert_eq!(ds.bounds.params(), &[(0.5, 5.0)]);
    assert_eq!(ds.settings.dim(), (12, 3));
    // Replicas of one setting share the parameter column.
    for i in 0..6 {
        assert_eq!(ds.settings[(2 * i, 2)], ds.settings[(2 * i + 1, 2)]);
    }
}

#[test]
fn frozen_species_get_a_widened_scaling_range() {
    let src = "
        species X
        init X in [5, 5]
        observe X
        reaction noop: X -> X @ 0
        grid t0=0 dt=1 H=2
    ";
    let parsed = parse_model(src).unwrap();
    let grid = parsed.grid.unwrap();
    let ds = generate_training_set(&parsed.network, &grid, 1, 2, 1).unwrap();
    assert_eq!(ds.bounds.species(), &[(4.5, 5.5)]);
    for &v in ds.trajectories.iter() {
        assert_eq!(v, 0.0, "the single admissible count must scale to the midpoint");
    }
}

#[test]
fn unscaling_recovers_integer_counts() {
    let entry = builtin_model("sir").unwrap();
    let ds = generate_training_set(&entry.network, &entry.grid, 8, 3, 13).unwrap();
    let raw = ds.unscale_trajectories();
    for &v in raw.iter() {
        assert!((v - v.round()).abs() < 1e-3, "{v} is not close to a count");
        assert!(v.round() >= 0.0);
    }
}

#[test]
fn zero_sizes_are_rejected() {
    let entry = builtin_model("sir").unwrap();
    assert!(generate_training_set(&entry.network, &entry.grid, 0, 1, 1).is_err());
    assert!(generate_training_set(&entry.network, &entry.grid, 1, 0, 1).is_err());
}

proptest! {
    #[test]
    fn unscale_inverts_scale(
        lo in -1e6f64..1e6,
        width in 1e-6f64..1e6,
        x in -1e6f64..1e6,
    ) {
        let b = (lo, lo + width);
        let y = scale(x, b).unwrap();
        let back = unscale(y, b).unwrap();
        let tol = 1e-9 * (1.0 + x.abs() + lo.abs() + width);
        prop_assert!((back - x).abs() <= tol, "{x} -> {y} -> {back}");
    }
}
