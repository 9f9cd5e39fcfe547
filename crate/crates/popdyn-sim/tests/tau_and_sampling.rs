//! Tau-leap accuracy/consistency and initial-setting distribution checks.

use popdyn_model::{builtin_model, parse_model, SimGrid};
use popdyn_sim::rng::{stream_rng, StreamDomain};
use popdyn_sim::{
    sample_initial_setting, simulate_batch, ssa_trajectory, tau_leap_trajectory, InitialSampler,
    InitialSetting, SimMethod,
};

const PURE_DEATH: &str = "\
species X
param k = 1
init X in [100, 100]
reaction die: X -> 0 @ k*X
grid t0=0 dt=1 H=1
";

fn pure_death() -> (popdyn_model::ReactionNetwork, SimGrid) {
    let m = parse_model(PURE_DEATH).unwrap();
    (m.network, m.grid.unwrap())
}

fn x_at_end(net: &popdyn_model::ReactionNetwork, grid: &SimGrid, method: SimMethod, n: usize, seed: u64) -> Vec<f64> {
    let settings: Vec<InitialSetting> =
        (0..n).map(|_| InitialSetting { s0: vec![100.0], theta: vec![] }).collect();
    let out = simulate_batch(net, grid, &settings, method, seed).unwrap();
    out.trajectories.iter().map(|t| t.values()[(grid.steps(), 0)]).collect()
}

/// Equal-size 1-D Wasserstein distance: mean absolute difference of the
/// sorted samples. Local copy so this crate's tests stand alone.
fn w1(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    assert_eq!(a.len(), b.len());
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

#[test]
fn tau_leap_tracks_the_analytic_mean() {
    let (net, grid) = pure_death();
    let n = 4000;
    let vals = x_at_end(&net, &grid, SimMethod::TauLeap { tau: 0.01 }, n, 5);
    let mean = vals.iter().sum::<f64>() / n as f64;
    let want = 100.0 * (-1.0f64).exp();
    assert!(
        (mean - want).abs() / want < 0.05,
        "tau-leap mean {mean} deviates more than 5% from {want}"
    );
}

#[test]
fn tau_leap_converges_to_ssa_as_tau_shrinks() {
    let (net, grid) = pure_death();
    let n = 10_000;
    let ssa = x_at_end(&net, &grid, SimMethod::Ssa, n, 17);
    let dt = grid.dt();
    let dists: Vec<f64> = [dt, dt / 4.0, dt / 16.0]
        .iter()
        .map(|&tau| w1(x_at_end(&net, &grid, SimMethod::TauLeap { tau }, n, 23), ssa.clone()))
        .collect();
    // Monotone nonincreasing, with one Monte Carlo inversion tolerated.
    let tol = 0.5;
    let inversions =
        dists.windows(2).filter(|w| w[1] > w[0] + tol).count();
    assert!(
        inversions <= 1,
        "tau-leap error failed to shrink with tau: {dists:?}"
    );
    assert!(
        dists[2] < dists[0],
        "finest tau is no better than the coarsest: {dists:?}"
    );
}

#[test]
fn tau_equal_dt_keeps_frozen_systems_frozen() {
    let e = builtin_model("sir").unwrap();
    let setting = InitialSetting { s0: vec![80.0, 0.0, 40.0], theta: vec![] };
    let (traj, stats) =
        tau_leap_trajectory(&e.network, &setting, &e.grid, e.grid.dt(), 9).unwrap();
    for row in 0..traj.rows() {
        assert_eq!(traj.row(row).to_vec(), vec![80.0, 0.0, 40.0]);
    }
    assert_eq!(stats.clamped, 0);

    // With zero total propensity the two simulators agree exactly.
    let ssa = ssa_trajectory(&e.network, &setting, &e.grid, 9).unwrap();
    assert_eq!(traj, ssa);
}

#[test]
fn tau_must_be_positive_and_at_most_dt() {
    let e = builtin_model("sir").unwrap();
    let setting = InitialSetting { s0: vec![80.0, 10.0, 40.0], theta: vec![] };
    assert!(tau_leap_trajectory(&e.network, &setting, &e.grid, 0.0, 1).is_err());
    assert!(tau_leap_trajectory(&e.network, &setting, &e.grid, 0.6, 1).is_err());
}

#[test]
fn esirs_settings_respect_the_simplex() {
    let e = builtin_model("esirs").unwrap();
    let sampler = InitialSampler::new(&e.network).unwrap();
    let n = 2000;
    let mut mean_s = 0.0;
    for i in 0..n {
        let mut rng = stream_rng(31, StreamDomain::Settings, i);
        let s = sampler.sample(&mut rng);
        assert_eq!(s.s0.iter().sum::<f64>(), 100.0);
        assert!(s.s0.iter().all(|&v| (0.0..=100.0).contains(&v) && v.fract() == 0.0));
        mean_s += s.s0[0];
    }
    mean_s /= n as f64;
    // Uniform over the simplex: S has mean 100/3 and variance ~572.2,
    // so four standard errors over 2000 draws is ~2.14.
    assert!(
        (mean_s - 100.0 / 3.0).abs() < 2.14,
        "mean of S is {mean_s}, expected about {:.3}",
        100.0 / 3.0
    );
}

#[test]
fn sir_settings_fill_the_declared_box() {
    let e = builtin_model("sir").unwrap();
    let sampler = InitialSampler::new(&e.network).unwrap();
    for i in 0..500 {
        let mut rng = stream_rng(12, StreamDomain::Settings, i);
        let s = sampler.sample(&mut rng);
        assert!(s.s0.iter().all(|&v| (30.0..=200.0).contains(&v) && v.fract() == 0.0));
    }
}

#[test]
fn degenerate_range_is_constant() {
    let src = "\
species X Y
param k = 1
init X in [5, 5]
init Y in [0, 3]
reaction d: X -> Y @ k*X
";
    let net = parse_model(src).unwrap().network;
    let sampler = InitialSampler::new(&net).unwrap();
    for i in 0..50 {
        let mut rng = stream_rng(4, StreamDomain::Settings, i);
        assert_eq!(sampler.sample(&mut rng).s0[0], 5.0);
    }
}

#[test]
fn toggle_and_mapk_group_sampling() {
    let e = builtin_model("toggle-switch").unwrap();
    let sampler = InitialSampler::new(&e.network).unwrap();
    let mut saw_g1_on = false;
    let mut saw_g1_off = false;
    for i in 0..200 {
        let mut rng = stream_rng(6, StreamDomain::Settings, i);
        let s = sampler.sample(&mut rng);
        assert_eq!(s.s0[0] + s.s0[1], 1.0);
        assert_eq!(s.s0[2] + s.s0[3], 1.0);
        saw_g1_on |= s.s0[0] == 1.0;
        saw_g1_off |= s.s0[1] == 1.0;
    }
    assert!(saw_g1_on && saw_g1_off, "gene state never flipped across draws");

    let e = builtin_model("mapk").unwrap();
    let sampler = InitialSampler::new(&e.network).unwrap();
    let net = &e.network;
    for i in 0..200 {
        let mut rng = stream_rng(61, StreamDomain::Settings, i);
        let s = sampler.sample(&mut rng);
        let sum = |names: &[&str]| -> f64 {
            names.iter().map(|n| s.s0[net.species_index(n).unwrap()]).sum()
        };
        assert_eq!(sum(&["MKKK", "MKKK_P"]), 100.0);
        assert_eq!(sum(&["MKK", "MKK_P", "MKK_PP"]), 300.0);
        assert_eq!(sum(&["MAPK", "MAPK_P", "MAPK_PP"]), 300.0);
        assert!((0.5..=5.0).contains(&s.theta[0]));
    }
}

#[test]
fn hidden_resampling_keeps_observed_entries() {
    let e = builtin_model("mapk").unwrap();
    let net = &e.network;
    let sampler = InitialSampler::new(net).unwrap();
    let mut rng = stream_rng(77, StreamDomain::Settings, 0);
    let base = sampler.sample(&mut rng);
    let obs = net.species_index("MAPK_PP").unwrap();

    let mut changed_hidden = false;
    for j in 0..50 {
        let mut s0 = base.s0.clone();
        let mut rng = stream_rng(77, StreamDomain::HiddenInit, j);
        sampler.resample_hidden(&mut s0, &mut rng).unwrap();
        assert_eq!(s0[obs], base.s0[obs], "observed entry moved");
        assert_eq!(
            s0[net.species_index("MAPK").unwrap()]
                + s0[net.species_index("MAPK_P").unwrap()]
                + s0[obs],
            300.0
        );
        assert_eq!(
            s0[net.species_index("MKKK").unwrap()]
                + s0[net.species_index("MKKK_P").unwrap()],
            100.0
        );
        changed_hidden |= s0 != base.s0;
    }
    assert!(changed_hidden, "hidden resampling never changed anything");
}

#[test]
fn one_shot_sampler_is_deterministic() {
    let e = builtin_model("esirs").unwrap();
    let a = sample_initial_setting(&e.network, 13).unwrap();
    let b = sample_initial_setting(&e.network, 13).unwrap();
    assert_eq!(a, b);
}

#[test]
fn infeasible_constraint_is_rejected() {
    let src = "\
species A B
param k = 1
init A in [0, 2]
init B in [0, 2]
constraint A + B = 9
reaction d: A -> B @ k*A
";
    let net = parse_model(src).unwrap().network;
    assert!(InitialSampler::new(&net).is_err());
}
