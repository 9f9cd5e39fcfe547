//! Exactness and structural checks for the Gillespie simulator.
//!
//! The statistical oracle is the pure-death process X -> 0 at rate k*X
//! starting from X0: at time t the count is Binomial(X0, e^{-kt}), which
//! gives closed-form means and variances to test against.

use popdyn_model::{builtin_model, parse_model, SimGrid};
use popdyn_sim::{simulate_batch, ssa_trajectory, InitialSampler, InitialSetting, SimMethod};

const PURE_DEATH: &str = "\
species X
param k = 1
init X in [100, 100]
reaction die: X -> 0 @ k*X
grid t0=0 dt=0.125 H=16
";

fn pure_death() -> (popdyn_model::ReactionNetwork, SimGrid) {
    let m = parse_model(PURE_DEATH).unwrap();
    (m.network, m.grid.unwrap())
}

/// Mean, variance, and the standard errors of their estimators for
/// Binomial(x0, p) over `n` samples. The variance of the sample variance
/// uses the exact fourth central moment of the binomial.
fn binomial_oracle(x0: f64, p: f64, n: f64) -> (f64, f64, f64, f64) {
    let q = 1.0 - p;
    let mean = x0 * p;
    let var = x0 * p * q;
    let mu4 = x0 * p * q * (1.0 - 6.0 * p * q) + 3.0 * var * var;
    let se_mean = (var / n).sqrt();
    let se_var = ((mu4 - var * var * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt();
    (mean, var, se_mean, se_var)
}

#[test]
fn pure_death_matches_analytic_moments() {
    let (net, grid) = pure_death();
    let n_runs = 10_000usize;
    let settings: Vec<InitialSetting> =
        (0..n_runs).map(|_| InitialSetting { s0: vec![100.0], theta: vec![] }).collect();
    let out = simulate_batch(&net, &grid, &settings, SimMethod::Ssa, 42).unwrap();

    for row in 1..=grid.steps() {
        let t = grid.time(row);
        let values: Vec<f64> =
            out.trajectories.iter().map(|tr| tr.values()[(row, 0)]).collect();
        let emp_mean = values.iter().sum::<f64>() / n_runs as f64;
        let emp_var = values.iter().map(|v| (v - emp_mean).powi(2)).sum::<f64>()
            / (n_runs as f64 - 1.0);
        let (mean, var, se_mean, se_var) = binomial_oracle(100.0, (-t).exp(), n_runs as f64);
        assert!(
            (emp_mean - mean).abs() <= 4.0 * se_mean,
            "mean at t={t}: got {emp_mean}, want {mean} +- {se_mean}"
        );
        assert!(
            (emp_var - var).abs() <= 4.0 * se_var,
            "variance at t={t}: got {emp_var}, want {var} +- {se_var}"
        );
    }
}

#[test]
fn sir_with_no_infected_is_frozen() {
    let e = builtin_model("sir").unwrap();
    let setting = InitialSetting { s0: vec![80.0, 0.0, 40.0], theta: vec![] };
    let traj = ssa_trajectory(&e.network, &setting, &e.grid, 7).unwrap();
    for row in 0..traj.rows() {
        assert_eq!(traj.row(row).to_vec(), vec![80.0, 0.0, 40.0]);
    }
}

#[test]
fn single_step_grid_has_two_rows() {
    let (net, _) = pure_death();
    let grid = SimGrid::new(0.0, 0.5, 1).unwrap();
    let setting = InitialSetting { s0: vec![100.0], theta: vec![] };
    let traj = ssa_trajectory(&net, &setting, &grid, 3).unwrap();
    assert_eq!(traj.rows(), 2);
    assert_eq!(traj.columns(), 1);
    assert_eq!(traj.values()[(0, 0)], 100.0);
}

#[test]
fn identical_seeds_reproduce_identical_paths() {
    let e = builtin_model("esirs").unwrap();
    let setting = InitialSetting { s0: vec![40.0, 30.0, 30.0], theta: vec![] };
    let a = ssa_trajectory(&e.network, &setting, &e.grid, 99).unwrap();
    let b = ssa_trajectory(&e.network, &setting, &e.grid, 99).unwrap();
    let c = ssa_trajectory(&e.network, &setting, &e.grid, 100).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn batch_matches_serial_execution() {
    let e = builtin_model("esirs").unwrap();
    let sampler = InitialSampler::new(&e.network).unwrap();
    let settings: Vec<InitialSetting> = (0..64)
        .map(|i| {
            let mut rng = popdyn_sim::rng::stream_rng(5, popdyn_sim::rng::StreamDomain::Settings, i);
            sampler.sample(&mut rng)
        })
        .collect();
    let par = simulate_batch(&e.network, &e.grid, &settings, SimMethod::Ssa, 11).unwrap();
    let ser = popdyn_sim::pool::with_serial(|| {
        simulate_batch(&e.network, &e.grid, &settings, SimMethod::Ssa, 11).unwrap()
    });
    assert_eq!(par.trajectories, ser.trajectories);
}

#[test]
fn conservation_holds_along_paths() {
    for (name, groups) in [
        ("esirs", vec![(vec!["S", "I", "R"], 100.0)]),
        ("oscillator", vec![]),
        ("toggle-switch", vec![(vec!["G1on", "G1off"], 1.0), (vec!["G2on", "G2off"], 1.0)]),
    ] {
        let e = builtin_model(name).unwrap();
        let sampler = InitialSampler::new(&e.network).unwrap();
        let mut rng = popdyn_sim::rng::stream_rng(3, popdyn_sim::rng::StreamDomain::Settings, 0);
        for run in 0..20u64 {
            let setting = sampler.sample(&mut rng);
            let traj = ssa_trajectory(&e.network, &setting, &e.grid, run).unwrap();
            // Oscillator conserves whatever total it starts with.
            let groups: Vec<(Vec<&str>, f64)> = if name == "oscillator" {
                vec![(vec!["A", "B", "C"], setting.s0.iter().sum())]
            } else {
                groups.clone()
            };
            for (names, want) in &groups {
                for row in 0..traj.rows() {
                    let sum: f64 = names
                        .iter()
                        .map(|s| traj.values()[(row, e.network.species_index(s).unwrap())])
                        .sum();
                    assert_eq!(sum, *want, "{name} run {run} row {row}");
                }
            }
        }
    }
}

#[test]
fn sir_absorption_is_permanent() {
    let e = builtin_model("sir").unwrap();
    let sampler = InitialSampler::new(&e.network).unwrap();
    let mut rng = popdyn_sim::rng::stream_rng(8, popdyn_sim::rng::StreamDomain::Settings, 0);
    let i_col = e.network.species_index("I").unwrap();
    let mut saw_absorption = false;
    for run in 0..200u64 {
        let setting = sampler.sample(&mut rng);
        let traj = ssa_trajectory(&e.network, &setting, &e.grid, run).unwrap();
        let mut absorbed_at: Option<usize> = None;
        for row in 0..traj.rows() {
            if let Some(a) = absorbed_at {
                assert_eq!(
                    traj.row(row).to_vec(),
                    traj.row(a).to_vec(),
                    "run {run}: state moved after absorption"
                );
            } else if traj.values()[(row, i_col)] == 0.0 {
                absorbed_at = Some(row);
                saw_absorption = true;
            }
        }
    }
    assert!(saw_absorption, "no run ever absorbed; test is vacuous");
}

#[test]
fn outputs_are_nonnegative_integers() {
    for name in ["sir", "esirs", "toggle-switch", "oscillator", "mapk"] {
        let e = builtin_model(name).unwrap();
        let sampler = InitialSampler::new(&e.network).unwrap();
        let mut rng = popdyn_sim::rng::stream_rng(21, popdyn_sim::rng::StreamDomain::Settings, 0);
        for run in 0..5u64 {
            let setting = sampler.sample(&mut rng);
            let traj = ssa_trajectory(&e.network, &setting, &e.grid, run).unwrap();
            for v in traj.values() {
                assert!(*v >= 0.0 && v.fract() == 0.0, "{name}: bad value {v}");
            }
        }
    }
}

#[test]
fn projection_selects_columns() {
    let e = builtin_model("toggle-switch").unwrap();
    let sampler = InitialSampler::new(&e.network).unwrap();
    let mut rng = popdyn_sim::rng::stream_rng(2, popdyn_sim::rng::StreamDomain::Settings, 0);
    let setting = sampler.sample(&mut rng);
    let traj = ssa_trajectory(&e.network, &setting, &e.grid, 0).unwrap();

    let full = traj.project(&(0..6).collect::<Vec<_>>()).unwrap();
    assert_eq!(full, traj);

    let obs = traj.project(e.network.observables()).unwrap();
    assert_eq!(obs.columns(), 2);
    assert_eq!(obs.rows(), traj.rows());
    let p1 = e.network.species_index("P1").unwrap();
    for row in 0..traj.rows() {
        assert_eq!(obs.values()[(row, 0)], traj.values()[(row, p1)]);
    }

    assert!(traj.project(&[]).is_err());
    assert!(traj.project(&[9]).is_err());
}

#[test]
fn setting_shape_errors_are_caught() {
    let e = builtin_model("sir").unwrap();
    let bad_len = InitialSetting { s0: vec![1.0, 2.0], theta: vec![] };
    assert!(ssa_trajectory(&e.network, &bad_len, &e.grid, 0).is_err());
    let bad_count = InitialSetting { s0: vec![1.5, 2.0, 3.0], theta: vec![] };
    assert!(ssa_trajectory(&e.network, &bad_count, &e.grid, 0).is_err());
    let bad_theta = InitialSetting { s0: vec![50.0, 10.0, 40.0], theta: vec![1.0] };
    assert!(ssa_trajectory(&e.network, &bad_theta, &e.grid, 0).is_err());
}
