//! Training-loop bookkeeping: update counts per epoch, batch clamping,
//! default hyperparameters, and the non-finite-loss guard.

use ndarray::{Array2, Array3};
use popdyn_dataset::{Dataset, DatasetMeta, ScalingBounds};
use popdyn_gan::{train, CriticConfig, GanError, GeneratorConfig, TrainConfig};
use popdyn_model::SimGrid;

fn tiny_gen_config() -> GeneratorConfig {
    GeneratorConfig {
        n_obs: 1,
        m_cond: 0,
        steps: 16,
        noise_dim: 4,
        embed_channels: 4,
        deconv_filters: vec![2, 2],
    }
}

fn tiny_critic_config() -> CriticConfig {
    CriticConfig { n_obs: 1, m_cond: 0, steps: 16, conv_layers: vec![2] }
}

/// A dataset of `pairs` identical scaled-constant trajectories.
fn constant_dataset(pairs: usize, scaled: f32) -> Dataset {
    let grid = SimGrid::new(0.0, 0.1, 16).unwrap();
    Dataset {
        meta: DatasetMeta {
            model: "constant".into(),
            grid,
            n_obs: 1,
            m_cond: 0,
            n_settings: pairs,
            k_per_setting: 1,
            observables: vec!["X".into()],
            seed: 0,
        },
        bounds: ScalingBounds::new(vec![(0.0, 10.0)], vec![]).unwrap(),
        settings: Array2::from_elem((pairs, 1), scaled),
        trajectories: Array3::from_elem((pairs, 17, 1), scaled),
        warnings: Vec::new(),
    }
}

#[test]
fn default_hyperparameters_match_the_documented_values() {
    let tcfg = TrainConfig::default();
    assert_eq!(tcfg.lambda_gp, 10.0);
    assert_eq!(tcfg.n_critic, 5);
    assert_eq!(tcfg.batch_size, 256);
    assert_eq!(tcfg.alpha, 1e-4);
    assert_eq!(tcfg.beta1, 0.5);
    assert_eq!(tcfg.beta2, 0.9);
}

#[test]
fn one_epoch_on_ten_pairs_performs_six_updates() {
    // Ten pairs clamp the 256 batch to 10, giving one cycle per epoch:
    // five critic updates plus one generator update.
    let ds = constant_dataset(10, 0.0);
    let tcfg = TrainConfig { epochs: 1, ..TrainConfig::default() };
    let (_, log) = train(&ds, &tiny_gen_config(), &tiny_critic_config(), &tcfg).unwrap();
    assert_eq!(log.records.len(), 1);
    assert_eq!(log.critic_steps, 5);
    assert_eq!(log.gen_steps, 1);
    assert_eq!(log.records[0].epoch, 0);
    assert!(log.records[0].critic_loss.is_finite());
    assert!(log.records[0].gen_loss.is_finite());
    assert!(log.records[0].gradient_penalty.is_finite());
    assert!(log.records[0].wall_ms >= 0.0);
}

#[test]
fn partial_batches_are_dropped_from_the_cycle_count() {
    // Ten pairs at batch 4 give floor(10/4) = 2 cycles per epoch.
    let ds = constant_dataset(10, 0.1);
    let tcfg =
        TrainConfig { epochs: 3, batch_size: 4, n_critic: 2, ..TrainConfig::default() };
    let (_, log) = train(&ds, &tiny_gen_config(), &tiny_critic_config(), &tcfg).unwrap();
    assert_eq!(log.records.len(), 6);
    assert_eq!(log.critic_steps, 12);
    assert_eq!(log.gen_steps, 6);
}

#[test]
fn single_pair_dataset_is_rejected() {
    let ds = constant_dataset(1, 0.0);
    let err =
        train(&ds, &tiny_gen_config(), &tiny_critic_config(), &TrainConfig::default());
    assert!(matches!(err, Err(GanError::Config(_))));
}

#[test]
fn mismatched_horizon_is_rejected() {
    let ds = constant_dataset(8, 0.0);
    let gcfg = GeneratorConfig { steps: 32, deconv_filters: vec![2, 2], ..tiny_gen_config() };
    let ccfg = CriticConfig { steps: 32, ..tiny_critic_config() };
    let err = train(&ds, &gcfg, &ccfg, &TrainConfig::default());
    assert!(matches!(err, Err(GanError::DatasetMismatch(_))));
}

#[test]
fn absurd_learning_rate_trips_the_divergence_guard() {
    let ds = constant_dataset(8, 0.2);
    let tcfg = TrainConfig { epochs: 4, alpha: 1e100, ..TrainConfig::default() };
    match train(&ds, &tiny_gen_config(), &tiny_critic_config(), &tcfg) {
        Err(GanError::Diverged { update, value }) => {
            assert!(update >= 1);
            assert!(!value.is_finite());
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}
