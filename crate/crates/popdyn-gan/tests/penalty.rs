//! Closed-form checks of the gradient penalty and the two losses, using a
//! critic with no convolutional layers: its score is then an affine map of
//! the assembled input, so the input gradient is the head weight itself.

use ndarray::{Array2, Array3};
use popdyn_gan::{
    critic_loss, generator_loss, generator_loss_grads, gradient_penalty, CriticConfig,
    CriticParams, GeneratorConfig, GeneratorParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: usize = 16;

fn gen_config() -> GeneratorConfig {
    GeneratorConfig {
        n_obs: 1,
        m_cond: 1,
        steps: H,
        noise_dim: 6,
        embed_channels: 8,
        deconv_filters: vec![4, 4],
    }
}

fn linear_critic_config() -> CriticConfig {
    CriticConfig { n_obs: 1, m_cond: 1, steps: H, conv_layers: vec![] }
}

/// Head-weight slot of trajectory step `t` (1-based) in the flattened
/// assembled input: channels alternate (species, parameter) per step.
fn traj_slot(t: usize) -> usize {
    t * 2
}

fn batch(b: usize, seed: u64) -> (Array3<f64>, Array3<f64>, Array2<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let real = Array3::from_shape_fn((b, H, 1), |_| rng.random_range(-1.0..1.0));
    let fake = Array3::from_shape_fn((b, H, 1), |_| rng.random_range(-1.0..1.0));
    let cond = Array2::from_shape_fn((b, 2), |_| rng.random_range(-1.0..1.0));
    let eps: Vec<f64> = (0..b).map(|_| rng.random_range(0.05..0.95)).collect();
    (real, fake, cond, eps)
}

#[test]
fn unit_gradient_critic_has_zero_penalty() {
    let mut cp = CriticParams::init(&linear_critic_config(), 1);
    cp.zero();
    // Two trajectory taps with squared sum 1: the input gradient norm is 1
    // everywhere, so the penalty vanishes.
    let r = 0.5_f64.sqrt();
    cp.head.w[[traj_slot(1), 0]] = r;
    cp.head.w[[traj_slot(7), 0]] = -r;
    // Condition taps must not enter the norm: make them large.
    cp.head.w[[0, 0]] = 11.0;
    cp.head.w[[traj_slot(3) + 1, 0]] = -9.0;

    let (real, fake, cond, eps) = batch(5, 42);
    let p = gradient_penalty(&cp, &real, &fake, &cond, &eps).unwrap();
    assert!(p.abs() < 1e-12, "penalty {p}");
}

#[test]
fn constant_critic_has_unit_penalty() {
    let mut cp = CriticParams::init(&linear_critic_config(), 1);
    cp.zero();
    cp.head.b[[0]] = 3.0;
    let (real, fake, cond, eps) = batch(4, 43);
    let p = gradient_penalty(&cp, &real, &fake, &cond, &eps).unwrap();
    assert!((p - 1.0).abs() < 1e-12, "penalty {p}");
}

#[test]
fn doubled_unit_gradient_has_unit_penalty() {
    let mut cp = CriticParams::init(&linear_critic_config(), 1);
    cp.zero();
    cp.head.w[[traj_slot(5), 0]] = 2.0;
    let (real, fake, cond, eps) = batch(4, 44);
    let p = gradient_penalty(&cp, &real, &fake, &cond, &eps).unwrap();
    assert!((p - 1.0).abs() < 1e-12, "penalty {p}");
}

#[test]
fn penalty_is_nonnegative_for_random_critics() {
    for seed in 0..5 {
        let cp = CriticParams::init(
            &CriticConfig { n_obs: 1, m_cond: 1, steps: H, conv_layers: vec![4] },
            seed,
        );
        let (real, fake, cond, eps) = batch(3, 50 + seed);
        let p = gradient_penalty(&cp, &real, &fake, &cond, &eps).unwrap();
        assert!(p >= 0.0 && p.is_finite());
    }
}

#[test]
fn zero_critic_and_zero_lambda_give_zero_critic_loss() {
    let gp = GeneratorParams::init(&gen_config(), 7);
    let mut cp = CriticParams::init(&linear_critic_config(), 7);
    cp.zero();
    let (real, _, cond, eps) = batch(3, 45);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let z = Array2::from_shape_fn((3, 6), |_| rng.random_range(-1.0..1.0));
    let v = critic_loss(&cp, &gp, &real, &cond, &z, &eps, 0.0).unwrap();
    assert_eq!(v, 0.0);
}

#[test]
fn zero_critic_gives_zero_generator_loss() {
    let gp = GeneratorParams::init(&gen_config(), 7);
    let mut cp = CriticParams::init(&linear_critic_config(), 7);
    cp.zero();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let cond = Array2::from_shape_fn((3, 2), |_| rng.random_range(-1.0..1.0));
    let z = Array2::from_shape_fn((3, 6), |_| rng.random_range(-1.0..1.0));
    let v = generator_loss(&cp, &gp, &cond, &z).unwrap();
    assert_eq!(v, 0.0);
}

#[test]
fn constant_critic_with_default_lambda_gives_ten() {
    // Gap cancels, penalty is (0 - 1)^2 = 1, scaled by lambda = 10.
    let gp = GeneratorParams::init(&gen_config(), 7);
    let mut cp = CriticParams::init(&linear_critic_config(), 7);
    cp.zero();
    cp.head.b[[0]] = -2.5;
    let (real, _, cond, eps) = batch(3, 46);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let z = Array2::from_shape_fn((3, 6), |_| rng.random_range(-1.0..1.0));
    let v = critic_loss(&cp, &gp, &real, &cond, &z, &eps, 10.0).unwrap();
    assert!((v - 10.0).abs() < 1e-12, "loss {v}");
}

#[test]
fn critic_bias_shift_changes_nothing_observable() {
    // The two score expectations cancel the shift in the critic loss, the
    // penalty never sees the bias, and the generator's gradients are built
    // from score differences only.
    let gcfg = gen_config();
    let ccfg = CriticConfig { n_obs: 1, m_cond: 1, steps: H, conv_layers: vec![4, 4] };
    let gp = GeneratorParams::init(&gcfg, 3);
    let cp = CriticParams::init(&ccfg, 3);
    let mut shifted = cp.clone();
    shifted.head.b[[0]] += 5.0;

    let (real, _, cond, eps) = batch(4, 47);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let z = Array2::from_shape_fn((4, 6), |_| rng.random_range(-1.0..1.0));

    let a = critic_loss(&cp, &gp, &real, &cond, &z, &eps, 10.0).unwrap();
    let b = critic_loss(&shifted, &gp, &real, &cond, &z, &eps, 10.0).unwrap();
    assert!((a - b).abs() < 1e-9, "critic loss moved from {a} to {b}");

    let (_, ga) = generator_loss_grads(&cp, &gp, &cond, &z).unwrap();
    let (_, gb) = generator_loss_grads(&shifted, &gp, &cond, &z).unwrap();
    for (ta, tb) in ga.iter().zip(&gb) {
        for (x, y) in ta.iter().zip(tb.iter()) {
            assert!((x - y).abs() < 1e-9, "generator gradient moved from {x} to {y}");
        }
    }
}
