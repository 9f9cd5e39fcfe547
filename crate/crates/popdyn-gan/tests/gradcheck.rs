//! Central finite-difference checks of every parameter gradient of both
//! losses on a tiny configuration, including the second-order path through
//! the gradient penalty.

use ndarray::{Array2, Array3};
use popdyn_gan::{
    critic_loss, critic_loss_grads, generator_loss, generator_loss_grads, CriticConfig,
    CriticParams, GeneratorConfig, GeneratorParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H_FD: f64 = 1e-4;
const TOL: f64 = 1e-3;

fn tiny_gen_config() -> GeneratorConfig {
    GeneratorConfig {
        n_obs: 1,
        m_cond: 1,
        steps: 16,
        noise_dim: 6,
        embed_channels: 8,
        deconv_filters: vec![4, 4],
    }
}

fn tiny_critic_config() -> CriticConfig {
    CriticConfig { n_obs: 1, m_cond: 1, steps: 16, conv_layers: vec![4, 4] }
}

fn rel_err(a: f64, f: f64) -> f64 {
    (a - f).abs() / a.abs().max(f.abs()).max(1e-3)
}

fn random_batch(b: usize, rng: &mut ChaCha8Rng) -> (Array3<f64>, Array2<f64>, Array2<f64>, Vec<f64>) {
    let real = Array3::from_shape_fn((b, 16, 1), |_| rng.random_range(-1.0..1.0));
    let cond = Array2::from_shape_fn((b, 2), |_| rng.random_range(-1.0..1.0));
    let z = Array2::from_shape_fn((b, 6), |_| rng.random_range(-1.0..1.0));
    let eps: Vec<f64> = (0..b).map(|_| rng.random_range(0.05..0.95)).collect();
    (real, cond, z, eps)
}

/// Checks analytic against central finite-difference gradients for the
/// critic parameters, keeping only every `stride`-th entry to bound cost.
fn check_critic(b: usize, stride: usize, seed: u64) {
    let gcfg = tiny_gen_config();
    let ccfg = tiny_critic_config();
    let gp = GeneratorParams::init(&gcfg, seed);
    let mut cp = CriticParams::init(&ccfg, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfd);
    let (real, cond, z, eps) = random_batch(b, &mut rng);
    let lambda = 10.0;

    let (_, grads) = critic_loss_grads(&cp, &gp, &real, &cond, &z, &eps, lambda).unwrap();
    let mut worst = 0.0_f64;
    let n_tensors = grads.len();
    for ti in 0..n_tensors {
        for j in (0..grads[ti].len()).step_by(stride) {
            let orig = cp.trainable()[ti].as_slice().unwrap()[j];
            cp.trainable_mut()[ti].as_slice_mut().unwrap()[j] = orig + H_FD;
            let up = critic_loss(&cp, &gp, &real, &cond, &z, &eps, lambda).unwrap();
            cp.trainable_mut()[ti].as_slice_mut().unwrap()[j] = orig - H_FD;
            let dn = critic_loss(&cp, &gp, &real, &cond, &z, &eps, lambda).unwrap();
            cp.trainable_mut()[ti].as_slice_mut().unwrap()[j] = orig;
            let fd = (up - dn) / (2.0 * H_FD);
            let an = grads[ti].as_slice().unwrap()[j];
            let err = rel_err(an, fd);
            worst = worst.max(err);
            assert!(
                err < TOL,
                "critic tensor {ti} entry {j}: analytic {an}, finite difference {fd}, rel {err}"
            );
        }
    }
    assert!(worst > 0.0, "the check must have compared something");
}

/// Same for the generator parameters through critic score and tanh head.
fn check_generator(b: usize, stride: usize, seed: u64) {
    let gcfg = tiny_gen_config();
    let ccfg = tiny_critic_config();
    let mut gp = GeneratorParams::init(&gcfg, seed);
    let cp = CriticParams::init(&ccfg, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xec);
    let (_, cond, z, _) = random_batch(b, &mut rng);

    let (_, grads) = generator_loss_grads(&cp, &gp, &cond, &z).unwrap();
    for ti in 0..grads.len() {
        for j in (0..grads[ti].len()).step_by(stride) {
            let orig = gp.trainable()[ti].as_slice().unwrap()[j];
            gp.trainable_mut()[ti].as_slice_mut().unwrap()[j] = orig + H_FD;
            let up = generator_loss(&cp, &gp, &cond, &z).unwrap();
            gp.trainable_mut()[ti].as_slice_mut().unwrap()[j] = orig - H_FD;
            let dn = generator_loss(&cp, &gp, &cond, &z).unwrap();
            gp.trainable_mut()[ti].as_slice_mut().unwrap()[j] = orig;
            let fd = (up - dn) / (2.0 * H_FD);
            let an = grads[ti].as_slice().unwrap()[j];
            let err = rel_err(an, fd);
            assert!(
                err < TOL,
                "generator tensor {ti} entry {j}: analytic {an}, finite difference {fd}, rel {err}"
            );
        }
    }
}

#[test]
fn critic_gradients_match_finite_differences_single_sample() {
    check_critic(1, 1, 11);
}

#[test]
fn critic_gradients_match_finite_differences_batch() {
    check_critic(3, 5, 12);
}

#[test]
fn generator_gradients_match_finite_differences_single_sample() {
    check_generator(1, 1, 21);
}

#[test]
fn generator_gradients_match_finite_differences_batch() {
    check_generator(3, 7, 22);
}
