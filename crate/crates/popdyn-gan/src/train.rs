//! Adversarial training loop: several critic updates per generator update,
//! minibatches drawn uniformly with replacement from the dataset.

use crate::config::{CriticConfig, GeneratorConfig, TrainConfig};
use crate::critic::{critic_graph, insert_critic};
use crate::error::GanError;
use crate::generator::{generator_graph, insert_generator, stack_input, update_running_stats, Phase};
use crate::loss::{flatten_batch, penalty_subgraph};
use crate::params::{CriticParams, GeneratorParams};
use crate::tape::{Gradients, NodeId, Tape};
use ndarray::{Array2, Array3, ArrayD};
use popdyn_dataset::Dataset;
use popdyn_sim::rng::{stream_rng, StreamDomain};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::time::Instant;

const ADAM_EPS: f64 = 1e-8;

/// Per-cycle training telemetry. A cycle is one block of critic updates
/// followed by one generator update; losses are those of the block's last
/// critic step and the generator step.
#[derive(Debug, Clone, Serialize)]
pub struct CycleRecord {
    pub epoch: usize,
    pub cycle: usize,
    pub critic_loss: f64,
    pub gen_loss: f64,
    pub gradient_penalty: f64,
    pub wall_ms: f64,
}

/// Full training history plus update counters.
#[derive(Debug, Clone, Serialize)]
pub struct TrainLog {
    pub records: Vec<CycleRecord>,
    pub critic_steps: usize,
    pub gen_steps: usize,
}

/// Bias-corrected adaptive moment optimizer over a fixed tensor list.
pub(crate) struct Adam {
    alpha: f64,
    beta1: f64,
    beta2: f64,
    t: i32,
    m: Vec<ArrayD<f64>>,
    v: Vec<ArrayD<f64>>,
}

impl Adam {
    pub fn new(params: &[&ArrayD<f64>], alpha: f64, beta1: f64, beta2: f64) -> Self {
        let m = params.iter().map(|p| ArrayD::zeros(p.raw_dim())).collect();
        let v = params.iter().map(|p| ArrayD::zeros(p.raw_dim())).collect();
        Adam { alpha, beta1, beta2, t: 0, m, v }
    }

    pub fn step(&mut self, params: Vec<&mut ArrayD<f64>>, grads: &[ArrayD<f64>]) {
        assert_eq!(params.len(), grads.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for ((p, g), (m, v)) in
            params.into_iter().zip(grads).zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            for ((pe, &ge), (me, ve)) in
                p.iter_mut().zip(g.iter()).zip(m.iter_mut().zip(v.iter_mut()))
            {
                *me = self.beta1 * *me + (1.0 - self.beta1) * ge;
                *ve = self.beta2 * *ve + (1.0 - self.beta2) * ge * ge;
                let mh = *me / bc1;
                let vh = *ve / bc2;
                *pe -= self.alpha * mh / (vh.sqrt() + ADAM_EPS);
            }
        }
    }
}

/// Reads the gradient for each leaf, materializing zeros for leaves the
/// loss does not depend on.
fn extract_grads(tape: &Tape, grads: &Gradients, leaves: &[NodeId]) -> Vec<ArrayD<f64>> {
    leaves
        .iter()
        .map(|&id| match grads.get(id) {
            Some(g) => tape.value(g).clone(),
            None => ArrayD::zeros(tape.value(id).raw_dim()),
        })
        .collect()
}

/// Copies the minibatch rows at `idx` out of the dataset: scaled conditions
/// `[B, n+m]` and scaled trajectories `[B, H, n]` without the initial row,
/// which the condition already carries.
fn gather_batch(ds: &Dataset, idx: &[usize]) -> (Array2<f64>, Array3<f64>) {
    let h = ds.meta.grid.steps();
    let n = ds.meta.n_obs;
    let c = ds.settings.ncols();
    let mut cond = Array2::zeros((idx.len(), c));
    let mut real = Array3::zeros((idx.len(), h, n));
    for (row, &i) in idx.iter().enumerate() {
        for j in 0..c {
            cond[(row, j)] = ds.settings[(i, j)] as f64;
        }
        for t in 0..h {
            for s in 0..n {
                real[(row, t, s)] = ds.trajectories[(i, t + 1, s)] as f64;
            }
        }
    }
    (cond, real)
}

fn draw_noise(rng: &mut ChaCha8Rng, rows: usize, dim: usize) -> Array2<f64> {
    let mut z = Array2::zeros((rows, dim));
    for v in z.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    z
}

fn check_compat(
    ds: &Dataset,
    gcfg: &GeneratorConfig,
    ccfg: &CriticConfig,
) -> Result<(), GanError> {
    if gcfg.n_obs != ccfg.n_obs || gcfg.m_cond != ccfg.m_cond || gcfg.steps != ccfg.steps {
        return Err(GanError::Config(format!(
            "generator ({}, {}, {}) and critic ({}, {}, {}) disagree on (n_obs, m_cond, steps)",
            gcfg.n_obs, gcfg.m_cond, gcfg.steps, ccfg.n_obs, ccfg.m_cond, ccfg.steps
        )));
    }
    if ds.meta.n_obs != gcfg.n_obs || ds.meta.m_cond != gcfg.m_cond {
        return Err(GanError::DatasetMismatch(format!(
            "dataset has n_obs={}, m_cond={} but the networks expect n_obs={}, m_cond={}",
            ds.meta.n_obs, ds.meta.m_cond, gcfg.n_obs, gcfg.m_cond
        )));
    }
    if ds.meta.grid.steps() != gcfg.steps {
        return Err(GanError::DatasetMismatch(format!(
            "dataset trajectories have {} steps but the networks expect {}",
            ds.meta.grid.steps(), gcfg.steps
        )));
    }
    if ds.len() == 0 {
        return Err(GanError::DatasetMismatch("dataset is empty".into()));
    }
    Ok(())
}

/// Trains a generator against a fresh critic on a scaled dataset.
///
/// Each epoch visits `len / batch` minibatches (at least one); each
/// minibatch cycle performs `n_critic` critic updates on fresh batches,
/// noise, and interpolation draws, then one generator update. Returns the
/// trained generator together with the loss history. Fails with
/// [`GanError::Diverged`] if a loss turns non-finite.
pub fn train(
    ds: &Dataset,
    gcfg: &GeneratorConfig,
    ccfg: &CriticConfig,
    tcfg: &TrainConfig,
) -> Result<(GeneratorParams, TrainLog), GanError> {
    gcfg.validate()?;
    ccfg.validate()?;
    tcfg.validate()?;
    check_compat(ds, gcfg, ccfg)?;

    let p = ds.len();
    let m_eff = tcfg.batch_size.min(p);
    if m_eff < 2 {
        return Err(GanError::Config(format!(
            "minibatches need at least 2 pairs, got {m_eff}"
        )));
    }
    let cycles = (p / m_eff).max(1);
    let h = gcfg.steps;
    let n = gcfg.n_obs;

    let mut gp = GeneratorParams::init(gcfg, tcfg.seed);
    let mut cp = CriticParams::init(ccfg, tcfg.seed);
    let mut adam_g = Adam::new(&gp.trainable(), tcfg.alpha, tcfg.beta1, tcfg.beta2);
    let mut adam_c = Adam::new(&cp.trainable(), tcfg.alpha, tcfg.beta1, tcfg.beta2);

    let mut train_rng = stream_rng(tcfg.seed, StreamDomain::Train, 0);
    let mut noise_rng = stream_rng(tcfg.seed, StreamDomain::Noise, 0);

    let mut records = Vec::with_capacity(tcfg.epochs * cycles);
    let mut critic_steps = 0usize;
    let mut gen_steps = 0usize;

    for epoch in 0..tcfg.epochs {
        for cycle in 0..cycles {
            let clock = Instant::now();
            let mut last_critic_loss = 0.0;
            let mut last_penalty = 0.0;

            for _ in 0..tcfg.n_critic {
                let idx: Vec<usize> =
                    (0..m_eff).map(|_| train_rng.random_range(0..p)).collect();
                let (cond, real) = gather_batch(ds, &idx);
                let z = draw_noise(&mut noise_rng, m_eff, gcfg.noise_dim);

                // Fakes are constants for the critic: run the generator on
                // its own tape (training phase: batch statistics) and carry
                // only the values over.
                let fake = {
                    let mut gt = Tape::new();
                    let leaves = insert_generator(&mut gt, &gp);
                    let x = gt.leaf(stack_input(&cond, &z));
                    let (out, stats) =
                        generator_graph(&mut gt, gcfg, &leaves, x, m_eff, Phase::Train);
                    update_running_stats(&mut gp, &stats);
                    gt.value(out).view().into_dimensionality::<ndarray::Ix2>().unwrap().to_owned()
                };

                let mut tape = Tape::new();
                let leaves = insert_critic(&mut tape, &cp);
                let xr = tape.leaf2(flatten_batch(&real));
                let xf = tape.leaf2(fake);
                let cn = tape.leaf2(cond.clone());
                let sr =
                    critic_graph(&mut tape, ccfg, &leaves, xr, cn, m_eff, Phase::Train, &mut train_rng);
                let sf =
                    critic_graph(&mut tape, ccfg, &leaves, xf, cn, m_eff, Phase::Train, &mut train_rng);
                let mr = tape.mean_all(sr);
                let mf = tape.mean_all(sf);
                let gap = tape.sub(mf, mr);
                let eps: Vec<f64> = (0..m_eff).map(|_| train_rng.random()).collect();
                let pen = penalty_subgraph(
                    &mut tape,
                    ccfg,
                    &leaves,
                    xr,
                    xf,
                    cn,
                    &eps,
                    Phase::Train,
                    &mut train_rng,
                );
                let scaled = tape.mul_scalar(pen, tcfg.lambda_gp);
                let loss = tape.add(gap, scaled);

                let value = tape.scalar(loss);
                if !value.is_finite() {
                    return Err(GanError::Diverged { update: critic_steps + gen_steps + 1, value });
                }
                last_critic_loss = value;
                last_penalty = tape.scalar(pen);

                let grads = tape.backward(loss);
                let gvals = extract_grads(&tape, &grads, &leaves.trainable);
                adam_c.step(cp.trainable_mut(), &gvals);
                critic_steps += 1;
            }

            let idx: Vec<usize> = (0..m_eff).map(|_| train_rng.random_range(0..p)).collect();
            let (cond, _) = gather_batch(ds, &idx);
            let z = draw_noise(&mut noise_rng, m_eff, gcfg.noise_dim);

            let mut tape = Tape::new();
            let gleaves = insert_generator(&mut tape, &gp);
            let cleaves = insert_critic(&mut tape, &cp);
            let x = tape.leaf(stack_input(&cond, &z));
            let (traj, stats) = generator_graph(&mut tape, gcfg, &gleaves, x, m_eff, Phase::Train);
            update_running_stats(&mut gp, &stats);
            debug_assert_eq!(tape.value(traj).shape(), &[m_eff * h, n]);
            let cn = tape.leaf2(cond);
            let sf =
                critic_graph(&mut tape, ccfg, &cleaves, traj, cn, m_eff, Phase::Train, &mut train_rng);
            let m = tape.mean_all(sf);
            let loss = tape.neg(m);

            let gen_loss = tape.scalar(loss);
            if !gen_loss.is_finite() {
                return Err(GanError::Diverged {
                    update: critic_steps + gen_steps + 1,
                    value: gen_loss,
                });
            }

            let grads = tape.backward(loss);
            let gvals = extract_grads(&tape, &grads, &gleaves.trainable);
            adam_g.step(gp.trainable_mut(), &gvals);
            gen_steps += 1;

            records.push(CycleRecord {
                epoch,
                cycle,
                critic_loss: last_critic_loss,
                gen_loss,
                gradient_penalty: last_penalty,
                wall_ms: clock.elapsed().as_secs_f64() * 1e3,
            });
        }
    }

    Ok((gp, TrainLog { records, critic_steps, gen_steps }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn adam_first_step_moves_by_alpha() {
        // With bias correction the first update is alpha * g / (|g| + eps).
        let p0: ArrayD<f64> = array![0.0_f64].into_dyn();
        let mut adam = Adam::new(&[&p0], 0.1, 0.5, 0.9);
        let mut p = p0.clone();
        let g: ArrayD<f64> = array![2.0_f64].into_dyn();
        adam.step(vec![&mut p], std::slice::from_ref(&g));
        let expected = -0.1 * 2.0 / (2.0 + ADAM_EPS);
        assert!((p[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn adam_descends_a_parabola() {
        let p0: ArrayD<f64> = array![5.0_f64].into_dyn();
        let mut adam = Adam::new(&[&p0], 0.05, 0.5, 0.9);
        let mut p = p0.clone();
        for _ in 0..500 {
            let g: ArrayD<f64> = array![2.0 * p[0]].into_dyn();
            adam.step(vec![&mut p], std::slice::from_ref(&g));
        }
        assert!(p[0].abs() < 0.05, "got {}", p[0]);
    }
}
