use crate::config::{CriticConfig, DROPOUT_P, LEAKY_SLOPE};
use crate::error::GanError;
use crate::generator::Phase;
use crate::layers::{conv1d, dense, dropout, layer_norm};
use crate::params::CriticParams;
use crate::tape::{NodeId, Tape};
use ndarray::Array2;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Node ids of the critic tensors, aligned with
/// [`CriticParams::trainable`].
pub(crate) struct CriticLeaves {
    pub trainable: Vec<NodeId>,
}

pub(crate) fn insert_critic(tape: &mut Tape, cp: &CriticParams) -> CriticLeaves {
    CriticLeaves {
        trainable: cp.trainable().into_iter().map(|t| tape.leaf(t.clone())).collect(),
    }
}

/// Joins a trajectory block `[B*H, n_obs]` and condition rows
/// `[B, n_obs+m_cond]` into the critic's input `[B*(H+1), n_obs+m_cond]`:
/// time step 0 carries the conditioning state, steps 1..=H the trajectory,
/// and the parameter channels repeat the parameters at every step.
pub(crate) fn assemble_input(
    tape: &mut Tape,
    cfg: &CriticConfig,
    traj: NodeId,
    cond: NodeId,
    batch: usize,
) -> NodeId {
    let h = cfg.steps;
    let n = cfg.n_obs;
    let m = cfg.m_cond;
    let c = n + m;
    let rows = batch * (h + 1);
    let out_shape = [rows, c];

    // Trajectory values land at steps 1..=H of the species channels.
    let mut traj_map = Vec::with_capacity(batch * h * n);
    for b in 0..batch {
        for t in 0..h {
            for ci in 0..n {
                traj_map.push((b * (h + 1) + t + 1) * c + ci);
            }
        }
    }
    let mut x = tape.scatter(traj, Arc::new(traj_map), &out_shape);

    // The observed initial state occupies step 0 of the species channels.
    let mut s0_map = Vec::with_capacity(batch * n);
    for b in 0..batch {
        for ci in 0..n {
            s0_map.push(b * c + ci);
        }
    }
    let s0 = tape.gather(cond, Arc::new(s0_map), &[batch, n]);
    let mut s0_place = Vec::with_capacity(batch * n);
    for b in 0..batch {
        for ci in 0..n {
            s0_place.push((b * (h + 1)) * c + ci);
        }
    }
    let s0_planted = tape.scatter(s0, Arc::new(s0_place), &out_shape);
    x = tape.add(x, s0_planted);

    if m > 0 {
        // Parameters broadcast along the whole time axis, step 0 included.
        let mut theta_map = Vec::with_capacity(rows * m);
        for b in 0..batch {
            for _t in 0..=h {
                for ci in 0..m {
                    theta_map.push(b * (n + m) + n + ci);
                }
            }
        }
        let theta = tape.gather(cond, Arc::new(theta_map), &[rows, m]);
        let mut theta_place = Vec::with_capacity(rows * m);
        for r in 0..rows {
            for ci in 0..m {
                theta_place.push(r * c + n + ci);
            }
        }
        let planted = tape.scatter(theta, Arc::new(theta_place), &out_shape);
        x = tape.add(x, planted);
    }
    x
}

/// Builds the critic graph and returns the `[batch, 1]` score node.
/// Dropout runs only in the training phase and draws its masks from `rng`.
pub(crate) fn critic_graph(
    tape: &mut Tape,
    cfg: &CriticConfig,
    leaves: &CriticLeaves,
    traj: NodeId,
    cond: NodeId,
    batch: usize,
    phase: Phase,
    rng: &mut ChaCha8Rng,
) -> NodeId {
    let t = &leaves.trainable;
    let mut h = assemble_input(tape, cfg, traj, cond, batch);
    let mut c_in = cfg.cond_dim();
    let mut len = cfg.steps + 1;
    for (i, &f) in cfg.conv_layers.iter().enumerate() {
        let base = 4 * i;
        h = conv1d(tape, h, t[base], t[base + 1], batch, len, c_in, f);
        len /= 2;
        h = layer_norm(tape, h, t[base + 2], t[base + 3], batch, len, f);
        h = tape.leaky_relu(h, LEAKY_SLOPE);
        if phase == Phase::Train {
            h = dropout(tape, h, DROPOUT_P, &[batch * len, f], rng);
        }
        c_in = f;
    }
    let flat = tape.reshape(h, &[batch, len * c_in]);
    let base = 4 * cfg.conv_layers.len();
    dense(tape, flat, t[base], t[base + 1], batch, 1)
}

/// Scores one scaled trajectory under its condition, in inference mode
/// (no dropout). The input tensor is assembled exactly as in training.
pub fn critic_forward(
    cp: &CriticParams,
    traj: &Array2<f64>,
    cond: &[f64],
) -> Result<f64, GanError> {
    let cfg = cp.cfg();
    if traj.nrows() != cfg.steps || traj.ncols() != cfg.n_obs {
        return Err(GanError::Shape(format!(
            "trajectory is {}x{}, the critic wants {}x{}",
            traj.nrows(),
            traj.ncols(),
            cfg.steps,
            cfg.n_obs
        )));
    }
    if cond.len() != cfg.cond_dim() {
        return Err(GanError::Shape(format!(
            "condition has {} entries, the critic wants {}",
            cond.len(),
            cfg.cond_dim()
        )));
    }
    let mut tape = Tape::new();
    let leaves = insert_critic(&mut tape, cp);
    let tn = tape.leaf2(traj.clone());
    let cn = tape.leaf2(Array2::from_shape_vec((1, cond.len()), cond.to_vec()).unwrap());
    let mut rng = popdyn_sim::rng::stream_rng(0, popdyn_sim::rng::StreamDomain::Train, 0);
    let score = critic_graph(&mut tape, cfg, &leaves, tn, cn, 1, Phase::Eval, &mut rng);
    Ok(tape.scalar(score))
}
