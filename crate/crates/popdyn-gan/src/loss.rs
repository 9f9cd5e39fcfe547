//! Loss estimators. The training objective scores real against generated
//! trajectories under a shared condition and regularizes the critic toward
//! unit gradient norm along straight lines between the two.

use crate::critic::{critic_graph, insert_critic, CriticLeaves};
use crate::error::GanError;
use crate::generator::{generator_eval, Phase};
use crate::params::{CriticParams, GeneratorParams};
use crate::tape::{NodeId, Tape};
use ndarray::{Array2, Array3, ArrayD};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Flattens `[B, H, n]` sample blocks to the `[B*H, n]` activation layout.
pub(crate) fn flatten_batch(x: &Array3<f64>) -> Array2<f64> {
    let (b, h, n) = x.dim();
    let mut out = Array2::zeros((b * h, n));
    for bi in 0..b {
        for t in 0..h {
            for c in 0..n {
                out[(bi * h + t, c)] = x[(bi, t, c)];
            }
        }
    }
    out
}

/// Per-pair interpolation x̂ = ε x + (1-ε) x̃ as a tape node, with ε
/// constant; both endpoints must already be `[B*H, n]` nodes.
fn interpolate(
    tape: &mut Tape,
    x_real: NodeId,
    x_fake: NodeId,
    eps: &[f64],
    h: usize,
    n: usize,
) -> NodeId {
    let b = eps.len();
    let mut e = Array2::zeros((b * h, n));
    let mut em1 = Array2::zeros((b * h, n));
    for bi in 0..b {
        for t in 0..h {
            for c in 0..n {
                e[(bi * h + t, c)] = eps[bi];
                em1[(bi * h + t, c)] = 1.0 - eps[bi];
            }
        }
    }
    let en = tape.leaf2(e);
    let emn = tape.leaf2(em1);
    let a = tape.mul(x_real, en);
    let bb = tape.mul(x_fake, emn);
    tape.add(a, bb)
}

/// Appends the gradient-penalty subgraph: differentiates the summed critic
/// scores at the interpolates with respect to the interpolated trajectory
/// (conditions stay constant), and penalizes the distance of each sample's
/// gradient norm from 1. Returns the scalar penalty node; everything stays
/// differentiable, so a later backward pass trains through it exactly.
pub(crate) fn penalty_subgraph(
    tape: &mut Tape,
    cfg: &crate::config::CriticConfig,
    leaves: &CriticLeaves,
    x_real: NodeId,
    x_fake: NodeId,
    cond: NodeId,
    eps: &[f64],
    phase: Phase,
    rng: &mut ChaCha8Rng,
) -> NodeId {
    let b = eps.len();
    let (h, n) = (cfg.steps, cfg.n_obs);
    let x_hat = interpolate(tape, x_real, x_fake, eps, h, n);
    let scores = critic_graph(tape, cfg, leaves, x_hat, cond, b, phase, rng);
    let total = tape.sum_all(scores);
    let grads = tape.backward(total);
    // A critic that ignores its input (all-zero weights) has gradient zero,
    // which the graph expresses as "no dependence"; materialize the zeros.
    let g = grads.get(x_hat).unwrap_or_else(|| {
        tape.leaf(ArrayD::zeros(ndarray::IxDyn(&[b * h, n])))
    });
    let sq = tape.pow_const(g, 2.0);
    let mut sample_map = Vec::with_capacity(b * h * n);
    for bi in 0..b {
        for _ in 0..h * n {
            sample_map.push(bi);
        }
    }
    let sums = tape.scatter(sq, Arc::new(sample_map), &[b]);
    let norms = tape.pow_const(sums, 0.5);
    let dist = tape.add_scalar(norms, -1.0);
    let sqdist = tape.pow_const(dist, 2.0);
    tape.mean_all(sqdist)
}

fn check_batch(
    cfg: &crate::config::CriticConfig,
    real: &Array3<f64>,
    fake: &Array3<f64>,
    cond: &Array2<f64>,
    eps: &[f64],
) -> Result<(), GanError> {
    let want = (real.dim().0, cfg.steps, cfg.n_obs);
    if real.dim() != want || fake.dim() != want {
        return Err(GanError::Shape(format!(
            "trajectory batches must be {want:?}, got {:?} and {:?}",
            real.dim(),
            fake.dim()
        )));
    }
    if cond.nrows() != real.dim().0 || cond.ncols() != cfg.cond_dim() {
        return Err(GanError::Shape(format!(
            "conditions must be [{}, {}], got {:?}",
            real.dim().0,
            cfg.cond_dim(),
            cond.dim()
        )));
    }
    if eps.len() != real.dim().0 {
        return Err(GanError::Shape("one interpolation draw per pair is required".into()));
    }
    Ok(())
}

/// Mean squared distance of the critic's interpolate-gradient norms from 1,
/// evaluated in inference mode (no dropout). This is the penalty before
/// multiplication by λ.
pub fn gradient_penalty(
    cp: &CriticParams,
    real: &Array3<f64>,
    fake: &Array3<f64>,
    cond: &Array2<f64>,
    eps: &[f64],
) -> Result<f64, GanError> {
    check_batch(cp.cfg(), real, fake, cond, eps)?;
    let mut tape = Tape::new();
    let leaves = insert_critic(&mut tape, cp);
    let xr = tape.leaf2(flatten_batch(real));
    let xf = tape.leaf2(flatten_batch(fake));
    let cn = tape.leaf2(cond.clone());
    let mut rng = popdyn_sim::rng::stream_rng(0, popdyn_sim::rng::StreamDomain::Train, 0);
    let gp =
        penalty_subgraph(&mut tape, cp.cfg(), &leaves, xr, xf, cn, eps, Phase::Eval, &mut rng);
    Ok(tape.scalar(gp))
}

/// Builds the critic objective on an existing tape from node endpoints:
/// mean C(fake) - mean C(real) + λ·penalty.
#[allow(clippy::too_many_arguments)]
fn critic_loss_graph(
    tape: &mut Tape,
    ccfg: &crate::config::CriticConfig,
    leaves: &CriticLeaves,
    xr: NodeId,
    xf: NodeId,
    cn: NodeId,
    b: usize,
    eps: &[f64],
    lambda: f64,
) -> NodeId {
    let mut rng = popdyn_sim::rng::stream_rng(0, popdyn_sim::rng::StreamDomain::Train, 0);
    let sr = critic_graph(tape, ccfg, leaves, xr, cn, b, Phase::Eval, &mut rng);
    let sf = critic_graph(tape, ccfg, leaves, xf, cn, b, Phase::Eval, &mut rng);
    let mr = tape.mean_all(sr);
    let mf = tape.mean_all(sf);
    let gap = tape.sub(mf, mr);
    let pen = penalty_subgraph(tape, ccfg, leaves, xr, xf, cn, eps, Phase::Eval, &mut rng);
    let scaled = tape.mul_scalar(pen, lambda);
    tape.add(gap, scaled)
}

fn critic_loss_tape(
    cp: &CriticParams,
    gp: &GeneratorParams,
    real: &Array3<f64>,
    cond: &Array2<f64>,
    z: &Array2<f64>,
    eps: &[f64],
    lambda: f64,
) -> Result<(Tape, CriticLeaves, NodeId), GanError> {
    let ccfg = cp.cfg();
    let b = real.dim().0;
    if z.nrows() != b || z.ncols() != gp.cfg().noise_dim {
        return Err(GanError::Shape("one noise row per sample is required".into()));
    }
    if cond.ncols() != ccfg.cond_dim() {
        return Err(GanError::Shape("condition width mismatch".into()));
    }
    let fake = generator_eval(gp, cond, z);
    let fake3 = Array3::from_shape_fn((b, ccfg.steps, ccfg.n_obs), |(bi, t, c)| {
        fake[(bi * ccfg.steps + t, c)]
    });
    check_batch(ccfg, real, &fake3, cond, eps)?;

    let mut tape = Tape::new();
    let leaves = insert_critic(&mut tape, cp);
    let xr = tape.leaf2(flatten_batch(real));
    let xf = tape.leaf2(fake);
    let cn = tape.leaf2(cond.clone());
    let loss = critic_loss_graph(&mut tape, ccfg, &leaves, xr, xf, cn, b, eps, lambda);
    Ok((tape, leaves, loss))
}

/// The critic's minimization target on one batch:
/// mean C(fake) - mean C(real) + λ·penalty, with fakes drawn from the
/// generator in inference mode using the provided noise rows.
pub fn critic_loss(
    cp: &CriticParams,
    gp: &GeneratorParams,
    real: &Array3<f64>,
    cond: &Array2<f64>,
    z: &Array2<f64>,
    eps: &[f64],
    lambda: f64,
) -> Result<f64, GanError> {
    let (tape, _, loss) = critic_loss_tape(cp, gp, real, cond, z, eps, lambda)?;
    Ok(tape.scalar(loss))
}

/// [`critic_loss`] together with its exact gradient for every critic
/// parameter, in the same order as [`CriticParams::trainable`]. The penalty
/// term is differentiated exactly, so these gradients include the
/// second-order path through the critic's input gradient.
pub fn critic_loss_grads(
    cp: &CriticParams,
    gp: &GeneratorParams,
    real: &Array3<f64>,
    cond: &Array2<f64>,
    z: &Array2<f64>,
    eps: &[f64],
    lambda: f64,
) -> Result<(f64, Vec<ArrayD<f64>>), GanError> {
    let (mut tape, leaves, loss) = critic_loss_tape(cp, gp, real, cond, z, eps, lambda)?;
    let value = tape.scalar(loss);
    let grads = tape.backward(loss);
    let gvals = leaves
        .trainable
        .iter()
        .map(|&id| match grads.get(id) {
            Some(g) => tape.value(g).clone(),
            None => ArrayD::zeros(tape.value(id).raw_dim()),
        })
        .collect();
    Ok((value, gvals))
}

fn generator_loss_tape(
    cp: &CriticParams,
    gp: &GeneratorParams,
    cond: &Array2<f64>,
    z: &Array2<f64>,
) -> Result<(Tape, crate::generator::GenLeaves, NodeId), GanError> {
    let ccfg = cp.cfg();
    if cond.ncols() != ccfg.cond_dim() {
        return Err(GanError::Shape("condition width mismatch".into()));
    }
    if z.nrows() != cond.nrows() || z.ncols() != gp.cfg().noise_dim {
        return Err(GanError::Shape("one noise row per condition is required".into()));
    }
    let b = cond.nrows();
    let mut tape = Tape::new();
    let gleaves = crate::generator::insert_generator(&mut tape, gp);
    let cleaves = insert_critic(&mut tape, cp);
    let x = tape.leaf(crate::generator::stack_input(cond, z));
    let (traj, _) =
        crate::generator::generator_graph(&mut tape, gp.cfg(), &gleaves, x, b, Phase::Eval);
    let cn = tape.leaf2(cond.clone());
    let mut rng = popdyn_sim::rng::stream_rng(0, popdyn_sim::rng::StreamDomain::Train, 0);
    let sf = critic_graph(&mut tape, ccfg, &cleaves, traj, cn, b, Phase::Eval, &mut rng);
    let m = tape.mean_all(sf);
    let loss = tape.neg(m);
    Ok((tape, gleaves, loss))
}

/// The generator's minimization target: -mean C(fake), with fakes drawn in
/// inference mode from the provided noise rows.
pub fn generator_loss(
    cp: &CriticParams,
    gp: &GeneratorParams,
    cond: &Array2<f64>,
    z: &Array2<f64>,
) -> Result<f64, GanError> {
    let (tape, _, loss) = generator_loss_tape(cp, gp, cond, z)?;
    Ok(tape.scalar(loss))
}

/// [`generator_loss`] together with its exact gradient for every generator
/// parameter, in the same order as [`GeneratorParams::trainable`].
pub fn generator_loss_grads(
    cp: &CriticParams,
    gp: &GeneratorParams,
    cond: &Array2<f64>,
    z: &Array2<f64>,
) -> Result<(f64, Vec<ArrayD<f64>>), GanError> {
    let (mut tape, gleaves, loss) = generator_loss_tape(cp, gp, cond, z)?;
    let value = tape.scalar(loss);
    let grads = tape.backward(loss);
    let gvals = gleaves
        .trainable
        .iter()
        .map(|&id| match grads.get(id) {
            Some(g) => tape.value(g).clone(),
            None => ArrayD::zeros(tape.value(id).raw_dim()),
        })
        .collect();
    Ok((value, gvals))
}
