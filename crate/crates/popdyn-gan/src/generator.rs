use crate::config::{GeneratorConfig, HEAD_KERNEL, LEAKY_SLOPE};
use crate::error::GanError;
use crate::layers::{
    batch_norm_eval, batch_norm_train, conv1d_same, deconv1d, dense, BatchStats,
};
use crate::params::GeneratorParams;
use crate::tape::{NodeId, Tape};
use ndarray::{Array2, ArrayD};
use popdyn_dataset::ScalingBounds;
use popdyn_sim::rng::{stream_rng, StreamDomain};
use popdyn_sim::{InitialSetting, Trajectory};
use rand::Rng;
use rand_distr::StandardNormal;

/// Whether normalization and dropout behave as during optimization or as
/// during inference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Train,
    Eval,
}

/// Node ids of the generator tensors inserted into a tape, aligned with
/// [`GeneratorParams::trainable`] and [`GeneratorParams::stats`].
pub(crate) struct GenLeaves {
    pub trainable: Vec<NodeId>,
    pub stats: Vec<NodeId>,
}

pub(crate) fn insert_generator(tape: &mut Tape, gp: &GeneratorParams) -> GenLeaves {
    GenLeaves {
        trainable: gp.trainable().into_iter().map(|t| tape.leaf(t.clone())).collect(),
        stats: gp.stats().into_iter().map(|t| tape.leaf(t.clone())).collect(),
    }
}

/// Builds the generator graph over `x = [cond | z]` rows and returns the
/// scaled trajectory node `[batch*H, n_obs]` plus, in training phase, the
/// batch statistics of every normalization (embedding first).
pub(crate) fn generator_graph(
    tape: &mut Tape,
    cfg: &GeneratorConfig,
    leaves: &GenLeaves,
    x: NodeId,
    batch: usize,
    phase: Phase,
) -> (NodeId, Vec<BatchStats>) {
    let t = &leaves.trainable;
    let s = &leaves.stats;
    let l0 = cfg.initial_len();
    let n_ch = cfg.embed_channels;
    let mut stats = Vec::new();

    // Dense embedding, read as (position, channel) pairs.
    let e = dense(tape, x, t[0], t[1], batch, n_ch * l0);
    let mut h = tape.reshape(e, &[batch * l0, n_ch]);
    let mut rows = batch * l0;
    h = match phase {
        Phase::Train => {
            let (out, st) = batch_norm_train(tape, h, t[2], t[3], rows, n_ch);
            stats.push(st);
            out
        }
        Phase::Eval => batch_norm_eval(tape, h, t[2], t[3], s[0], s[1], rows, n_ch),
    };
    h = tape.leaky_relu(h, LEAKY_SLOPE);

    let mut len = l0;
    let mut c_in = n_ch;
    for (i, &f) in cfg.deconv_filters.iter().enumerate() {
        let base = 4 + 4 * i;
        h = deconv1d(tape, h, t[base], t[base + 1], batch, len, f);
        len *= 2;
        rows = batch * len;
        h = match phase {
            Phase::Train => {
                let (out, st) = batch_norm_train(tape, h, t[base + 2], t[base + 3], rows, f);
                stats.push(st);
                out
            }
            Phase::Eval => batch_norm_eval(
                tape,
                h,
                t[base + 2],
                t[base + 3],
                s[2 + 2 * i],
                s[3 + 2 * i],
                rows,
                f,
            ),
        };
        h = tape.leaky_relu(h, LEAKY_SLOPE);
        c_in = f;
    }
    debug_assert_eq!(len, cfg.steps);

    let base = 4 + 4 * cfg.deconv_filters.len();
    let y = conv1d_same(tape, h, t[base], t[base + 1], batch, len, c_in, cfg.n_obs, HEAD_KERNEL);
    (tape.tanh(y), stats)
}

/// Folds training-phase batch statistics into the running averages with
/// momentum 0.1, converting the biased batch variance to its unbiased
/// form when more than one row contributed.
pub(crate) fn update_running_stats(gp: &mut GeneratorParams, stats: &[BatchStats]) {
    const MOMENTUM: f64 = 0.1;
    let mut sinks = gp.stats_mut();
    debug_assert_eq!(sinks.len(), 2 * stats.len());
    // Sinks 2i and 2i+1 hold layer i's running mean and variance.
    for (i, st) in stats.iter().enumerate() {
        let bessel =
            if st.rows > 1 { st.rows as f64 / (st.rows as f64 - 1.0) } else { 1.0 };
        for (slot, &m) in sinks[2 * i].iter_mut().zip(&st.mean) {
            *slot = (1.0 - MOMENTUM) * *slot + MOMENTUM * m;
        }
        for (slot, &v) in sinks[2 * i + 1].iter_mut().zip(&st.var) {
            *slot = (1.0 - MOMENTUM) * *slot + MOMENTUM * v * bessel;
        }
    }
}

/// Stacks condition rows and noise rows into the generator input block.
pub(crate) fn stack_input(cond: &Array2<f64>, z: &Array2<f64>) -> ArrayD<f64> {
    let b = cond.nrows();
    let d = cond.ncols() + z.ncols();
    let mut x = Array2::<f64>::zeros((b, d));
    for i in 0..b {
        for j in 0..cond.ncols() {
            x[(i, j)] = cond[(i, j)];
        }
        for j in 0..z.ncols() {
            x[(i, cond.ncols() + j)] = z[(i, j)];
        }
    }
    x.into_dyn()
}

/// Runs the generator in inference mode on a batch of conditions and noise
/// rows; returns the scaled output `[batch*H, n_obs]`.
pub(crate) fn generator_eval(
    gp: &GeneratorParams,
    cond: &Array2<f64>,
    z: &Array2<f64>,
) -> Array2<f64> {
    let mut tape = Tape::new();
    let leaves = insert_generator(&mut tape, gp);
    let x = tape.leaf(stack_input(cond, z));
    let (out, _) = generator_graph(&mut tape, gp.cfg(), &leaves, x, cond.nrows(), Phase::Eval);
    let v = tape.value(out);
    v.view().into_dimensionality::<ndarray::Ix2>().unwrap().to_owned()
}

/// One inference pass: maps a scaled condition vector and a noise vector to
/// the scaled trajectory `[H, n_obs]`. Pure function of its inputs.
pub fn generator_forward(
    gp: &GeneratorParams,
    cond: &[f64],
    z: &[f64],
) -> Result<Array2<f64>, GanError> {
    let cfg = gp.cfg();
    if cond.len() != cfg.cond_dim() {
        return Err(GanError::Shape(format!(
            "condition has {} entries, the generator wants {}",
            cond.len(),
            cfg.cond_dim()
        )));
    }
    if z.len() != cfg.noise_dim {
        return Err(GanError::Shape(format!(
            "noise has {} entries, the generator wants {}",
            z.len(),
            cfg.noise_dim
        )));
    }
    let cond = Array2::from_shape_vec((1, cond.len()), cond.to_vec()).unwrap();
    let z = Array2::from_shape_vec((1, z.len()), z.to_vec()).unwrap();
    Ok(generator_eval(gp, &cond, &z))
}

const SAMPLE_CHUNK: usize = 256;

/// Draws `p` trajectories from the trained generator for one initial
/// setting. The condition is scaled with `bounds`, noise vector i comes
/// from noise stream i of `seed`, outputs are mapped back to count units,
/// clamped at zero, and get the observed initial state prepended as row 0.
/// `round` snaps the generated values to integers.
pub fn sample_trajectories(
    gp: &GeneratorParams,
    setting: &InitialSetting,
    observables: &[usize],
    p: usize,
    bounds: &ScalingBounds,
    seed: u64,
    round: bool,
) -> Result<Vec<Trajectory>, GanError> {
    let cfg = gp.cfg();
    if p < 1 {
        return Err(GanError::Shape("need at least one trajectory".into()));
    }
    if observables.len() != cfg.n_obs
        || bounds.species().len() != cfg.n_obs
        || bounds.params().len() != cfg.m_cond
        || setting.theta.len() != cfg.m_cond
    {
        return Err(GanError::Shape(
            "observables, bounds, and parameters must match the generator's shape".into(),
        ));
    }
    if let Some(&bad) = observables.iter().find(|&&c| c >= setting.s0.len()) {
        return Err(GanError::Shape(format!("observable column {bad} is out of range")));
    }

    let s0_obs: Vec<f64> = observables.iter().map(|&c| setting.s0[c]).collect();
    let (cond_row, _) = bounds.scale_condition(&s0_obs, &setting.theta);
    let h = cfg.steps;
    let n = cfg.n_obs;
    let mut out = Vec::with_capacity(p);

    let mut start = 0;
    while start < p {
        let b = SAMPLE_CHUNK.min(p - start);
        let cond = Array2::from_shape_fn((b, cond_row.len()), |(_, j)| cond_row[j]);
        // Each trajectory owns a whole noise stream, so the result does not
        // depend on how the batch is chunked.
        let mut z = Array2::<f64>::zeros((b, cfg.noise_dim));
        for i in 0..b {
            let mut rng = stream_rng(seed, StreamDomain::Noise, (start + i) as u64);
            for j in 0..cfg.noise_dim {
                z[(i, j)] = rng.sample(StandardNormal);
            }
        }
        let scaled = generator_eval(gp, &cond, &z);
        for i in 0..b {
            let mut values = Array2::<f64>::zeros((h + 1, n));
            for (c, &v) in s0_obs.iter().enumerate() {
                values[(0, c)] = v;
            }
            for t in 0..h {
                for c in 0..n {
                    let (lo, hi) = bounds.species()[c];
                    let x = lo + (scaled[(i * h + t, c)] + 1.0) * (hi - lo) / 2.0;
                    let x = x.max(0.0);
                    values[(t + 1, c)] = if round { x.round() } else { x };
                }
            }
            out.push(Trajectory::new(values).expect("generated block is well-formed"));
        }
        start += b;
    }
    Ok(out)
}
