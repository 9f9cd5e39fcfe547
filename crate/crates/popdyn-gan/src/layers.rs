//! Network building blocks expressed as tape subgraphs.
//!
//! Activations live in a `[B*L, C]` layout: row `b*L + l` holds the C
//! channels of sample b at sequence position l. Convolutions become a
//! gather (window extraction) followed by a matrix product; transposed
//! convolutions are a matrix product followed by a scatter (overlap-add),
//! the exact adjoint of the corresponding convolution. All index maps are
//! built per call; their cost is linear and dwarfed by the matmuls.

use crate::config::{KERNEL, PADDING, STRIDE};
use crate::tape::{NodeId, Tape};
use std::sync::Arc;

/// Maps `[B*L, C]` into `[B*(L+2*PADDING), C]`, shifting each position by
/// the padding; the scatter leaves the pad positions at zero.
fn pad_map(b: usize, l: usize, c: usize) -> Arc<Vec<usize>> {
    let lp = l + 2 * PADDING;
    let mut map = Vec::with_capacity(b * l * c);
    for bi in 0..b {
        for li in 0..l {
            for ci in 0..c {
                map.push((bi * lp + li + PADDING) * c + ci);
            }
        }
    }
    Arc::new(map)
}

/// Window extraction: `[B*Lp, C]` (already padded) gathered into
/// `[B*Lout, C*K]`, where output position `lo` reads padded positions
/// `lo*stride + k`.
fn window_map(b: usize, lp: usize, c: usize, k: usize, stride: usize, lout: usize) -> Arc<Vec<usize>> {
    let mut map = Vec::with_capacity(b * lout * c * k);
    for bi in 0..b {
        for lo in 0..lout {
            for ci in 0..c {
                for ki in 0..k {
                    map.push((bi * lp + lo * stride + ki) * c + ci);
                }
            }
        }
    }
    Arc::new(map)
}

/// Overlap-add for the transposed convolution: `[B*L, F*K]` scattered into
/// the padded `[B*(STRIDE*L + KERNEL - STRIDE), F]`, where input position l
/// deposits tap k at padded position `l*STRIDE + k`. Colliding taps sum.
fn overlap_map(b: usize, l: usize, f: usize) -> Arc<Vec<usize>> {
    let lfull = STRIDE * l + KERNEL - STRIDE;
    let mut map = Vec::with_capacity(b * l * f * KERNEL);
    for bi in 0..b {
        for li in 0..l {
            for fi in 0..f {
                for ki in 0..KERNEL {
                    map.push((bi * lfull + li * STRIDE + ki) * f + fi);
                }
            }
        }
    }
    Arc::new(map)
}

/// Crops the padding back off: `[B*Lfull, F]` gathered into `[B*Lout, F]`.
fn crop_map(b: usize, lfull: usize, f: usize, lout: usize) -> Arc<Vec<usize>> {
    let mut map = Vec::with_capacity(b * lout * f);
    for bi in 0..b {
        for li in 0..lout {
            for fi in 0..f {
                map.push((bi * lfull + li + PADDING) * f + fi);
            }
        }
    }
    Arc::new(map)
}

/// Broadcasts a `[C]` vector across the rows of a `[rows, C]` block.
fn channel_broadcast(tape: &mut Tape, v: NodeId, rows: usize, c: usize) -> NodeId {
    let mut map = Vec::with_capacity(rows * c);
    for _ in 0..rows {
        for ci in 0..c {
            map.push(ci);
        }
    }
    tape.gather(v, Arc::new(map), &[rows, c])
}

/// y = x W + b for `[rows, in]` inputs, `w: [in, out]`, `b: [out]`.
pub fn dense(tape: &mut Tape, x: NodeId, w: NodeId, b: NodeId, rows: usize, out: usize) -> NodeId {
    let y = tape.matmul(x, w);
    let bb = channel_broadcast(tape, b, rows, out);
    tape.add(y, bb)
}

/// Strided convolution on `[B*L, C]` with `w: [C*K, F]`, `b: [F]`;
/// returns `[B*(L/2), F]`.
pub fn conv1d(
    tape: &mut Tape,
    x: NodeId,
    w: NodeId,
    b: NodeId,
    batch: usize,
    len: usize,
    c_in: usize,
    f_out: usize,
) -> NodeId {
    let lp = len + 2 * PADDING;
    let lout = (lp - KERNEL) / STRIDE + 1;
    let padded = {
        let map = pad_map(batch, len, c_in);
        tape.scatter(x, map, &[batch * lp, c_in])
    };
    let windows = {
        let map = window_map(batch, lp, c_in, KERNEL, STRIDE, lout);
        tape.gather(padded, map, &[batch * lout, c_in * KERNEL])
    };
    dense(tape, windows, w, b, batch * lout, f_out)
}

/// Stride-1 convolution (kernel `k`, padding `(k-1)/2`) preserving the
/// sequence length; used by the generator head. `w: [C*k, F]`.
pub fn conv1d_same(
    tape: &mut Tape,
    x: NodeId,
    w: NodeId,
    b: NodeId,
    batch: usize,
    len: usize,
    c_in: usize,
    f_out: usize,
    k: usize,
) -> NodeId {
    let p = (k - 1) / 2;
    let lp = len + 2 * p;
    let padded = {
        // Same construction as pad_map but with the head's padding.
        let mut map = Vec::with_capacity(batch * len * c_in);
        for bi in 0..batch {
            for li in 0..len {
                for ci in 0..c_in {
                    map.push((bi * lp + li + p) * c_in + ci);
                }
            }
        }
        tape.scatter(x, Arc::new(map), &[batch * lp, c_in])
    };
    let windows = {
        let map = window_map(batch, lp, c_in, k, 1, len);
        tape.gather(padded, map, &[batch * len, c_in * k])
    };
    dense(tape, windows, w, b, batch * len, f_out)
}

/// Transposed convolution on `[B*L, C]` with `w: [C, F*K]`, `b: [F]`;
/// doubles the length to `[B*2L, F]`.
pub fn deconv1d(
    tape: &mut Tape,
    x: NodeId,
    w: NodeId,
    b: NodeId,
    batch: usize,
    len: usize,
    f_out: usize,
) -> NodeId {
    let taps = tape.matmul(x, w);
    let lfull = STRIDE * len + KERNEL - STRIDE;
    let lout = lfull - 2 * PADDING;
    let summed = {
        let map = overlap_map(batch, len, f_out);
        tape.scatter(taps, map, &[batch * lfull, f_out])
    };
    let cropped = {
        let map = crop_map(batch, lfull, f_out, lout);
        tape.gather(summed, map, &[batch * lout, f_out])
    };
    let bb = channel_broadcast(tape, b, batch * lout, f_out);
    tape.add(cropped, bb)
}

pub const NORM_EPS: f64 = 1e-5;

/// Outcome of a normalization in training mode: the batch statistics the
/// caller may fold into running averages.
pub struct BatchStats {
    pub mean: Vec<f64>,
    /// Biased (1/R) variance, as used for the normalization itself.
    pub var: Vec<f64>,
    /// Rows that contributed to each statistic.
    pub rows: usize,
}

/// Normalizes each channel of a `[rows, C]` block with the given per-group
/// reduction map (`map[element] -> group`), then applies a per-channel
/// affine. Returns the output node and the group statistics as values.
fn normalize_grouped(
    tape: &mut Tape,
    x: NodeId,
    gamma: NodeId,
    beta: NodeId,
    rows: usize,
    c: usize,
    groups: usize,
    map: Arc<Vec<usize>>,
    group_size: usize,
) -> (NodeId, Vec<f64>, Vec<f64>) {
    let inv = 1.0 / group_size as f64;
    let sums = tape.scatter(x, map.clone(), &[groups]);
    let mean = tape.mul_scalar(sums, inv);
    let mean_b = tape.gather(mean, map.clone(), &[rows, c]);
    let centered = tape.sub(x, mean_b);
    let sq = tape.pow_const(centered, 2.0);
    let sqsums = tape.scatter(sq, map.clone(), &[groups]);
    let var = tape.mul_scalar(sqsums, inv);
    let shifted = tape.add_scalar(var, NORM_EPS);
    let inv_std = tape.pow_const(shifted, -0.5);
    let inv_std_b = tape.gather(inv_std, map, &[rows, c]);
    let normed = tape.mul(centered, inv_std_b);
    let gb = channel_broadcast(tape, gamma, rows, c);
    let scaled = tape.mul(normed, gb);
    let bb = channel_broadcast(tape, beta, rows, c);
    let out = tape.add(scaled, bb);
    let mean_v = tape.value(mean).iter().copied().collect();
    let var_v = tape.value(var).iter().copied().collect();
    (out, mean_v, var_v)
}

/// Batch normalization in training mode: statistics per channel over all
/// rows of `[rows, C]`. Returns the stats for the running-average update.
pub fn batch_norm_train(
    tape: &mut Tape,
    x: NodeId,
    gamma: NodeId,
    beta: NodeId,
    rows: usize,
    c: usize,
) -> (NodeId, BatchStats) {
    let mut map = Vec::with_capacity(rows * c);
    for _ in 0..rows {
        for ci in 0..c {
            map.push(ci);
        }
    }
    let (out, mean, var) =
        normalize_grouped(tape, x, gamma, beta, rows, c, c, Arc::new(map), rows);
    (out, BatchStats { mean, var, rows })
}

/// Batch normalization in inference mode, using stored running statistics.
pub fn batch_norm_eval(
    tape: &mut Tape,
    x: NodeId,
    gamma: NodeId,
    beta: NodeId,
    running_mean: NodeId,
    running_var: NodeId,
    rows: usize,
    c: usize,
) -> NodeId {
    let mean_b = channel_broadcast(tape, running_mean, rows, c);
    let centered = tape.sub(x, mean_b);
    let shifted = tape.add_scalar(running_var, NORM_EPS);
    let inv_std = tape.pow_const(shifted, -0.5);
    let inv_std_b = channel_broadcast(tape, inv_std, rows, c);
    let normed = tape.mul(centered, inv_std_b);
    let gb = channel_broadcast(tape, gamma, rows, c);
    let scaled = tape.mul(normed, gb);
    let bb = channel_broadcast(tape, beta, rows, c);
    tape.add(scaled, bb)
}

/// Layer normalization over each sample's full (C, L) block of a
/// `[B*L, C]` activation, with a per-channel affine. Needs no running
/// state, so it behaves identically in training and inference.
pub fn layer_norm(
    tape: &mut Tape,
    x: NodeId,
    gamma: NodeId,
    beta: NodeId,
    batch: usize,
    len: usize,
    c: usize,
) -> NodeId {
    let rows = batch * len;
    let mut map = Vec::with_capacity(rows * c);
    for r in 0..rows {
        let b = r / len;
        for _ in 0..c {
            map.push(b);
        }
    }
    let (out, _, _) =
        normalize_grouped(tape, x, gamma, beta, rows, c, batch, Arc::new(map), len * c);
    out
}

/// Inverted dropout: multiplies by a 0-or-1/(1-p) mask drawn from `rng`.
/// The mask enters the graph as a constant, so gradients are masked the
/// same way the activations are.
pub fn dropout(
    tape: &mut Tape,
    x: NodeId,
    p: f64,
    shape: &[usize],
    rng: &mut impl rand::Rng,
) -> NodeId {
    let keep = 1.0 / (1.0 - p);
    let n: usize = shape.iter().product();
    let data: Vec<f64> =
        (0..n).map(|_| if rng.random::<f64>() < p { 0.0 } else { keep }).collect();
    let mask = tape.leaf(ndarray::ArrayD::from_shape_vec(ndarray::IxDyn(shape), data).unwrap());
    tape.mul(x, mask)
}
