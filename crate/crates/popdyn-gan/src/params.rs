//! Weight containers for the two networks, with seeded initialization and
//! flat tensor listings used by the optimizer and the weights container.

use crate::config::{CriticConfig, GeneratorConfig, HEAD_KERNEL, KERNEL};
use ndarray::ArrayD;
use popdyn_sim::rng::{stream_rng, StreamDomain};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A weight matrix and bias vector, used for dense layers and (reshaped)
/// for both convolution kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub w: ArrayD<f64>,
    pub b: ArrayD<f64>,
}

/// Per-channel scale/shift plus running statistics for inference.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNormParams {
    pub gamma: ArrayD<f64>,
    pub beta: ArrayD<f64>,
    pub running_mean: ArrayD<f64>,
    pub running_var: ArrayD<f64>,
}

/// Per-channel scale/shift for layer normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerNormParams {
    pub gamma: ArrayD<f64>,
    pub beta: ArrayD<f64>,
}

/// Uniform fan-balanced initialization on [-a, a] with
/// a = sqrt(6 / (fan_in + fan_out)); fans count kernel taps.
fn glorot(rng: &mut ChaCha8Rng, shape: &[usize], fan_in: usize, fan_out: usize) -> ArrayD<f64> {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let n: usize = shape.iter().product();
    let data: Vec<f64> = (0..n).map(|_| rng.random_range(-a..a)).collect();
    ArrayD::from_shape_vec(ndarray::IxDyn(shape), data).unwrap()
}

fn zeros(shape: &[usize]) -> ArrayD<f64> {
    ArrayD::zeros(ndarray::IxDyn(shape))
}

fn ones(shape: &[usize]) -> ArrayD<f64> {
    ArrayD::ones(ndarray::IxDyn(shape))
}

fn bn(c: usize) -> BatchNormParams {
    BatchNormParams {
        gamma: ones(&[c]),
        beta: zeros(&[c]),
        running_mean: zeros(&[c]),
        running_var: ones(&[c]),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    cfg: GeneratorConfig,
    /// Dense embedding of (condition, noise) to the initial feature map.
    pub embed: Affine,
    pub embed_bn: BatchNormParams,
    /// One transposed convolution plus its normalization per stage.
    pub deconvs: Vec<(Affine, BatchNormParams)>,
    /// Length-preserving output convolution down to n_obs channels.
    pub head: Affine,
}

impl GeneratorParams {
    /// Fresh weights for `cfg`, drawn from the given seed's
    /// initialization stream. Biases start at zero, normalizations at
    /// identity.
    pub fn init(cfg: &GeneratorConfig, seed: u64) -> Self {
        let mut rng = stream_rng(seed, StreamDomain::Init, 0);
        let d_in = cfg.cond_dim() + cfg.noise_dim;
        let l0 = cfg.initial_len();
        let d_embed = cfg.embed_channels * l0;
        let embed = Affine {
            w: glorot(&mut rng, &[d_in, d_embed], d_in, d_embed),
            b: zeros(&[d_embed]),
        };
        let mut deconvs = Vec::new();
        let mut c_in = cfg.embed_channels;
        for &f in &cfg.deconv_filters {
            let w = glorot(&mut rng, &[c_in, f * KERNEL], c_in * KERNEL, f * KERNEL);
            deconvs.push((Affine { w, b: zeros(&[f]) }, bn(f)));
            c_in = f;
        }
        let head = Affine {
            w: glorot(
                &mut rng,
                &[c_in * HEAD_KERNEL, cfg.n_obs],
                c_in * HEAD_KERNEL,
                cfg.n_obs * HEAD_KERNEL,
            ),
            b: zeros(&[cfg.n_obs]),
        };
        GeneratorParams { cfg: cfg.clone(), embed, embed_bn: bn(cfg.embed_channels), deconvs, head }
    }

    pub fn cfg(&self) -> &GeneratorConfig {
        &self.cfg
    }

    /// Tensors the optimizer updates, in a fixed documented order.
    pub fn trainable(&self) -> Vec<&ArrayD<f64>> {
        let mut t = vec![&self.embed.w, &self.embed.b, &self.embed_bn.gamma, &self.embed_bn.beta];
        for (a, n) in &self.deconvs {
            t.extend([&a.w, &a.b, &n.gamma, &n.beta]);
        }
        t.extend([&self.head.w, &self.head.b]);
        t
    }

    pub fn trainable_mut(&mut self) -> Vec<&mut ArrayD<f64>> {
        let mut t = vec![
            &mut self.embed.w,
            &mut self.embed.b,
            &mut self.embed_bn.gamma,
            &mut self.embed_bn.beta,
        ];
        for (a, n) in &mut self.deconvs {
            t.extend([&mut a.w, &mut a.b, &mut n.gamma, &mut n.beta]);
        }
        t.extend([&mut self.head.w, &mut self.head.b]);
        t
    }

    /// Running statistics, saved with the weights but never optimized.
    pub fn stats(&self) -> Vec<&ArrayD<f64>> {
        let mut t = vec![&self.embed_bn.running_mean, &self.embed_bn.running_var];
        for (_, n) in &self.deconvs {
            t.extend([&n.running_mean, &n.running_var]);
        }
        t
    }

    pub fn stats_mut(&mut self) -> Vec<&mut ArrayD<f64>> {
        let mut t = vec![&mut self.embed_bn.running_mean, &mut self.embed_bn.running_var];
        for (_, n) in &mut self.deconvs {
            t.extend([&mut n.running_mean, &mut n.running_var]);
        }
        t
    }

    /// Every persisted tensor with its container name, trainables first.
    pub fn entries(&self) -> Vec<(String, &ArrayD<f64>)> {
        let mut out = vec![
            ("embed.w".to_string(), &self.embed.w),
            ("embed.b".to_string(), &self.embed.b),
            ("embed.bn.gamma".to_string(), &self.embed_bn.gamma),
            ("embed.bn.beta".to_string(), &self.embed_bn.beta),
        ];
        for (i, (a, n)) in self.deconvs.iter().enumerate() {
            out.push((format!("deconv{i}.w"), &a.w));
            out.push((format!("deconv{i}.b"), &a.b));
            out.push((format!("deconv{i}.bn.gamma"), &n.gamma));
            out.push((format!("deconv{i}.bn.beta"), &n.beta));
        }
        out.push(("head.w".to_string(), &self.head.w));
        out.push(("head.b".to_string(), &self.head.b));
        out.push(("embed.bn.running_mean".to_string(), &self.embed_bn.running_mean));
        out.push(("embed.bn.running_var".to_string(), &self.embed_bn.running_var));
        for (i, (_, n)) in self.deconvs.iter().enumerate() {
            out.push((format!("deconv{i}.bn.running_mean"), &n.running_mean));
            out.push((format!("deconv{i}.bn.running_var"), &n.running_var));
        }
        out
    }

    pub(crate) fn entries_mut(&mut self) -> Vec<(String, &mut ArrayD<f64>)> {
        let mut out = vec![
            ("embed.w".to_string(), &mut self.embed.w),
            ("embed.b".to_string(), &mut self.embed.b),
            ("embed.bn.gamma".to_string(), &mut self.embed_bn.gamma),
            ("embed.bn.beta".to_string(), &mut self.embed_bn.beta),
        ];
        // One pass over the layers, stashing the running stats for the tail
        // so the order matches `entries`.
        let mut stats = Vec::with_capacity(2 * self.deconvs.len());
        for (i, (a, n)) in self.deconvs.iter_mut().enumerate() {
            out.push((format!("deconv{i}.w"), &mut a.w));
            out.push((format!("deconv{i}.b"), &mut a.b));
            out.push((format!("deconv{i}.bn.gamma"), &mut n.gamma));
            out.push((format!("deconv{i}.bn.beta"), &mut n.beta));
            stats.push((format!("deconv{i}.bn.running_mean"), &mut n.running_mean));
            stats.push((format!("deconv{i}.bn.running_var"), &mut n.running_var));
        }
        out.push(("head.w".to_string(), &mut self.head.w));
        out.push(("head.b".to_string(), &mut self.head.b));
        out.push(("embed.bn.running_mean".to_string(), &mut self.embed_bn.running_mean));
        out.push(("embed.bn.running_var".to_string(), &mut self.embed_bn.running_var));
        out.append(&mut stats);
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticParams {
    cfg: CriticConfig,
    pub convs: Vec<(Affine, LayerNormParams)>,
    /// Single linear unit over the flattened features.
    pub head: Affine,
}

impl CriticParams {
    pub fn init(cfg: &CriticConfig, seed: u64) -> Self {
        let mut rng = stream_rng(seed, StreamDomain::Init, 1);
        let mut convs = Vec::new();
        let mut c_in = cfg.cond_dim();
        let lens = cfg.lengths();
        for &f in &cfg.conv_layers {
            let w = glorot(&mut rng, &[c_in * KERNEL, f], c_in * KERNEL, f * KERNEL);
            convs.push((
                Affine { w, b: zeros(&[f]) },
                LayerNormParams { gamma: ones(&[f]), beta: zeros(&[f]) },
            ));
            c_in = f;
        }
        let flat = c_in * lens.last().unwrap();
        let head =
            Affine { w: glorot(&mut rng, &[flat, 1], flat, 1), b: zeros(&[1]) };
        CriticParams { cfg: cfg.clone(), convs, head }
    }

    pub fn cfg(&self) -> &CriticConfig {
        &self.cfg
    }

    pub fn trainable(&self) -> Vec<&ArrayD<f64>> {
        let mut t = Vec::new();
        for (a, n) in &self.convs {
            t.extend([&a.w, &a.b, &n.gamma, &n.beta]);
        }
        t.extend([&self.head.w, &self.head.b]);
        t
    }

    pub fn trainable_mut(&mut self) -> Vec<&mut ArrayD<f64>> {
        let mut t = Vec::new();
        for (a, n) in &mut self.convs {
            t.extend([&mut a.w, &mut a.b, &mut n.gamma, &mut n.beta]);
        }
        t.extend([&mut self.head.w, &mut self.head.b]);
        t
    }

    /// Sets every tensor to zero; handy for constructing reference critics
    /// in tests (a zero critic scores everything 0).
    pub fn zero(&mut self) {
        for t in self.trainable_mut() {
            t.fill(0.0);
        }
    }
}
