use crate::error::GanError;
use serde::{Deserialize, Serialize};

/// Transposed convolutions double the sequence length when the kernel is
/// twice the stride and padding absorbs the overhang; the whole length
/// bookkeeping of both networks is built on these three numbers.
pub const KERNEL: usize = 4;
pub const STRIDE: usize = 2;
pub const PADDING: usize = 1;
/// The generator's output head is an ordinary convolution that keeps the
/// sequence length (kernel 3, padding 1, stride 1).
pub const HEAD_KERNEL: usize = 3;

pub const LEAKY_SLOPE: f64 = 0.2;
pub const DROPOUT_P: f64 = 0.2;

fn default_noise_dim() -> usize {
    480
}
fn default_embed() -> usize {
    512
}
fn default_deconv() -> Vec<usize> {
    vec![128, 256, 256, 128]
}
fn default_conv() -> Vec<usize> {
    vec![64, 64]
}

/// Shape of the trajectory generator: a dense embedding produces
/// `embed_channels` channels at length `steps / 2^L`, each of the `L`
/// transposed convolutions doubles the length, and the head maps the last
/// filter bank to `n_obs` channels at exactly `steps` positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n_obs: usize,
    pub m_cond: usize,
    /// Number of generated time steps H; the produced trajectory covers
    /// grid rows 1..=H, with row 0 supplied by the conditioning state.
    pub steps: usize,
    #[serde(default = "default_noise_dim")]
    pub noise_dim: usize,
    #[serde(default = "default_embed")]
    pub embed_channels: usize,
    #[serde(default = "default_deconv")]
    pub deconv_filters: Vec<usize>,
}

impl GeneratorConfig {
    /// Defaults for a model's shape; `deep` selects the wider five-layer
    /// stack used for the hardest cascade model.
    pub fn for_model(n_obs: usize, m_cond: usize, steps: usize, deep: bool) -> Self {
        GeneratorConfig {
            n_obs,
            m_cond,
            steps,
            noise_dim: default_noise_dim(),
            embed_channels: default_embed(),
            deconv_filters: if deep {
                vec![128, 256, 512, 256, 128]
            } else {
                default_deconv()
            },
        }
    }

    /// Length of the embedding's sequence axis, `steps / 2^L`.
    pub fn initial_len(&self) -> usize {
        self.steps >> self.deconv_filters.len()
    }

    /// Width of the conditioning vector, observed state plus parameters.
    pub fn cond_dim(&self) -> usize {
        self.n_obs + self.m_cond
    }

    pub fn validate(&self) -> Result<(), GanError> {
        let l = self.deconv_filters.len();
        if self.n_obs < 1 || self.noise_dim < 1 || self.embed_channels < 1 || l < 1 {
            return Err(GanError::Config("generator sizes must be at least 1".into()));
        }
        if self.deconv_filters.iter().any(|&f| f < 1) {
            return Err(GanError::Config("deconvolution filter counts must be at least 1".into()));
        }
        if l >= usize::BITS as usize || self.steps % (1 << l) != 0 || self.initial_len() < 1 {
            return Err(GanError::Config(format!(
                "H={} is not divisible by 2^{l}, so {l} doubling layers cannot land on it",
                self.steps
            )));
        }
        Ok(())
    }
}

/// Shape of the critic: strided convolutions over the assembled
/// `(H+1) x (n_obs+m_cond)` input, a layer norm and dropout after each,
/// then a single linear unit over the flattened features.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticConfig {
    pub n_obs: usize,
    pub m_cond: usize,
    pub steps: usize,
    /// Output channels of each hidden convolution. May be empty, which
    /// degenerates the critic to one linear unit over its raw input.
    #[serde(default = "default_conv")]
    pub conv_layers: Vec<usize>,
}

impl CriticConfig {
    pub fn for_model(n_obs: usize, m_cond: usize, steps: usize, deep: bool) -> Self {
        CriticConfig {
            n_obs,
            m_cond,
            steps,
            conv_layers: if deep { vec![256; 5] } else { default_conv() },
        }
    }

    pub fn cond_dim(&self) -> usize {
        self.n_obs + self.m_cond
    }

    /// Sequence lengths entering each convolution, then the final length.
    /// Strided k=4/s=2/p=1 convolutions take L to floor(L/2).
    pub fn lengths(&self) -> Vec<usize> {
        let mut lens = vec![self.steps + 1];
        for _ in &self.conv_layers {
            lens.push(lens.last().unwrap() / 2);
        }
        lens
    }

    pub fn validate(&self) -> Result<(), GanError> {
        if self.n_obs < 1 || self.steps < 1 {
            return Err(GanError::Config("critic sizes must be at least 1".into()));
        }
        if self.conv_layers.iter().any(|&f| f < 1) {
            return Err(GanError::Config("convolution filter counts must be at least 1".into()));
        }
        // Each convolution needs at least one full kernel window.
        let mut len = self.steps + 1;
        for _ in &self.conv_layers {
            if len + 2 * PADDING < KERNEL {
                return Err(GanError::Config(format!(
                    "input length {len} is too short for a kernel-{KERNEL} convolution"
                )));
            }
            len /= 2;
        }
        if len < 1 {
            return Err(GanError::Config("flattened critic input is empty".into()));
        }
        Ok(())
    }
}

fn default_lambda() -> f64 {
    10.0
}
fn default_n_critic() -> usize {
    5
}
fn default_batch() -> usize {
    256
}
fn default_epochs() -> usize {
    200
}
fn default_alpha() -> f64 {
    1e-4
}
fn default_beta1() -> f64 {
    0.5
}
fn default_beta2() -> f64 {
    0.9
}

/// Optimization hyperparameters for adversarial training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Gradient-penalty coefficient.
    #[serde(default = "default_lambda")]
    pub lambda_gp: f64,
    /// Critic updates per generator update.
    #[serde(default = "default_n_critic")]
    pub n_critic: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda_gp: default_lambda(),
            n_critic: default_n_critic(),
            batch_size: default_batch(),
            epochs: default_epochs(),
            alpha: default_alpha(),
            beta1: default_beta1(),
            beta2: default_beta2(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), GanError> {
        if !(self.lambda_gp >= 0.0) {
            return Err(GanError::Config("lambda must be nonnegative".into()));
        }
        if self.n_critic < 1 || self.epochs < 1 {
            return Err(GanError::Config("n_critic and epochs must be at least 1".into()));
        }
        if self.batch_size < 2 {
            return Err(GanError::Config(
                "batches must hold at least 2 samples (interpolation needs pairs)".into(),
            ));
        }
        if !(self.alpha > 0.0)
            || !(0.0..1.0).contains(&self.beta1)
            || !(0.0..1.0).contains(&self.beta2)
        {
            return Err(GanError::Config("Adam hyperparameters are out of range".into()));
        }
        Ok(())
    }
}
