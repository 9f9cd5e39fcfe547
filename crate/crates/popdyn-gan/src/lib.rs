//! Conditional adversarial trajectory models.
//!
//! A generator maps an initial setting plus Gaussian noise to a scaled
//! fixed-length trajectory in one shot; a critic scores (trajectory,
//! setting) pairs. Both train under a Wasserstein objective with a gradient
//! penalty that pushes the critic toward unit gradient norm along lines
//! between real and generated samples.
//!
//! Everything runs on an eager tape ([`tape::Tape`]) whose backward pass
//! emits ordinary tape operations, so the gradient penalty can itself be
//! differentiated exactly during training. No external learning framework
//! is involved.

pub mod config;
pub mod critic;
pub mod error;
pub mod generator;
pub mod layers;
pub mod loss;
pub mod params;
pub mod tape;
pub mod train;
pub mod weights;

pub use config::{CriticConfig, GeneratorConfig, TrainConfig};
pub use critic::critic_forward;
pub use error::GanError;
pub use generator::{generator_forward, sample_trajectories};
pub use loss::{
    critic_loss, critic_loss_grads, generator_loss, generator_loss_grads, gradient_penalty,
};
pub use params::{CriticParams, GeneratorParams};
pub use train::{train, CycleRecord, TrainLog};
pub use weights::{load_params, save_params, WeightsMeta};
