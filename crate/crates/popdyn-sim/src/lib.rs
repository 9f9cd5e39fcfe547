//! Stochastic simulation of reaction networks on a fixed time grid.
//!
//! Two simulators are provided: the exact Gillespie direct method
//! ([`ssa_trajectory`]) and fixed-step tau-leaping ([`tau_leap_trajectory`]).
//! Both record the state with cadlag semantics: the value at grid time t_i
//! is the state just after the last event at or before t_i. Initial
//! settings are drawn by [`InitialSampler`], uniformly over the integer
//! boxes declared by the model intersected with its sum constraints.
//!
//! All randomness flows through seeded ChaCha8 streams (see [`rng`]), so
//! every output is reproducible and independent of worker scheduling.

pub mod pool;
pub mod rng;

mod batch;
mod error;
mod init;
mod ssa;
mod tau;
mod trajectory;

pub use batch::{simulate_batch, BatchResult, SimMethod};
pub use error::SimError;
pub use init::{sample_initial_setting, InitialSampler};
pub use popdyn_model::SimGrid;
pub use ssa::ssa_trajectory;
pub use tau::{tau_leap_trajectory, LeapStats};
pub use trajectory::{InitialSetting, Trajectory};
