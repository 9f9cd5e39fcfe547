//! Training and test pools for trajectory-distribution learning.
//!
//! A dataset pairs initial settings with exact simulated trajectories,
//! projected to the model's observables and affinely scaled to `[-1, 1]`.
//! Species scaling bounds come from the union of the simulated data and
//! the declared initial ranges and are stored alongside the data, so any
//! later consumer (training, evaluation) reuses the same map instead of
//! deriving bounds from what it happens to be looking at.
//!
//! Datasets round-trip losslessly through a checksummed binary container;
//! see [`write_dataset`] / [`read_dataset`].

mod dataset;
mod error;
mod io;
mod scaling;

pub use dataset::{generate_test_set, generate_training_set, generate_with_method, Dataset, DatasetMeta};
pub use error::DataError;
pub use io::{read_dataset, write_dataset};
pub use scaling::{scale, unscale, ScalingBounds};
