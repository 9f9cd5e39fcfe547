use popdyn_dataset::DataError;
use popdyn_gan::GanError;
use popdyn_sim::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid arguments: {0}")]
    Args(String),

    #[error("empty sample: {0}")]
    Empty(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("unknown species '{0}'")]
    UnknownSpecies(String),

    #[error(transparent)]
    Data(#[from] DataError),

    #[error(transparent)]
    Sim(#[from] SimError),

    #[error(transparent)]
    Gan(#[from] GanError),
}
