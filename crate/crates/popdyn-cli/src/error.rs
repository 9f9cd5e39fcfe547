use popdyn_dataset::DataError;
use popdyn_eval::EvalError;
use popdyn_gan::GanError;
use popdyn_model::ModelError;
use popdyn_sim::SimError;
use thiserror::Error;

/// Process exit codes, stable for scripting.
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    /// Inputs that parse but contradict each other (e.g. weights trained on a
    /// different model than the dataset holds).
    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Sim(#[from] SimError),

    #[error(transparent)]
    Data(#[from] DataError),

    #[error(transparent)]
    Gan(#[from] GanError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Usage problems exit 2, numeric divergence 4, everything else
    /// (missing/invalid/mismatched inputs) 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Gan(GanError::Diverged { .. }) => EXIT_DIVERGED,
            CliError::Sim(SimError::Diverged(_)) => EXIT_DIVERGED,
            _ => EXIT_DATA,
        }
    }
}
