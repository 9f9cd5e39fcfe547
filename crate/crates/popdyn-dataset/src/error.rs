use popdyn_sim::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("invalid arguments: {0}")]
    Args(String),

    #[error("scaling bounds must satisfy lo < hi, got [{lo}, {hi}]")]
    BadBounds { lo: f64, hi: f64 },

    #[error("not a dataset file: {0}")]
    Format(String),

    #[error("unsupported dataset container version '{found}' (expected '1')")]
    Version { found: char },

    #[error("checksum mismatch (header says {expected:#010x}, payload hashes to {found:#010x})")]
    Checksum { expected: u32, found: u32 },

    #[error("file is shorter than its header promises")]
    Truncated,

    #[error("inconsistent dataset file: {0}")]
    Integrity(String),

    #[error(transparent)]
    Sim(#[from] SimError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
