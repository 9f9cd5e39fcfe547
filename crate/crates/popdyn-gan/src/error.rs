use thiserror::Error;

#[derive(Debug, Error)]
pub enum GanError {
    #[error("bad network configuration: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("dataset does not fit the configured networks: {0}")]
    DatasetMismatch(String),

    #[error("training diverged at update {update}: loss {value}")]
    Diverged { update: usize, value: f64 },

    #[error("not a weights file: {0}")]
    Format(String),

    #[error("unsupported weights container version '{found}' (expected '1')")]
    Version { found: char },

    #[error("checksum mismatch (header says {expected:#010x}, payload hashes to {found:#010x})")]
    Checksum { expected: u32, found: u32 },

    #[error("file is shorter than its header promises")]
    Truncated,

    #[error("inconsistent weights file: {0}")]
    Integrity(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
