use crate::error::CliError;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// One JSON document describing a whole run; every field has a matching
/// command-line flag and explicit flags win over file values. Unknown
/// keys are rejected so a typo cannot silently fall back to a default.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: Option<String>,
    pub grid_dt: Option<f64>,
    pub grid_h: Option<usize>,
    pub n_settings: Option<usize>,
    pub k_per_setting: Option<usize>,
    pub method: Option<String>,
    pub tau: Option<f64>,
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub lambda_gp: Option<f64>,
    pub n_critic: Option<usize>,
    pub noise_dim: Option<usize>,
    pub alpha: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Usage(format!("cannot read config {}: {e}", p.display()))
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("bad config {}: {e}", p.display())))
            }
        }
    }
}

/// The explicit flag when given, else the config-file value.
pub fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| file.clone())
}

/// Randomized commands refuse to run without a seed from either source;
/// silent default seeds would make runs unreproducible by accident.
pub fn need_seed(flag: Option<u64>, cfg: &RunConfig) -> Result<u64, CliError> {
    flag.or(cfg.seed)
        .ok_or_else(|| CliError::Usage("--seed is required (flag or config file)".into()))
}

pub fn need<T>(v: Option<T>, what: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("{what} is required (flag or config file)")))
}
