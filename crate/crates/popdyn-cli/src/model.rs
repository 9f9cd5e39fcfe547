use crate::error::CliError;
use popdyn_model::{builtin_model, parse_model, ReactionNetwork, SimGrid, BUILTIN_NAMES};
use std::path::Path;

/// A model ready to run: network, grid (after any overrides), the name
/// other artifacts will reference it by, and its default workload sizes.
#[derive(Debug, Clone)]
pub struct ResolvedModel {
    pub name: String,
    pub network: ReactionNetwork,
    pub grid: SimGrid,
    pub deep_arch: bool,
    pub train_sizes: (usize, usize),
    pub test_sizes: (usize, usize),
}

/// Looks `spec` up among the built-in models, else treats it as a path to
/// a model file. `--grid-dt` / `--grid-h` replace the declared grid.
pub fn resolve_model(
    spec: &str,
    grid_dt: Option<f64>,
    grid_h: Option<usize>,
) -> Result<ResolvedModel, CliError> {
    let mut resolved = if BUILTIN_NAMES.contains(&spec) {
        let entry = builtin_model(spec)?;
        ResolvedModel {
            name: entry.name.to_string(),
            network: entry.network,
            grid: entry.grid,
            deep_arch: entry.deep_arch,
            train_sizes: entry.train_sizes,
            test_sizes: entry.test_sizes,
        }
    } else {
        let path = Path::new(spec);
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!(
                "`{spec}` is neither a built-in model ({}) nor a readable file: {e}",
                BUILTIN_NAMES.join(", ")
            ))
        })?;
        let parsed = parse_model(&text)?;
        let grid = match parsed.grid {
            Some(g) => g,
            None => match (grid_dt, grid_h) {
                (Some(dt), Some(h)) => SimGrid::new(0.0, dt, h)?,
                _ => {
                    return Err(CliError::Usage(format!(
                        "{spec} declares no grid; pass --grid-dt and --grid-h"
                    )))
                }
            },
        };
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("model")
            .to_string();
        let varying = parsed.network.m_cond() > 0;
        ResolvedModel {
            name,
            network: parsed.network,
            grid,
            deep_arch: false,
            train_sizes: if varying { (1000, 50) } else { (2000, 10) },
            test_sizes: (25, 2000),
        }
    };
    if grid_dt.is_some() || grid_h.is_some() {
        resolved.grid = SimGrid::new(
            resolved.grid.t0(),
            grid_dt.unwrap_or(resolved.grid.dt()),
            grid_h.unwrap_or(resolved.grid.steps()),
        )?;
    }
    Ok(resolved)
}
