//! Dataset container: 8-byte magic `PDABSET1`, a little-endian u32 header
//! length, a UTF-8 JSON header, then two little-endian float32 payload
//! blocks (settings row-major, trajectories row-major). The header carries
//! a CRC-32 over both payload blocks.

use crate::dataset::{Dataset, DatasetMeta};
use crate::error::DataError;
use crate::scaling::ScalingBounds;
use ndarray::{Array2, Array3};
use popdyn_model::SimGrid;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"PDABSET1";

#[derive(Serialize, Deserialize)]
struct Header {
    model: String,
    grid: SimGrid,
    n_obs: usize,
    m_cond: usize,
    #[serde(rename = "N")]
    n_settings: usize,
    #[serde(rename = "k")]
    k_per_setting: usize,
    bounds: ScalingBounds,
    seed: u64,
    checksum: u32,
    observables: Vec<String>,
}

fn f32_bytes<'a>(values: impl Iterator<Item = &'a f32>, out: &mut Vec<u8>) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

/// Writes `ds` to `path`, replacing any existing file.
pub fn write_dataset(ds: &Dataset, path: &Path) -> Result<(), DataError> {
    let mut settings = Vec::with_capacity(ds.settings.len() * 4);
    f32_bytes(ds.settings.iter(), &mut settings);
    let mut trajectories = Vec::with_capacity(ds.trajectories.len() * 4);
    f32_bytes(ds.trajectories.iter(), &mut trajectories);

    let mut crc = crc32fast::Hasher::new();
    crc.update(&settings);
    crc.update(&trajectories);

    let header = Header {
        model: ds.meta.model.clone(),
        grid: ds.meta.grid,
        n_obs: ds.meta.n_obs,
        m_cond: ds.meta.m_cond,
        n_settings: ds.meta.n_settings,
        k_per_setting: ds.meta.k_per_setting,
        bounds: ds.bounds.clone(),
        seed: ds.meta.seed,
        checksum: crc.finalize(),
        observables: ds.meta.observables.clone(),
    };
    let header_json =
        serde_json::to_vec(&header).map_err(|e| DataError::Integrity(e.to_string()))?;

    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(header_json.len() as u32).to_le_bytes())?;
    w.write_all(&header_json)?;
    w.write_all(&settings)?;
    w.write_all(&trajectories)?;
    w.flush()?;
    Ok(())
}

/// Reads a dataset back, verifying the magic, version, payload sizes, and
/// checksum. Returns exactly what was written (warnings excepted, which
/// are generation-time only).
pub fn read_dataset(path: &Path) -> Result<Dataset, DataError> {
    let mut r = BufReader::new(File::open(path)?);

    let mut magic = [0u8; 8];
    read_exact_or_truncated(&mut r, &mut magic)?;
    if &magic != MAGIC {
        if magic.starts_with(b"PDABSET") {
            return Err(DataError::Version { found: magic[7] as char });
        }
        return Err(DataError::Format("magic bytes do not match".into()));
    }

    let mut len = [0u8; 4];
    read_exact_or_truncated(&mut r, &mut len)?;
    let mut header_json = vec![0u8; u32::from_le_bytes(len) as usize];
    read_exact_or_truncated(&mut r, &mut header_json)?;
    let header: Header = serde_json::from_slice(&header_json)
        .map_err(|e| DataError::Format(format!("bad header: {e}")))?;

    // Re-validate what serde could not: grid sanity and bound arities.
    let grid = SimGrid::new(header.grid.t0(), header.grid.dt(), header.grid.steps())
        .map_err(|e| DataError::Integrity(e.to_string()))?;
    if header.bounds.species().len() != header.n_obs
        || header.bounds.params().len() != header.m_cond
        || header.observables.len() != header.n_obs
    {
        return Err(DataError::Integrity("bounds arity disagrees with header".into()));
    }

    let pairs = header
        .n_settings
        .checked_mul(header.k_per_setting)
        .ok_or_else(|| DataError::Integrity("pair count overflows".into()))?;
    let settings_len = pairs * (header.n_obs + header.m_cond);
    let traj_len = pairs * grid.rows() * header.n_obs;

    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    let expected = (settings_len + traj_len) * 4;
    if rest.len() < expected {
        return Err(DataError::Truncated);
    }
    if rest.len() > expected {
        return Err(DataError::Integrity(format!(
            "payload is {} bytes but the header implies {expected}",
            rest.len()
        )));
    }

    let mut crc = crc32fast::Hasher::new();
    crc.update(&rest);
    let found = crc.finalize();
    if found != header.checksum {
        return Err(DataError::Checksum { expected: header.checksum, found });
    }

    let mut floats = Vec::with_capacity(settings_len + traj_len);
    for chunk in rest.chunks_exact(4) {
        floats.push(f32::from_le_bytes(chunk.try_into().unwrap()));
    }
    let traj_floats = floats.split_off(settings_len);
    let settings = Array2::from_shape_vec((pairs, header.n_obs + header.m_cond), floats)
        .map_err(|e| DataError::Integrity(e.to_string()))?;
    let trajectories = Array3::from_shape_vec((pairs, grid.rows(), header.n_obs), traj_floats)
        .map_err(|e| DataError::Integrity(e.to_string()))?;

    Ok(Dataset {
        meta: DatasetMeta {
            model: header.model,
            grid,
            n_obs: header.n_obs,
            m_cond: header.m_cond,
            n_settings: header.n_settings,
            k_per_setting: header.k_per_setting,
            observables: header.observables,
            seed: header.seed,
        },
        bounds: header.bounds,
        settings,
        trajectories,
        warnings: Vec::new(),
    })
}

fn read_exact_or_truncated(r: &mut impl Read, buf: &mut [u8]) -> Result<(), DataError> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            DataError::Truncated
        } else {
            DataError::Io(e)
        }
    })
}
