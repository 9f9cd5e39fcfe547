//! Trained-generator container: 8-byte magic `PDABGAN1`, a little-endian
//! u32 header length, a UTF-8 JSON header, then one little-endian float32
//! blob per tensor in a fixed order. The header lists every tensor with its
//! shape, carries a CRC-32 over the whole payload, and embeds everything a
//! sampler needs: model name, time grid, observable names, scaling bounds,
//! and the three configuration blocks.

use crate::config::{CriticConfig, GeneratorConfig, TrainConfig};
use crate::error::GanError;
use crate::params::GeneratorParams;
use popdyn_dataset::ScalingBounds;
use popdyn_model::{ReactionNetwork, SimGrid};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"PDABGAN1";

/// Everything stored alongside the generator weights. Enough to sample
/// without re-opening the training dataset, and enough to refuse weights
/// that were trained on a different model or grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightsMeta {
    pub model: String,
    pub grid: SimGrid,
    pub observables: Vec<String>,
    pub bounds: ScalingBounds,
    pub critic: CriticConfig,
    pub train: TrainConfig,
}

impl WeightsMeta {
    /// Refuses metadata that was produced for a different model, grid, or
    /// species set than the one being sampled. `model` is the name the
    /// caller knows the network under; networks carry no name themselves.
    pub fn check_model(
        &self,
        model: &str,
        net: &ReactionNetwork,
        grid: &SimGrid,
    ) -> Result<(), GanError> {
        if self.model != model {
            return Err(GanError::DatasetMismatch(format!(
                "weights were trained on model '{}', not '{model}'",
                self.model
            )));
        }
        if self.grid != *grid {
            return Err(GanError::DatasetMismatch(format!(
                "weights were trained on grid {:?}, not {:?}",
                self.grid, grid
            )));
        }
        for name in &self.observables {
            if !net.species().iter().any(|s| s == name) {
                return Err(GanError::DatasetMismatch(format!(
                    "weights observe species '{name}' which the model does not declare"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TensorInfo {
    name: String,
    shape: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    model: String,
    grid: SimGrid,
    observables: Vec<String>,
    bounds: ScalingBounds,
    generator: GeneratorConfig,
    critic: CriticConfig,
    train: TrainConfig,
    tensors: Vec<TensorInfo>,
    checksum: u32,
}

/// Writes the generator and its metadata to `path`, replacing any existing
/// file. Weights are stored as float32, so the first save may round; saving
/// what `load_params` returned reproduces the file bit for bit.
pub fn save_params(path: &Path, gp: &GeneratorParams, meta: &WeightsMeta) -> Result<(), GanError> {
    let entries = gp.entries();
    let mut tensors = Vec::with_capacity(entries.len());
    let mut payload = Vec::new();
    for (name, tensor) in &entries {
        tensors.push(TensorInfo { name: name.clone(), shape: tensor.shape().to_vec() });
        for v in tensor.iter() {
            payload.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }

    let mut crc = crc32fast::Hasher::new();
    crc.update(&payload);

    let header = Header {
        model: meta.model.clone(),
        grid: meta.grid,
        observables: meta.observables.clone(),
        bounds: meta.bounds.clone(),
        generator: gp.cfg().clone(),
        critic: meta.critic.clone(),
        train: meta.train.clone(),
        tensors,
        checksum: crc.finalize(),
    };
    let header_json =
        serde_json::to_vec(&header).map_err(|e| GanError::Integrity(e.to_string()))?;

    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(header_json.len() as u32).to_le_bytes())?;
    w.write_all(&header_json)?;
    w.write_all(&payload)?;
    w.flush()?;
    Ok(())
}

/// Reads a generator back, verifying the magic, version, tensor inventory,
/// payload size, and checksum.
pub fn load_params(path: &Path) -> Result<(GeneratorParams, WeightsMeta), GanError> {
    let mut r = BufReader::new(File::open(path)?);

    let mut magic = [0u8; 8];
    read_exact_or_truncated(&mut r, &mut magic)?;
    if &magic != MAGIC {
        if magic.starts_with(b"PDABGAN") {
            return Err(GanError::Version { found: magic[7] as char });
        }
        return Err(GanError::Format("magic bytes do not match".into()));
    }

    let mut len = [0u8; 4];
    read_exact_or_truncated(&mut r, &mut len)?;
    let mut header_json = vec![0u8; u32::from_le_bytes(len) as usize];
    read_exact_or_truncated(&mut r, &mut header_json)?;
    let header: Header = serde_json::from_slice(&header_json)
        .map_err(|e| GanError::Format(format!("bad header: {e}")))?;

    header.generator.validate()?;
    header.critic.validate()?;
    if header.bounds.species().len() != header.generator.n_obs
        || header.bounds.params().len() != header.generator.m_cond
        || header.observables.len() != header.generator.n_obs
    {
        return Err(GanError::Integrity("bounds arity disagrees with the configs".into()));
    }

    // The tensor inventory must match what the config implies; build the
    // parameter block first and check the header against it.
    let mut gp = GeneratorParams::init(&header.generator, 0);
    let entries = gp.entries();
    if entries.len() != header.tensors.len() {
        return Err(GanError::Integrity(format!(
            "header lists {} tensors but the config implies {}",
            header.tensors.len(),
            entries.len()
        )));
    }
    let mut expected_floats = 0usize;
    for ((name, tensor), info) in entries.iter().zip(&header.tensors) {
        if *name != info.name || tensor.shape() != info.shape.as_slice() {
            return Err(GanError::Integrity(format!(
                "tensor '{}' {:?} does not match the config's '{}' {:?}",
                info.name,
                info.shape,
                name,
                tensor.shape()
            )));
        }
        expected_floats += tensor.len();
    }

    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if rest.len() < expected_floats * 4 {
        return Err(GanError::Truncated);
    }
    if rest.len() > expected_floats * 4 {
        return Err(GanError::Integrity(format!(
            "payload is {} bytes but the header implies {}",
            rest.len(),
            expected_floats * 4
        )));
    }

    let mut crc = crc32fast::Hasher::new();
    crc.update(&rest);
    let found = crc.finalize();
    if found != header.checksum {
        return Err(GanError::Checksum { expected: header.checksum, found });
    }

    let mut offset = 0usize;
    for (_, tensor) in gp.entries_mut() {
        for slot in tensor.iter_mut() {
            let bytes: [u8; 4] = rest[offset..offset + 4].try_into().unwrap();
            *slot = f32::from_le_bytes(bytes) as f64;
            offset += 4;
        }
    }

    let meta = WeightsMeta {
        model: header.model,
        grid: header.grid,
        observables: header.observables,
        bounds: header.bounds,
        critic: header.critic,
        train: header.train,
    };
    Ok((gp, meta))
}

fn read_exact_or_truncated(r: &mut impl Read, buf: &mut [u8]) -> Result<(), GanError> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            GanError::Truncated
        } else {
            GanError::Io(e)
        }
    })
}
