//! Model checkpoints: a flat little-endian f64 parameter blob next to a
//! JSON header describing the architecture and run provenance.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::KarrasParams;
use crate::toy::model::{ConsistencyParam, ToyModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub dims: Vec<usize>,
    pub sigma_freqs: Vec<f64>,
    pub data_dim: usize,
    pub sigma_data: f64,
    pub sigma_min: f64,
    pub karras: KarrasParams,
    /// Hash of the resolved training config that produced the weights.
    pub config_hash: String,
    pub param_count: usize,
}

/// Write `<stem>.json` and `<stem>.bin`.
pub fn save_checkpoint(
    model: &ToyModel,
    cp: &ConsistencyParam,
    karras: &KarrasParams,
    config_hash: &str,
    stem: &Path,
) -> Result<()> {
    let header = CheckpointHeader {
        dims: model.dims().to_vec(),
        sigma_freqs: model.sigma_freqs().to_vec(),
        data_dim: model.data_dim(),
        sigma_data: cp.sigma_data,
        sigma_min: cp.sigma_min,
        karras: *karras,
        config_hash: config_hash.to_string(),
        param_count: model.param_count(),
    };
    fs::write(
        stem.with_extension("json"),
        serde_json::to_string_pretty(&header)?,
    )?;
    let mut bytes = Vec::with_capacity(model.param_count() * 8);
    for v in model.to_flat() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(stem.with_extension("bin"), bytes)?;
    Ok(())
}

/// Load a checkpoint from its `<stem>.json` / `<stem>.bin` pair.
pub fn load_checkpoint(stem: &Path) -> Result<(ToyModel, ConsistencyParam, CheckpointHeader)> {
    let header: CheckpointHeader =
        serde_json::from_str(&fs::read_to_string(stem.with_extension("json"))?)?;
    let bytes = fs::read(stem.with_extension("bin"))?;
    if bytes.len() != header.param_count * 8 {
        return Err(Error::Dimension(format!(
            "checkpoint blob holds {} bytes, header promises {} parameters",
            bytes.len(),
            header.param_count
        )));
    }
    let flat: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunks_exact yields 8 bytes")))
        .collect();
    let model = ToyModel::from_parts(
        header.data_dim,
        header.sigma_freqs.clone(),
        header.dims.clone(),
        &flat,
    )?;
    model.check_finite()?;
    let cp = ConsistencyParam {
        sigma_data: header.sigma_data,
        sigma_min: header.sigma_min,
    };
    Ok((model, cp, header))
}
