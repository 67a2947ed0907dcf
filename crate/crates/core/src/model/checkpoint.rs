//! Binary checkpoint: `TDGM` magic, format version (u32), config JSON
//! length (u64) and bytes, parameter count (u64), then every parameter as a
//! little-endian f64.

use std::fs;
use std::path::Path;

use super::{GatedModel, ModelConfig};
use crate::data_io::write_atomic;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"TDGM";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn save_checkpoint(path: impl AsRef<Path>, model: &GatedModel) -> Result<()> {
    let config = serde_json::to_vec(model.config())?;
    let mut buf = Vec::with_capacity(24 + config.len() + 8 * model.num_params());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(config.len() as u64).to_le_bytes());
    buf.extend_from_slice(&config);
    buf.extend_from_slice(&(model.num_params() as u64).to_le_bytes());
    for p in model.params() {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    write_atomic(path, &buf)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<GatedModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let err = |m: String| Error::Format {
        path: path.to_path_buf(),
        message: m,
    };
    let mut pos = 0;
    let mut take = |n: usize| -> Result<&[u8]> {
        let end = pos + n;
        let s = bytes
            .get(pos..end)
            .ok_or_else(|| err("truncated checkpoint".into()))?;
        pos = end;
        Ok(s)
    };
    if take(4)? != MAGIC {
        return Err(err("not a model checkpoint".into()));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(err(format!("unsupported checkpoint version {version}")));
    }
    let config_len = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
    let config: ModelConfig =
        serde_json::from_slice(take(config_len)?).map_err(|e| err(format!("bad config: {e}")))?;
    let count = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
    let raw = take(
        count
            .checked_mul(8)
            .ok_or_else(|| err("bad parameter count".into()))?,
    )?;
    let params = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if pos != bytes.len() {
        return Err(err("trailing bytes after parameters".into()));
    }
    GatedModel::from_parts(config, params)
}
