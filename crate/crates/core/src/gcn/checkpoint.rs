//! Binary model checkpoints.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic            8 bytes  "TGCNMODL"
//! version          u32      1
//! conv layer count u32
//! conv widths      u32 × count
//! init seed        u64
//! edge mode        u8       0 = manual, 1 = k-NN
//! k                u32      0 for manual
//! edge fingerprint u32 length, then that many UTF-8 bytes
//! parameter count  u64
//! parameters       f64 × count, declaration order
//! ```
//!
//! Nothing may follow the parameters.

use std::path::Path;

use super::model::{GcnConfig, GcnModel};
use crate::error::{Error, Result};
use crate::fsutil::atomic_write;
use crate::sensor_graph::EdgeMode;
use crate::tensor::Matrix;

const MAGIC: &[u8; 8] = b"TGCNMODL";
pub const FORMAT_VERSION: u32 = 1;

/// A model together with the graph structure it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: GcnModel,
    pub edge_mode: EdgeMode,
    pub edge_fingerprint: String,
}

pub fn encode_checkpoint(ckpt: &Checkpoint) -> Vec<u8> {
    let config = ckpt.model.config();
    let mut out = Vec::with_capacity(64 + 8 * ckpt.model.parameter_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(config.depth() as u32).to_le_bytes());
    for &w in &config.conv_widths {
        out.extend_from_slice(&(w as u32).to_le_bytes());
    }
    out.extend_from_slice(&config.init_seed.to_le_bytes());
    let (tag, k) = match ckpt.edge_mode {
        EdgeMode::Manual => (0u8, 0u32),
        EdgeMode::Knn(k) => (1u8, k as u32),
    };
    out.push(tag);
    out.extend_from_slice(&k.to_le_bytes());
    out.extend_from_slice(&(ckpt.edge_fingerprint.len() as u32).to_le_bytes());
    out.extend_from_slice(ckpt.edge_fingerprint.as_bytes());
    out.extend_from_slice(&(ckpt.model.parameter_count() as u64).to_le_bytes());
    for p in ckpt.model.params() {
        for v in p.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Format(format!("truncated while reading {what}")))?;
        let slice = &self.buf[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Checkpoint> {
    let mut cur = Cursor { buf: bytes, pos: 0 };
    if cur.take(8, "magic")? != MAGIC {
        return Err(Error::Format("not a model checkpoint (bad magic)".into()));
    }
    let version = cur.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported checkpoint version {version}, expected {FORMAT_VERSION}"
        )));
    }
    let depth = cur.u32("layer count")? as usize;
    if depth > super::model::MAX_CONV_LAYERS {
        return Err(Error::Format(format!("{depth} conv layers")));
    }
    let widths = (0..depth)
        .map(|_| cur.u32("conv width").map(|w| w as usize))
        .collect::<Result<Vec<_>>>()?;
    let init_seed = cur.u64("init seed")?;
    let config = GcnConfig::new(widths, init_seed).map_err(|e| Error::Format(e.to_string()))?;

    let tag = cur.u8("edge mode")?;
    let k = cur.u32("k")? as usize;
    let edge_mode = match (tag, k) {
        (0, 0) => EdgeMode::Manual,
        (1, 1..=23) => EdgeMode::Knn(k),
        _ => return Err(Error::Format(format!("bad edge mode tag {tag} with k = {k}"))),
    };
    let fp_len = cur.u32("fingerprint length")? as usize;
    let edge_fingerprint = std::str::from_utf8(cur.take(fp_len, "fingerprint")?)
        .map_err(|_| Error::Format("edge fingerprint is not UTF-8".into()))?
        .to_string();

    let count = cur.u64("parameter count")? as usize;
    if count != config.parameter_count() {
        return Err(Error::Format(format!(
            "{count} parameters stored, config needs {}",
            config.parameter_count()
        )));
    }
    let mut params = Vec::new();
    for (rows, cols) in config.parameter_shapes() {
        let raw = cur.take(rows * cols * 8, "parameters")?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        params.push(Matrix::from_vec(rows, cols, data)?);
    }
    if cur.pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes after parameters",
            bytes.len() - cur.pos
        )));
    }
    let model = GcnModel::from_params(config, params).map_err(|e| Error::Format(e.to_string()))?;
    Ok(Checkpoint {
        model,
        edge_mode,
        edge_fingerprint,
    })
}

pub fn save_model(ckpt: &Checkpoint, path: &Path) -> Result<()> {
    atomic_write(path, &encode_checkpoint(ckpt))
}

pub fn load_model(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}
