//! Binary checkpoint format.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic "HRGR" | version u32 | 6 dim fields u32 | n_params u32
//! then per parameter: name_len u32, name bytes, ndim u32, dims u32...,
//! values f64...
//! finally: meta_len u32, meta JSON bytes
//! ```
//!
//! Values are raw IEEE-754 bits, so a save/load round trip reproduces
//! parameters exactly.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::numerics::Array;

use super::params::{Dims, ModelParameters};

const MAGIC: &[u8; 4] = b"HRGR";
const VERSION: u32 = 1;

/// Trailing JSON block describing how the parameters were produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub epoch: usize,
    pub seed: u64,
    pub config_hash: String,
}

/// 64-bit FNV-1a, used to fingerprint configuration files.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub fn save_checkpoint(
    path: &Path,
    params: &ModelParameters,
    meta: &CheckpointMeta,
) -> Result<(), ModelError> {
    let io_err = |source| ModelError::Io { path: path.display().to_string(), source };
    let file = File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(io_err);

    put(MAGIC)?;
    put(&VERSION.to_le_bytes())?;
    let d = &params.dims;
    for v in [d.d_hidden, d.d_embed, d.regions, d.d_feat, d.vocab_size, d.n_templates] {
        put(&(v as u32).to_le_bytes())?;
    }
    put(&(params.params.len() as u32).to_le_bytes())?;
    for (name, arr) in &params.params {
        put(&(name.len() as u32).to_le_bytes())?;
        put(name.as_bytes())?;
        put(&(arr.ndim() as u32).to_le_bytes())?;
        for &dim in arr.shape() {
            put(&(dim as u32).to_le_bytes())?;
        }
        for &v in arr.data() {
            put(&v.to_le_bytes())?;
        }
    }
    let meta_json = serde_json::to_vec(meta)
        .map_err(|e| ModelError::BadCheckpoint(format!("meta serialization failed: {e}")))?;
    put(&(meta_json.len() as u32).to_le_bytes())?;
    put(&meta_json)?;
    w.flush().map_err(io_err)
}

/// Load a checkpoint. When `expected` is given, a differing dimension
/// block is rejected before any parameter data is interpreted.
pub fn load_checkpoint(
    path: &Path,
    expected: Option<Dims>,
) -> Result<(ModelParameters, CheckpointMeta), ModelError> {
    let io_err = |source| ModelError::Io { path: path.display().to_string(), source };
    let bad = |msg: String| ModelError::BadCheckpoint(msg);
    let file = File::open(path).map_err(io_err)?;
    let mut r = BufReader::new(file);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io_err)?;
    if &magic != MAGIC {
        return Err(bad(format!("bad magic {magic:?}, expected {MAGIC:?}")));
    }
    let version = read_u32(&mut r, path)?;
    if version != VERSION {
        return Err(bad(format!("unsupported format version {version}")));
    }
    let mut fields = [0usize; 6];
    for f in &mut fields {
        *f = read_u32(&mut r, path)? as usize;
    }
    let dims = Dims {
        d_hidden: fields[0],
        d_embed: fields[1],
        regions: fields[2],
        d_feat: fields[3],
        vocab_size: fields[4],
        n_templates: fields[5],
    };
    if let Some(exp) = expected {
        if dims != exp {
            return Err(ModelError::DimMismatch {
                checkpoint: dims.to_string(),
                expected: exp.to_string(),
            });
        }
    }

    let n_params = read_u32(&mut r, path)? as usize;
    let mut params = BTreeMap::new();
    for _ in 0..n_params {
        let name_len = read_u32(&mut r, path)? as usize;
        let mut name_bytes = vec![0u8; name_len];
        r.read_exact(&mut name_bytes).map_err(io_err)?;
        let name = String::from_utf8(name_bytes)
            .map_err(|_| bad("parameter name is not valid utf-8".into()))?;
        let ndim = read_u32(&mut r, path)? as usize;
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(read_u32(&mut r, path)? as usize);
        }
        let len: usize = shape.iter().product();
        let mut data = Vec::with_capacity(len);
        let mut buf = [0u8; 8];
        for _ in 0..len {
            r.read_exact(&mut buf).map_err(io_err)?;
            data.push(f64::from_le_bytes(buf));
        }
        let arr = Array::new(shape, data).map_err(|e| bad(format!("parameter {name}: {e}")))?;
        if params.insert(name.clone(), arr).is_some() {
            return Err(bad(format!("duplicate parameter {name}")));
        }
    }

    let meta_len = read_u32(&mut r, path)? as usize;
    let mut meta_bytes = vec![0u8; meta_len];
    r.read_exact(&mut meta_bytes).map_err(io_err)?;
    let meta: CheckpointMeta = serde_json::from_slice(&meta_bytes)
        .map_err(|e| bad(format!("meta block is not valid JSON: {e}")))?;

    // The stored parameter set must match the schema for these dims
    // exactly; anything else means the file is corrupt or from a
    // different model layout.
    let schema = ModelParameters::schema_entries(&dims);
    if schema.len() != params.len() {
        return Err(bad(format!(
            "expected {} parameters for dims [{dims}], found {}",
            schema.len(),
            params.len()
        )));
    }
    for (name, shape, _) in &schema {
        match params.get(name) {
            None => return Err(bad(format!("missing parameter {name}"))),
            Some(arr) if arr.shape() != shape.as_slice() => {
                return Err(bad(format!(
                    "parameter {name} has shape {:?}, expected {:?}",
                    arr.shape(),
                    shape
                )));
            }
            Some(arr) if !arr.is_finite() => {
                return Err(bad(format!("parameter {name} contains non-finite values")));
            }
            Some(_) => {}
        }
    }

    Ok((ModelParameters { dims, params }, meta))
}

fn read_u32(r: &mut impl Read, path: &Path) -> Result<u32, ModelError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|source| ModelError::Io { path: path.display().to_string(), source })?;
    Ok(u32::from_le_bytes(buf))
}
