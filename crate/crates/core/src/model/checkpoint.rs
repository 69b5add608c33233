//! Versioned binary checkpoint.
//!
//! ```text
//! magic      8 bytes  "LFCKPT\0\0"
//! version    u32 LE
//! config     u32 LE length + JSON ModelConfig
//! vocab      u32 LE length + hex SHA-256 of the vocabulary file
//! step       u64 LE
//! groups     u32 LE count, then per group:
//!              u16 LE name length + UTF-8 name, u32 rows, u32 cols, rows*cols f64 LE
//! ```

use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::Array2;

use super::config::ModelConfig;
use super::network::Captioner;
use super::params::ParamSet;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"LFCKPT\0\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub model: Captioner,
    pub vocab_digest: String,
    pub step: u64,
}

fn corrupt(e: impl std::fmt::Display) -> Error {
    Error::Checkpoint(e.to_string())
}

impl Checkpoint {
    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let io = |e: std::io::Error| corrupt(e);
        w.write_all(MAGIC).map_err(io)?;
        w.write_u32::<LittleEndian>(CHECKPOINT_VERSION).map_err(io)?;
        let config = serde_json::to_vec(self.model.config())?;
        w.write_u32::<LittleEndian>(config.len() as u32).map_err(io)?;
        w.write_all(&config).map_err(io)?;
        w.write_u32::<LittleEndian>(self.vocab_digest.len() as u32).map_err(io)?;
        w.write_all(self.vocab_digest.as_bytes()).map_err(io)?;
        w.write_u64::<LittleEndian>(self.step).map_err(io)?;
        let params = self.model.params();
        w.write_u32::<LittleEndian>(params.len() as u32).map_err(io)?;
        for (name, value) in params.names().iter().zip(params.values()) {
            w.write_u16::<LittleEndian>(name.len() as u16).map_err(io)?;
            w.write_all(name.as_bytes()).map_err(io)?;
            w.write_u32::<LittleEndian>(value.nrows() as u32).map_err(io)?;
            w.write_u32::<LittleEndian>(value.ncols() as u32).map_err(io)?;
            for v in value.iter() {
                w.write_f64::<LittleEndian>(*v).map_err(io)?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let io = |e: std::io::Error| corrupt(format!("truncated checkpoint: {e}"));
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(corrupt("not a checkpoint file"));
        }
        let version = r.read_u32::<LittleEndian>().map_err(io)?;
        if version != CHECKPOINT_VERSION {
            return Err(corrupt(format!("unsupported checkpoint version {version}")));
        }
        let read_bytes = |r: &mut dyn Read, len: usize| -> Result<Vec<u8>> {
            let mut buf = vec![0u8; len];
            r.read_exact(&mut buf).map_err(io)?;
            Ok(buf)
        };
        let len = r.read_u32::<LittleEndian>().map_err(io)? as usize;
        let config: ModelConfig = serde_json::from_slice(&read_bytes(r, len)?)?;
        let len = r.read_u32::<LittleEndian>().map_err(io)? as usize;
        let vocab_digest = String::from_utf8(read_bytes(r, len)?).map_err(corrupt)?;
        let step = r.read_u64::<LittleEndian>().map_err(io)?;
        let groups = r.read_u32::<LittleEndian>().map_err(io)? as usize;
        let mut names = Vec::with_capacity(groups);
        let mut values = Vec::with_capacity(groups);
        for _ in 0..groups {
            let len = r.read_u16::<LittleEndian>().map_err(io)? as usize;
            let name = String::from_utf8(read_bytes(r, len)?).map_err(corrupt)?;
            let rows = r.read_u32::<LittleEndian>().map_err(io)? as usize;
            let cols = r.read_u32::<LittleEndian>().map_err(io)? as usize;
            let mut data = vec![0f64; rows * cols];
            r.read_f64_into::<LittleEndian>(&mut data).map_err(io)?;
            names.push(name);
            values.push(Array2::from_shape_vec((rows, cols), data).map_err(corrupt)?);
        }
        let model = Captioner::from_params(config, ParamSet::from_parts(names, values))?;
        Ok(Self {
            model,
            vocab_digest,
            step,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(&mut std::io::BufReader::new(file))
    }
}
