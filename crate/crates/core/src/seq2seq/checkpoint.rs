//! Binary checkpoint container. All integers and floats are little-endian.
//!
//! ```text
//! magic            8 bytes  "TNORMCKP"
//! version          u32
//! hidden_dim       u32
//! num_layers       u32
//! max_len          u32
//! batch_size       u64
//! epochs           u64
//! learning_rate    f64
//! rho              f64
//! epsilon          f64
//! seed             u64
//! validation_frac  f64
//! init             u32 (0 = keras, 1 = uniform), then f64 scale (0 for keras)
//! source alphabet  u32 count, then count × u32 code points
//! target alphabet  u32 count, then count × u32 code points
//! tensor count     u32
//! per tensor       u32 ndim, ndim × u32 dims, product(dims) × f64
//! ```
//!
//! Tensors appear in [`Weights::tensors`] order and their shapes must match
//! the header. Trailing bytes are rejected.

use std::fs;
use std::path::Path;

use thiserror::Error;

use super::model::{ModelParams, Weights};
use super::{Initialization, TrainingConfig};
use crate::charcodec::{Alphabet, CodecError, Side};

pub const MAGIC: &[u8; 8] = b"TNORMCKP";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint I/O on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("checkpoint format version {found}, this build reads version {expected}")]
    Version { found: u32, expected: u32 },
    #[error("checkpoint truncated at byte {0}")]
    Truncated(usize),
    #[error("checkpoint has {0} trailing bytes")]
    Trailing(usize),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("corrupt checkpoint alphabet: {0}")]
    Alphabet(#[from] CodecError),
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: usize) {
        let v = u32::try_from(v).expect("value fits in u32");
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn alphabet(&mut self, a: &Alphabet) {
        self.u32(a.symbols().len());
        for &c in a.symbols() {
            self.u32(c as usize);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or(CheckpointError::Truncated(self.buf.len()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn usize(&mut self) -> Result<usize, CheckpointError> {
        Ok(self.u32()? as usize)
    }
    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn alphabet(&mut self, side: Side) -> Result<Alphabet, CheckpointError> {
        let n = self.usize()?;
        let mut symbols = Vec::with_capacity(n.min(1 << 16));
        for _ in 0..n {
            let code = self.u32()?;
            let c = char::from_u32(code)
                .ok_or_else(|| CheckpointError::Corrupt(format!("invalid code point {code}")))?;
            symbols.push(c);
        }
        Ok(Alphabet::from_symbols(side, symbols)?)
    }
}

pub fn write_checkpoint(params: &ModelParams) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.u32(FORMAT_VERSION as usize);
    w.u32(params.hidden_dim());
    w.u32(params.num_layers());
    w.u32(params.max_len);
    let cfg = &params.config;
    w.u64(cfg.batch_size as u64);
    w.u64(cfg.epochs as u64);
    w.f64(cfg.learning_rate);
    w.f64(cfg.rho);
    w.f64(cfg.epsilon);
    w.u64(cfg.seed);
    w.f64(cfg.validation_fraction);
    match cfg.init {
        Initialization::Keras => {
            w.u32(0);
            w.f64(0.0);
        }
        Initialization::Uniform { scale } => {
            w.u32(1);
            w.f64(scale);
        }
    }
    w.alphabet(&params.source_alphabet);
    w.alphabet(&params.target_alphabet);
    let shapes = params.weights.shapes();
    w.u32(shapes.len());
    for (shape, data) in shapes.iter().zip(params.weights.tensors()) {
        w.u32(shape.len());
        for &d in shape {
            w.u32(d);
        }
        for &v in data {
            w.f64(v);
        }
    }
    w.0
}

pub fn read_checkpoint(bytes: &[u8]) -> Result<ModelParams, CheckpointError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(MAGIC.len()).map_err(|_| CheckpointError::BadMagic)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(CheckpointError::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let hidden_dim = r.usize()?;
    let num_layers = r.usize()?;
    let max_len = r.usize()?;
    let config = TrainingConfig {
        batch_size: r.u64()? as usize,
        epochs: r.u64()? as usize,
        learning_rate: r.f64()?,
        rho: r.f64()?,
        epsilon: r.f64()?,
        seed: r.u64()?,
        validation_fraction: r.f64()?,
        init: match (r.u32()?, r.f64()?) {
            (0, _) => Initialization::Keras,
            (1, scale) => Initialization::Uniform { scale },
            (tag, _) => return Err(CheckpointError::Corrupt(format!("unknown init tag {tag}"))),
        },
        hidden_dim,
        num_layers,
    };
    if hidden_dim == 0 || num_layers == 0 {
        return Err(CheckpointError::Corrupt(
            "zero hidden_dim or num_layers".into(),
        ));
    }
    let source_alphabet = r.alphabet(Side::Source)?;
    let target_alphabet = r.alphabet(Side::Target)?;

    let mut weights = Weights::zeros(
        source_alphabet.len(),
        target_alphabet.len(),
        hidden_dim,
        num_layers,
    );
    let expected = weights.shapes();
    let count = r.usize()?;
    if count != expected.len() {
        return Err(CheckpointError::Corrupt(format!(
            "{count} tensors, expected {}",
            expected.len()
        )));
    }
    for (i, (shape, data)) in expected.iter().zip(weights.tensors_mut()).enumerate() {
        let ndim = r.usize()?;
        let dims = (0..ndim)
            .map(|_| r.usize())
            .collect::<Result<Vec<_>, _>>()?;
        if dims != *shape {
            return Err(CheckpointError::Corrupt(format!(
                "tensor {i} has shape {dims:?}, expected {shape:?}"
            )));
        }
        for v in data.iter_mut() {
            *v = r.f64()?;
        }
    }
    if r.pos != bytes.len() {
        return Err(CheckpointError::Trailing(bytes.len() - r.pos));
    }
    Ok(ModelParams {
        weights,
        source_alphabet,
        target_alphabet,
        max_len,
        config,
    })
}

pub fn save_checkpoint(
    params: &ModelParams,
    path: impl AsRef<Path>,
) -> Result<(), CheckpointError> {
    let path = path.as_ref();
    fs::write(path, write_checkpoint(params)).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelParams, CheckpointError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| CheckpointError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_checkpoint(&bytes)
}
