//! Versioned binary checkpoint for network parameters.
//!
//! Layout (all integers little-endian, see `docs/FORMATS.md`):
//!
//! ```text
//! magic   4 bytes  "TMLP"
//! version u32      currently 1
//! n_sizes u32      number of layer sizes (layers + 1)
//! sizes   u32 * n_sizes
//! act     u8       0 = relu, 1 = tanh
//! head    u8       0 = linear, 1 = sigmoid
//! blocks  f64 * …  per weight layer, in order: weight matrix row-major
//!                  (sizes[i+1] x sizes[i]), then bias vector (sizes[i+1])
//! ```
//!
//! Values are stored as `f64` regardless of the in-memory scalar.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::real::Real;

use super::{Activation, DenseMatrix, MlpParams, NumericsError, OutputHead, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"TMLP";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_mlp<T: Real>(path: &Path, params: &MlpParams<T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_mlp_to(&mut w, params)?;
    w.flush()?;
    Ok(())
}

pub fn write_mlp_to<T: Real, W: Write>(w: &mut W, params: &MlpParams<T>) -> Result<()> {
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(params.layer_sizes().len() as u32).to_le_bytes())?;
    for &s in params.layer_sizes() {
        w.write_all(&(s as u32).to_le_bytes())?;
    }
    w.write_all(&[match params.activation() {
        Activation::Relu => 0u8,
        Activation::Tanh => 1u8,
    }])?;
    w.write_all(&[match params.output_head() {
        OutputHead::Linear => 0u8,
        OutputHead::Sigmoid => 1u8,
    }])?;
    for (weights, biases) in params.weights().iter().zip(params.biases()) {
        for v in weights.as_slice() {
            w.write_all(&v.to_f64().expect("finite parameter").to_le_bytes())?;
        }
        for v in biases {
            w.write_all(&v.to_f64().expect("finite parameter").to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_mlp<T: Real>(path: &Path) -> Result<MlpParams<T>> {
    let mut r = BufReader::new(File::open(path)?);
    read_mlp_from(&mut r)
}

pub fn read_mlp_from<T: Real, R: Read>(r: &mut R) -> Result<MlpParams<T>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(NumericsError::MalformedCheckpoint(format!(
            "bad magic {magic:?}"
        )));
    }
    let version = read_u32(r)?;
    if version != CHECKPOINT_VERSION {
        return Err(NumericsError::MalformedCheckpoint(format!(
            "unsupported version {version}"
        )));
    }
    let n_sizes = read_u32(r)? as usize;
    if !(2..=1024).contains(&n_sizes) {
        return Err(NumericsError::MalformedCheckpoint(format!(
            "implausible layer count {n_sizes}"
        )));
    }
    let mut sizes = Vec::with_capacity(n_sizes);
    for _ in 0..n_sizes {
        sizes.push(read_u32(r)? as usize);
    }
    let mut flags = [0u8; 2];
    r.read_exact(&mut flags)?;
    let activation = match flags[0] {
        0 => Activation::Relu,
        1 => Activation::Tanh,
        other => {
            return Err(NumericsError::MalformedCheckpoint(format!(
                "unknown activation tag {other}"
            )))
        }
    };
    let head = match flags[1] {
        0 => OutputHead::Linear,
        1 => OutputHead::Sigmoid,
        other => {
            return Err(NumericsError::MalformedCheckpoint(format!(
                "unknown head tag {other}"
            )))
        }
    };
    let mut weights = Vec::with_capacity(n_sizes - 1);
    let mut biases = Vec::with_capacity(n_sizes - 1);
    for i in 0..n_sizes - 1 {
        let (rows, cols) = (sizes[i + 1], sizes[i]);
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(T::from_f64_lossy(read_f64(r)?));
        }
        weights.push(DenseMatrix::from_vec(rows, cols, data)?);
        let mut b = Vec::with_capacity(rows);
        for _ in 0..rows {
            b.push(T::from_f64_lossy(read_f64(r)?));
        }
        biases.push(b);
    }
    MlpParams::from_parts(sizes, weights, biases, activation, head)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}
