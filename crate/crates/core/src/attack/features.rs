//! Loss-feature extraction over a fixed noise set and time set.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::{diffusion_loss, DenoiserParams, NoiseSchedule};
use crate::tabular::RowId;
use crate::Scalar;

use super::{AttackError, Result};

/// The fixed set of noise draws shared by every model and phase of an
/// experiment. Regenerating with the same seed and dimensions yields the
/// same noises.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSet {
    noises: Vec<Vec<Scalar>>,
    seed: u64,
}

impl NoiseSet {
    pub fn generate(n_eps: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noises = (0..n_eps)
            .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        Self { noises, seed }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.noises.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.noises.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.noises.first().map_or(0, Vec::len)
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn noise(&self, idx: usize) -> &[Scalar] {
        &self.noises[idx]
    }
}

/// Sorted, distinct timesteps, all within `[0, T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSet {
    timesteps: Vec<usize>,
}

impl TimeSet {
    pub fn new(mut timesteps: Vec<usize>, t_total: usize) -> Result<Self> {
        if timesteps.is_empty() {
            return Err(AttackError::InvalidConfig("time set is empty".into()));
        }
        timesteps.sort_unstable();
        timesteps.dedup();
        if let Some(&worst) = timesteps.last() {
            if worst >= t_total {
                return Err(AttackError::InvalidConfig(format!(
                    "timestep {worst} outside [0, {t_total})"
                )));
            }
        }
        Ok(Self { timesteps })
    }

    #[inline]
    pub fn timesteps(&self) -> &[usize] {
        &self.timesteps
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.timesteps.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.timesteps.is_empty()
    }
}

/// Per-record grid of diffusion losses, row-major; cell `(i, j * n_t + k)`
/// is the loss of record `i` under noise `j` at the `k`-th timestep
/// (noise-major, time-minor).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub n_eps: usize,
    pub n_t: usize,
    pub timesteps: Vec<usize>,
    pub values: Vec<Scalar>,
    pub record_ids: Vec<RowId>,
    pub model_ids: Vec<u32>,
    pub labels: Option<Vec<bool>>,
    pub noise_seed: u64,
}

impl FeatureMatrix {
    #[inline]
    pub fn width(&self) -> usize {
        self.n_eps * self.n_t
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.record_ids.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.values[i * self.width()..(i + 1) * self.width()]
    }

    #[inline]
    pub fn cell(&self, row: usize, noise_idx: usize, time_idx: usize) -> Scalar {
        self.row(row)[noise_idx * self.n_t + time_idx]
    }

    /// Pools rows from several matrices extracted with the same grid.
    pub fn concat(parts: &[&FeatureMatrix]) -> Result<FeatureMatrix> {
        let first = parts
            .first()
            .ok_or_else(|| AttackError::InvalidConfig("nothing to concatenate".into()))?;
        let mut out = FeatureMatrix {
            n_eps: first.n_eps,
            n_t: first.n_t,
            timesteps: first.timesteps.clone(),
            values: Vec::new(),
            record_ids: Vec::new(),
            model_ids: Vec::new(),
            labels: first.labels.as_ref().map(|_| Vec::new()),
            noise_seed: first.noise_seed,
        };
        for part in parts {
            if part.n_eps != out.n_eps || part.n_t != out.n_t || part.timesteps != out.timesteps {
                return Err(AttackError::WidthMismatch {
                    expected: out.width(),
                    got: part.width(),
                });
            }
            if part.noise_seed != out.noise_seed {
                return Err(AttackError::InvalidConfig(
                    "feature matrices use different noise sets".into(),
                ));
            }
            out.values.extend_from_slice(&part.values);
            out.record_ids.extend_from_slice(&part.record_ids);
            out.model_ids.extend_from_slice(&part.model_ids);
            match (&mut out.labels, &part.labels) {
                (Some(acc), Some(l)) => acc.extend_from_slice(l),
                (None, None) => {}
                _ => {
                    return Err(AttackError::InvalidConfig(
                        "cannot mix labeled and unlabeled feature matrices".into(),
                    ))
                }
            }
        }
        Ok(out)
    }
}

/// Computes the `n_eps x n_t` loss grid for every record. Pure: identical
/// inputs give a bit-identical matrix, regardless of worker count.
pub fn extract_features(
    params: &DenoiserParams<Scalar>,
    records: &[(RowId, Vec<Scalar>)],
    noise_set: &NoiseSet,
    time_set: &TimeSet,
    schedule: &NoiseSchedule<Scalar>,
    model_id: u32,
    labels: Option<&[bool]>,
) -> Result<FeatureMatrix> {
    if let Some(l) = labels {
        if l.len() != records.len() {
            return Err(AttackError::InvalidConfig(format!(
                "{} labels for {} records",
                l.len(),
                records.len()
            )));
        }
    }
    let rows: Vec<Vec<Scalar>> = records
        .par_iter()
        .map(|(record_id, x0)| {
            let mut row = Vec::with_capacity(noise_set.len() * time_set.len());
            for j in 0..noise_set.len() {
                for &t in time_set.timesteps() {
                    let loss = diffusion_loss(params, x0, noise_set.noise(j), t, schedule)
                        .map_err(AttackError::Diffusion)?;
                    if !loss.is_finite() {
                        return Err(AttackError::NonFiniteFeature {
                            record_id: *record_id,
                            noise_idx: j,
                            t,
                        });
                    }
                    row.push(loss);
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;

    Ok(FeatureMatrix {
        n_eps: noise_set.len(),
        n_t: time_set.len(),
        timesteps: time_set.timesteps().to_vec(),
        values: rows.concat(),
        record_ids: records.iter().map(|(id, _)| *id).collect(),
        model_ids: vec![model_id; records.len()],
        labels: labels.map(|l| l.to_vec()),
        noise_seed: noise_set.seed(),
    })
}

pub const FEATURE_MAGIC: &[u8; 4] = b"TFMX";

#[derive(Debug, Serialize, Deserialize)]
struct FeatureSidecar {
    noise_seed: u64,
    model_ids: Vec<u32>,
    record_ids: Vec<RowId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<bool>>,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".json");
    path.with_file_name(name)
}

/// Writes the binary feature file (header + f64 block) and its JSON sidecar
/// (`<path>.json`) with the noise-set seed and row bookkeeping.
pub fn write_feature_matrix(path: &Path, m: &FeatureMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(FEATURE_MAGIC)?;
    w.write_all(&(m.n_rows() as u64).to_le_bytes())?;
    w.write_all(&(m.width() as u32).to_le_bytes())?;
    w.write_all(&(m.n_eps as u32).to_le_bytes())?;
    w.write_all(&(m.n_t as u32).to_le_bytes())?;
    for &t in &m.timesteps {
        w.write_all(&(t as u32).to_le_bytes())?;
    }
    for v in &m.values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;

    let sidecar = FeatureSidecar {
        noise_seed: m.noise_seed,
        model_ids: m.model_ids.clone(),
        record_ids: m.record_ids.clone(),
        labels: m.labels.clone(),
    };
    let mut f = BufWriter::new(File::create(sidecar_path(path))?);
    serde_json::to_writer_pretty(&mut f, &sidecar)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn read_feature_matrix(path: &Path) -> Result<FeatureMatrix> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != FEATURE_MAGIC {
        return Err(AttackError::MalformedFeatureFile(format!(
            "bad magic {magic:?}"
        )));
    }
    let n_rows = read_u64(&mut r)? as usize;
    let width = read_u32(&mut r)? as usize;
    let n_eps = read_u32(&mut r)? as usize;
    let n_t = read_u32(&mut r)? as usize;
    if n_eps * n_t != width {
        return Err(AttackError::MalformedFeatureFile(format!(
            "width {width} != n_eps {n_eps} * n_t {n_t}"
        )));
    }
    let mut timesteps = Vec::with_capacity(n_t);
    for _ in 0..n_t {
        timesteps.push(read_u32(&mut r)? as usize);
    }
    let mut values = Vec::with_capacity(n_rows * width);
    let mut buf = [0u8; 8];
    for _ in 0..n_rows * width {
        r.read_exact(&mut buf)?;
        values.push(f64::from_le_bytes(buf));
    }

    let sidecar: FeatureSidecar =
        serde_json::from_reader(BufReader::new(File::open(sidecar_path(path))?))?;
    if sidecar.record_ids.len() != n_rows || sidecar.model_ids.len() != n_rows {
        return Err(AttackError::MalformedFeatureFile(
            "sidecar row bookkeeping does not match the binary row count".into(),
        ));
    }
    if let Some(l) = &sidecar.labels {
        if l.len() != n_rows {
            return Err(AttackError::MalformedFeatureFile(
                "sidecar labels do not match the binary row count".into(),
            ));
        }
    }
    Ok(FeatureMatrix {
        n_eps,
        n_t,
        timesteps,
        values,
        record_ids: sidecar.record_ids,
        model_ids: sidecar.model_ids,
        labels: sidecar.labels,
        noise_seed: sidecar.noise_seed,
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}
