//! Per-record membership statistics and score emission.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diffusion::{
    ddim_step_with_eps, diffusion_loss, iterated_forward, DenoiserParams, NoiseSchedule,
};
use crate::evaluation::auc;
use crate::tabular::RowId;
use crate::Scalar;

use super::features::NoiseSet;
use super::{AttackError, Result};

/// Membership confidence for one challenge query, clipped to `[0, 1]`
/// (higher means more likely member).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub model_id: u32,
    pub record_id: RowId,
    pub score: f64,
}

/// Diffusion loss at a fixed `(eps0, t)`: the naive membership statistic.
/// Lower loss means more likely member; negate before ranking so that higher
/// scores stay member-oriented.
pub fn naive_loss_score(
    params: &DenoiserParams<Scalar>,
    x0: &[Scalar],
    eps0: &[Scalar],
    t: usize,
    schedule: &NoiseSchedule<Scalar>,
) -> Result<Scalar> {
    Ok(diffusion_loss(params, x0, eps0, t, schedule)?)
}

/// Whether the backward half of the round trip re-predicts the noise at the
/// noisier level (the published procedure) or reuses the forward step's
/// prediction (which makes the round trip an exact identity).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum PsiPrediction {
    #[default]
    Fresh,
    Cached,
}


/// Deterministic round-trip deviation (the t-error):
/// `|| psi(phi(x_t, t), t) - x_t ||_2` with `x_t` built by the iterated
/// deterministic forward process from the clean record. Plain (non-squared)
/// L2. `stride` is the level distance covered by the phi/psi pair.
pub fn secmi_t_error(
    params: &DenoiserParams<Scalar>,
    x0: &[Scalar],
    t: usize,
    schedule: &NoiseSchedule<Scalar>,
    mode: PsiPrediction,
    stride: usize,
) -> Result<Scalar> {
    if stride == 0 {
        return Err(AttackError::InvalidConfig("stride must be >= 1".into()));
    }
    let x_t = iterated_forward(params, x0, t, schedule)?;
    let eps_fwd = params.predict_noise(&x_t, t, schedule)?;
    let up = ddim_step_with_eps(&x_t, t, t + stride, schedule, &eps_fwd)?;
    let eps_back = match mode {
        PsiPrediction::Fresh => params.predict_noise(&up, t + stride, schedule)?,
        PsiPrediction::Cached => eps_fwd,
    };
    let back = ddim_step_with_eps(&up, t + stride, t, schedule, &eps_back)?;
    Ok(back
        .iter()
        .zip(&x_t)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<Scalar>()
        .sqrt())
}

/// Per-noise AUC of the naive statistic plus the best candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestNoiseReport {
    pub per_noise_auc: Vec<f64>,
    pub best_index: usize,
}

impl BestNoiseReport {
    pub fn best_auc(&self) -> f64 {
        self.per_noise_auc[self.best_index]
    }
}

/// Labeled reference sweep over candidate noises: AUC of the (negated) naive
/// loss for each candidate, and the argmax (ties to the lowest index).
/// Needs ground-truth labels, so this is an oracle, not a deployable attack.
pub fn best_noise_oracle(
    params: &DenoiserParams<Scalar>,
    records: &[(RowId, Vec<Scalar>)],
    labels: &[bool],
    candidates: &NoiseSet,
    t: usize,
    schedule: &NoiseSchedule<Scalar>,
) -> Result<BestNoiseReport> {
    if labels.len() != records.len() {
        return Err(AttackError::InvalidConfig(format!(
            "{} labels for {} records",
            labels.len(),
            records.len()
        )));
    }
    if candidates.is_empty() {
        return Err(AttackError::InvalidConfig("no candidate noises".into()));
    }
    let mut per_noise_auc = Vec::with_capacity(candidates.len());
    for j in 0..candidates.len() {
        let scores: Vec<f64> = records
            .iter()
            .map(|(_, x0)| {
                naive_loss_score(params, x0, candidates.noise(j), t, schedule).map(|l| -l)
            })
            .collect::<Result<_>>()?;
        per_noise_auc.push(auc(&scores, labels)?);
    }
    let mut best_index = 0;
    for (j, &v) in per_noise_auc.iter().enumerate() {
        if v > per_noise_auc[best_index] {
            best_index = j;
        }
    }
    Ok(BestNoiseReport {
        per_noise_auc,
        best_index,
    })
}

/// Writes `model_id,record_id,score` with scores to six decimals.
pub fn write_scores_csv(path: &Path, scores: &[ScoreRecord]) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(b"model_id,record_id,score\n")?;
    for s in scores {
        writeln!(f, "{},{},{:.6}", s.model_id, s.record_id, s.score)?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_scores_csv(path: &Path) -> Result<Vec<ScoreRecord>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(BufReader::new(File::open(path)?));
    {
        let headers = r.headers().map_err(|e| {
            AttackError::MalformedScoresFile(format!("cannot read header: {e}"))
        })?;
        let expected = ["model_id", "record_id", "score"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(AttackError::MalformedScoresFile(format!(
                "unexpected header {headers:?}"
            )));
        }
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| AttackError::MalformedScoresFile(e.to_string()))?;
        let parse = |i: usize| -> Result<&str> {
            rec.get(i).ok_or_else(|| {
                AttackError::MalformedScoresFile(format!("short record at line {:?}", rec.position()))
            })
        };
        out.push(ScoreRecord {
            model_id: parse(0)?.parse().map_err(|e| {
                AttackError::MalformedScoresFile(format!("bad model_id: {e}"))
            })?,
            record_id: parse(1)?.parse().map_err(|e| {
                AttackError::MalformedScoresFile(format!("bad record_id: {e}"))
            })?,
            score: parse(2)?.parse().map_err(|e| {
                AttackError::MalformedScoresFile(format!("bad score: {e}"))
            })?,
        });
    }
    Ok(out)
}
