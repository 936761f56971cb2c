//! The trained membership classifier: a three-layer MLP over z-scored loss
//! features, with hyper-parameters chosen by validation TPR at fixed FPR.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::evaluation::{auc, tpr_at_fpr};
use crate::numerics::{
    adam_step, read_mlp, sigmoid, write_mlp, Activation, AdamState, MlpGrads, MlpParams,
    OutputHead,
};
use crate::Scalar;

use super::features::FeatureMatrix;
use super::scores::ScoreRecord;
use super::{AttackError, Result};

/// Per-feature z-score parameters, fitted on attack-training features only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureNorm {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl FeatureNorm {
    /// Columns with (near-)zero spread get unit scale, so they normalize to
    /// zero instead of blowing up.
    pub fn fit(features: &FeatureMatrix) -> Self {
        let width = features.width();
        let n = features.n_rows() as f64;
        let mut mean = vec![0.0; width];
        for i in 0..features.n_rows() {
            for (m, v) in mean.iter_mut().zip(features.row(i)) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; width];
        for i in 0..features.n_rows() {
            for (s, (v, m)) in var.iter_mut().zip(features.row(i).iter().zip(&mean)) {
                let d = v - m;
                *s += d * d;
            }
        }
        let std = var
            .iter()
            .map(|&s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn apply(&self, row: &[Scalar]) -> Vec<Scalar> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect()
    }
}

/// Hyper-parameter candidates: hidden widths cross learning rates. A width
/// `w` means hidden layers `[w, w/2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HparamGrid {
    pub hidden_widths: Vec<usize>,
    pub lrs: Vec<f64>,
}

impl Default for HparamGrid {
    fn default() -> Self {
        Self {
            hidden_widths: vec![64, 128],
            lrs: vec![1e-3, 3e-4],
        }
    }
}

/// The winning configuration and its validation metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedHparams {
    pub hidden_width: usize,
    pub lr: f64,
    pub val_tpr_at_fpr: f64,
    pub val_auc: f64,
    pub fpr_level: f64,
    pub epochs: usize,
}

/// Trained attack model plus everything needed to score new feature rows.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackClassifier {
    pub mlp: MlpParams<Scalar>,
    pub feature_norm: FeatureNorm,
    pub selected: SelectedHparams,
    pub n_eps: usize,
    pub n_t: usize,
    pub timesteps: Vec<usize>,
    pub noise_seed: u64,
}

fn require_balanced_labels(features: &FeatureMatrix) -> Result<Vec<bool>> {
    let labels = features.labels.clone().ok_or(AttackError::MissingLabels)?;
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 || n_pos != n_neg {
        return Err(AttackError::UnbalancedLabels { n_pos, n_neg });
    }
    Ok(labels)
}

/// Trains one candidate per grid point on the normalized training rows and
/// keeps the one with the best validation TPR at `fpr_level` (ties prefer
/// the smaller hidden width, then the lower learning rate).
///
/// Feature normalization is fitted on the training matrix only; validation
/// rows come from held-out models and never influence the weights.
pub fn train_attack_classifier(
    train: &FeatureMatrix,
    val: &FeatureMatrix,
    grid: &HparamGrid,
    epochs: usize,
    seed: u64,
    fpr_level: f64,
) -> Result<AttackClassifier> {
    if train.width() != val.width() {
        return Err(AttackError::WidthMismatch {
            expected: train.width(),
            got: val.width(),
        });
    }
    if grid.hidden_widths.is_empty() || grid.lrs.is_empty() {
        return Err(AttackError::InvalidConfig("empty hyper-parameter grid".into()));
    }
    let train_labels = require_balanced_labels(train)?;
    let val_labels = require_balanced_labels(val)?;

    let norm = FeatureNorm::fit(train);
    let train_rows: Vec<Vec<Scalar>> = (0..train.n_rows()).map(|i| norm.apply(train.row(i))).collect();
    let val_rows: Vec<Vec<Scalar>> = (0..val.n_rows()).map(|i| norm.apply(val.row(i))).collect();

    let mut widths = grid.hidden_widths.clone();
    widths.sort_unstable();
    let mut lrs = grid.lrs.clone();
    lrs.sort_by(|a, b| a.partial_cmp(b).expect("finite lrs"));

    let mut best: Option<(SelectedHparams, MlpParams<Scalar>)> = None;
    let mut candidate_idx = 0u64;
    for &width in &widths {
        for &lr in &lrs {
            let mlp = train_candidate(
                &train_rows,
                &train_labels,
                width,
                lr,
                epochs,
                seed,
                candidate_idx,
            )?;
            candidate_idx += 1;

            let val_scores: Vec<f64> = val_rows
                .par_iter()
                .map(|row| mlp.forward(row).map(|out| out[0]))
                .collect::<std::result::Result<_, _>>()?;
            let val_tpr = tpr_at_fpr(&val_scores, &val_labels, fpr_level)?;
            let val_auc = auc(&val_scores, &val_labels)?;
            let better = match &best {
                None => true,
                Some((incumbent, _)) => val_tpr > incumbent.val_tpr_at_fpr,
            };
            if better {
                best = Some((
                    SelectedHparams {
                        hidden_width: width,
                        lr,
                        val_tpr_at_fpr: val_tpr,
                        val_auc,
                        fpr_level,
                        epochs,
                    },
                    mlp,
                ));
            }
        }
    }
    let (selected, mlp) = best.expect("grid is nonempty");
    Ok(AttackClassifier {
        mlp,
        feature_norm: norm,
        selected,
        n_eps: train.n_eps,
        n_t: train.n_t,
        timesteps: train.timesteps.clone(),
        noise_seed: train.noise_seed,
    })
}

/// Full-batch Adam on the logistic loss. The gradient is fused through the
/// sigmoid head (`dL/dz = y_hat - y`), so saturated heads stay finite.
/// Rows are reduced in fixed-size chunks, sequentially recombined, so the
/// result does not depend on the worker count.
fn train_candidate(
    rows: &[Vec<Scalar>],
    labels: &[bool],
    width: usize,
    lr: f64,
    epochs: usize,
    seed: u64,
    candidate_idx: u64,
) -> Result<MlpParams<Scalar>> {
    let input_dim = rows.first().map_or(0, Vec::len);
    let sizes = vec![input_dim, width, (width / 2).max(1), 1];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(candidate_idx);
    let mut mlp = MlpParams::init_glorot(sizes, Activation::Relu, OutputHead::Sigmoid, &mut rng)?;
    let mut opt = AdamState::with_lr(&mlp, lr)?;

    let inv_n = 1.0 / rows.len() as f64;
    const CHUNK: usize = 64;
    for _ in 0..epochs {
        let partials: Vec<Result<MlpGrads<Scalar>>> = rows
            .par_chunks(CHUNK)
            .zip(labels.par_chunks(CHUNK))
            .map(|(row_chunk, label_chunk)| {
                let mut local: Option<MlpGrads<Scalar>> = None;
                for (row, &label) in row_chunk.iter().zip(label_chunk) {
                    let trace = mlp.forward_trace(row)?;
                    let z = trace.final_preactivation()[0];
                    let y = if label { 1.0 } else { 0.0 };
                    let d_z = [(sigmoid(z) - y) * inv_n];
                    let (g, _) = mlp.backward_from_logits(&trace, &d_z)?;
                    match &mut local {
                        Some(acc) => acc.add_assign(&g),
                        None => local = Some(g),
                    }
                }
                Ok(local.expect("chunks are nonempty"))
            })
            .collect();
        let mut grads = MlpGrads::zeros_like(&mlp);
        for p in partials {
            grads.add_assign(&p?);
        }
        adam_step(&mut mlp, &grads, &mut opt)?;
    }
    Ok(mlp)
}

/// Scores feature rows with a trained classifier: normalize, forward, clip
/// to `[0, 1]` (a no-op for the sigmoid head). Deterministic.
pub fn score_records(
    classifier: &AttackClassifier,
    features: &FeatureMatrix,
) -> Result<Vec<ScoreRecord>> {
    if features.width() != classifier.mlp.input_dim() {
        return Err(AttackError::WidthMismatch {
            expected: classifier.mlp.input_dim(),
            got: features.width(),
        });
    }
    (0..features.n_rows())
        .into_par_iter()
        .map(|i| {
            let row = classifier.feature_norm.apply(features.row(i));
            let out = classifier.mlp.forward(&row)?;
            Ok(ScoreRecord {
                model_id: features.model_ids[i],
                record_id: features.record_ids[i],
                score: out[0].clamp(0.0, 1.0),
            })
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct ClassifierSidecar {
    feature_norm: FeatureNorm,
    selected: SelectedHparams,
    n_eps: usize,
    n_t: usize,
    timesteps: Vec<usize>,
    noise_seed: u64,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".json");
    path.with_file_name(name)
}

/// Persists the classifier as a network checkpoint plus a `<path>.json`
/// sidecar with normalization, grid metadata and the selected configuration.
pub fn write_classifier(path: &Path, classifier: &AttackClassifier) -> Result<()> {
    write_mlp(path, &classifier.mlp)?;
    let sidecar = ClassifierSidecar {
        feature_norm: classifier.feature_norm.clone(),
        selected: classifier.selected.clone(),
        n_eps: classifier.n_eps,
        n_t: classifier.n_t,
        timesteps: classifier.timesteps.clone(),
        noise_seed: classifier.noise_seed,
    };
    let mut f = BufWriter::new(File::create(sidecar_path(path))?);
    serde_json::to_writer_pretty(&mut f, &sidecar)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn read_classifier(path: &Path) -> Result<AttackClassifier> {
    let mlp = read_mlp(path)?;
    let sidecar: ClassifierSidecar =
        serde_json::from_reader(BufReader::new(File::open(sidecar_path(path))?))?;
    if sidecar.feature_norm.mean.len() != mlp.input_dim() {
        return Err(AttackError::MalformedClassifierFile(format!(
            "normalization width {} does not match network input {}",
            sidecar.feature_norm.mean.len(),
            mlp.input_dim()
        )));
    }
    Ok(AttackClassifier {
        mlp,
        feature_norm: sidecar.feature_norm,
        selected: sidecar.selected,
        n_eps: sidecar.n_eps,
        n_t: sidecar.n_t,
        timesteps: sidecar.timesteps,
        noise_seed: sidecar.noise_seed,
    })
}
