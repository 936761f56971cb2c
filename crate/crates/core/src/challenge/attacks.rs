//! End-to-end attacks over an adversary view, and score evaluation against
//! ground truth.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::attack::{
    extract_features, model_based_split, read_scores_csv, score_records, train_attack_classifier,
    write_scores_csv, AttackClassifier, FeatureMatrix, NoiseSet, ScoreRecord, TimeSet,
};
use crate::config::derive_seed;
use crate::diffusion::{build_schedule, train_denoiser, DenoiserParams, TrainConfig};
use crate::evaluation::{auc, compute_roc, emit_report, tpr_at_fpr, MetricReport};
use crate::tabular::{encode, RowId};
use crate::Scalar;

use super::artifacts::{ground_truth_path, metrics_dir, scores_path, ExperimentHandle};
use super::spec::{Phase, Track};
use super::view::{load_adversary_view, AdversaryView, VisibleModel};
use super::{ChallengeError, Result};

/// Result of one end-to-end attack.
#[derive(Debug, Clone)]
pub struct AttackOutcome {
    pub scores: Vec<ScoreRecord>,
    pub classifier: AttackClassifier,
    /// Black-box track only: the per-target shadow denoisers.
    pub shadows: Option<BTreeMap<u32, DenoiserParams<Scalar>>>,
    /// Every file the adversary view loader opened.
    pub accessed_paths: Vec<PathBuf>,
}

pub(crate) fn run_attack_for_view(view: &AdversaryView) -> Result<AttackOutcome> {
    match view.track {
        Track::WhiteBox => build_whitebox_attack(view),
        Track::BlackBox => build_blackbox_attack(view),
    }
}

/// White-box attack: features come straight from each target's own weights;
/// the classifier is trained on train-phase models via the model-based split
/// and applied to dev/final queries.
pub fn build_whitebox_attack(view: &AdversaryView) -> Result<AttackOutcome> {
    if view.track != Track::WhiteBox {
        return Err(ChallengeError::Layout(
            "white-box attack needs a white-box view".into(),
        ));
    }
    let denoisers: BTreeMap<u32, DenoiserParams<Scalar>> = view
        .models
        .iter()
        .map(|m| {
            let ckpt = m
                .checkpoint
                .clone()
                .ok_or_else(|| ChallengeError::MissingArtifact(format!("checkpoint of model {}", m.id).into()))?;
            Ok((m.id, ckpt))
        })
        .collect::<Result<_>>()?;
    let (scores, classifier) = feature_attack(view, &denoisers)?;
    Ok(AttackOutcome {
        scores,
        classifier,
        shadows: None,
        accessed_paths: view.accessed_paths.clone(),
    })
}

/// Black-box attack: one shadow model per target, trained on that target's
/// synthetic dump under the same configuration; features come from the
/// shadows, labels from the train-phase challenge files.
pub fn build_blackbox_attack(view: &AdversaryView) -> Result<AttackOutcome> {
    if view.track != Track::BlackBox {
        return Err(ChallengeError::Layout(
            "black-box attack needs a black-box view".into(),
        ));
    }
    let schedule = build_schedule::<Scalar>(
        view.cfg.diffusion.t_total,
        view.cfg.diffusion.beta_start,
        view.cfg.diffusion.beta_end,
    )?;
    let shadows: BTreeMap<u32, DenoiserParams<Scalar>> = view
        .models
        .par_iter()
        .map(|m| {
            let synth = m.synth.as_ref().ok_or_else(|| {
                ChallengeError::MissingArtifact(format!("synthetic dump of model {}", m.id).into())
            })?;
            if synth.is_empty() {
                return Err(ChallengeError::EmptySyntheticDump { model_id: m.id });
            }
            let vectors: Vec<Vec<Scalar>> = synth
                .iter()
                .map(|row| Ok(encode(&view.schema, &view.stats, row, 0)?.vector))
                .collect::<Result<_>>()?;
            let shadow = train_denoiser(
                &vectors,
                &schedule,
                &view.cfg.diffusion.denoiser_config(),
                &TrainConfig {
                    steps: view.cfg.diffusion.train_steps,
                    batch_size: view.cfg.diffusion.batch_size,
                    lr: view.cfg.diffusion.lr,
                    seed: derive_seed(view.cfg.master_seed, &format!("shadow:{}", m.id)),
                },
            )
            .map_err(|e| ChallengeError::for_model(m.id, e.into()))?;
            Ok((m.id, shadow))
        })
        .collect::<Result<_>>()?;
    let (scores, classifier) = feature_attack(view, &shadows)?;
    Ok(AttackOutcome {
        scores,
        classifier,
        shadows: Some(shadows),
        accessed_paths: view.accessed_paths.clone(),
    })
}

/// Shared loss-feature pipeline once a denoiser stands in for each target:
/// extract labeled grids for train-phase models, split by whole models,
/// train the classifier, then score dev/final queries.
fn feature_attack(
    view: &AdversaryView,
    denoisers: &BTreeMap<u32, DenoiserParams<Scalar>>,
) -> Result<(Vec<ScoreRecord>, AttackClassifier)> {
    let cfg = &view.cfg;
    let schedule = build_schedule::<Scalar>(
        cfg.diffusion.t_total,
        cfg.diffusion.beta_start,
        cfg.diffusion.beta_end,
    )?;
    let noise_set = NoiseSet::generate(
        cfg.attack.n_eps,
        view.schema.encoded_dim(),
        derive_seed(cfg.master_seed, "noise-set"),
    );
    let time_set = TimeSet::new(cfg.attack.timesteps.clone(), cfg.diffusion.t_total)
        .map_err(ChallengeError::Attack)?;

    let encode_queries = |m: &VisibleModel| -> Result<Vec<(RowId, Vec<Scalar>)>> {
        m.queries
            .iter()
            .map(|(id, row)| Ok((*id, encode(&view.schema, &view.stats, row, *id)?.vector)))
            .collect()
    };

    let mut train_features: BTreeMap<u32, FeatureMatrix> = BTreeMap::new();
    for m in view.models_in_phase(Phase::Train) {
        let labels = m.labels.as_ref().ok_or_else(|| {
            ChallengeError::Layout(format!("train-phase model {} has no labels", m.id))
        })?;
        let records = encode_queries(m)?;
        let fm = extract_features(
            &denoisers[&m.id],
            &records,
            &noise_set,
            &time_set,
            &schedule,
            m.id,
            Some(labels),
        )?;
        train_features.insert(m.id, fm);
    }

    let train_ids: Vec<u32> = train_features.keys().copied().collect();
    let split = model_based_split(&train_ids, derive_seed(cfg.master_seed, "attack-split"))?;
    let pool = |ids: &[u32]| -> Result<FeatureMatrix> {
        let parts: Vec<&FeatureMatrix> = ids.iter().map(|id| &train_features[id]).collect();
        Ok(FeatureMatrix::concat(&parts)?)
    };
    let classifier = train_attack_classifier(
        &pool(&split.train)?,
        &pool(&split.val)?,
        &cfg.attack.grid,
        cfg.attack.epochs,
        derive_seed(cfg.master_seed, "attack-train"),
        cfg.attack.fpr_level,
    )?;

    let mut scores = Vec::new();
    for m in view
        .models
        .iter()
        .filter(|m| m.phase == Phase::Dev || m.phase == Phase::Final)
    {
        let records = encode_queries(m)?;
        let fm = extract_features(
            &denoisers[&m.id],
            &records,
            &noise_set,
            &time_set,
            &schedule,
            m.id,
            None,
        )?;
        scores.extend(score_records(&classifier, &fm)?);
    }
    Ok((scores, classifier))
}

/// Loads the adversary view for `track` from a finished experiment, runs the
/// attack, writes `scores/<track>.csv` and `metrics/<track>/`, and returns
/// the outcome. Lets both tracks run against the same fleet.
pub fn run_attack_on_experiment(dir: &Path, track: Track) -> Result<AttackOutcome> {
    let view = load_adversary_view(dir, track)?;
    let outcome = run_attack_for_view(&view)?;
    write_scores_csv(&scores_path(dir, track), &outcome.scores)?;
    let handle = ExperimentHandle::open(dir)?;
    let (reports, curves) = evaluate_scores(dir, track, &handle.cfg.evaluation.fpr_levels)?;
    emit_report(&reports, &curves, &metrics_dir(dir, track))?;
    Ok(outcome)
}

/// Evaluates emitted scores against ground truth: one report per dev/final
/// model plus pooled dev and pooled final entries, with matching ROC curves.
pub fn evaluate_scores(dir: &Path, track: Track, fpr_levels: &[f64]) -> Result<super::EvaluationOutput> {
    let handle = ExperimentHandle::open(dir)?;
    let score_rows = read_scores_csv(&scores_path(dir, track))?;
    let mut by_model: BTreeMap<u32, Vec<&ScoreRecord>> = BTreeMap::new();
    for s in &score_rows {
        by_model.entry(s.model_id).or_default().push(s);
    }

    let mut reports = Vec::new();
    let mut curves = Vec::new();
    let mut pooled: BTreeMap<Phase, (Vec<f64>, Vec<bool>)> = BTreeMap::new();

    for (&model_id, rows) in &by_model {
        let truth: HashMap<RowId, bool> =
            read_ground_truth_map(&ground_truth_path(dir, model_id))?;
        let mut scores = Vec::with_capacity(rows.len());
        let mut labels = Vec::with_capacity(rows.len());
        for s in rows {
            scores.push(s.score);
            labels.push(*truth.get(&s.record_id).ok_or_else(|| {
                ChallengeError::Layout(format!(
                    "score for record {} of model {model_id} has no ground truth",
                    s.record_id
                ))
            })?);
        }
        let id = format!("m{model_id:03}");
        reports.push(build_report(&id, &scores, &labels, fpr_levels)?);
        curves.push((id, compute_roc(&scores, &labels)?));
        let phase = handle.cfg.challenge.phase_of(model_id);
        let slot = pooled.entry(phase).or_default();
        slot.0.extend_from_slice(&scores);
        slot.1.extend_from_slice(&labels);
    }

    for (phase, label) in [(Phase::Dev, "dev_pooled"), (Phase::Final, "final_pooled")] {
        if let Some((scores, labels)) = pooled.get(&phase) {
            reports.push(build_report(label, scores, labels, fpr_levels)?);
            curves.push((label.to_string(), compute_roc(scores, labels)?));
        }
    }
    Ok((reports, curves))
}

fn build_report(
    id: &str,
    scores: &[f64],
    labels: &[bool],
    fpr_levels: &[f64],
) -> Result<MetricReport> {
    let mut tpr_map = std::collections::BTreeMap::new();
    for &level in fpr_levels {
        tpr_map.insert(
            MetricReport::fpr_key(level),
            tpr_at_fpr(scores, labels, level)?,
        );
    }
    Ok(MetricReport {
        id: id.to_string(),
        auc: auc(scores, labels)?,
        tpr_at_fpr: tpr_map,
        n_pos: labels.iter().filter(|&&l| l).count(),
        n_neg: labels.iter().filter(|&&l| !l).count(),
    })
}

fn read_ground_truth_map(path: &Path) -> Result<HashMap<RowId, bool>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = HashMap::new();
    for line in text.lines().skip(1) {
        if let Some((id, label)) = line.split_once(',') {
            out.insert(
                id.parse()
                    .map_err(|_| ChallengeError::Layout(format!("bad record_id: {id}")))?,
                label == "1",
            );
        }
    }
    Ok(out)
}
