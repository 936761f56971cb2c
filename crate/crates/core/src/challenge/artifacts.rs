//! Experiment directory layout and fleet construction.
//!
//! ```text
//! <out>/
//!   spec.json               resolved run configuration
//!   population.csv          full generated population (organizer-only)
//!   schema.json             table schema
//!   encoder.json            fitted standardization statistics
//!   models/m<id>/
//!     checkpoint.bin        denoiser parameters ("TMLP" format)
//!     meta.json             checkpoint sidecar (schedule, dims, seed)
//!     synth.csv             decoded synthetic dump (one per member row)
//!     challenge.csv         query rows; train phase carries is_member
//!   ground_truth/m<id>.csv  record_id,is_member for the queries
//!   scores/<track>.csv      emitted membership scores
//!   metrics/<track>/        metrics.json, roc_<id>.csv, roc.svg
//! ```
//!
//! Ground truth and the raw population are never read by attack code; the
//! adversary view loader records every path it touches so tests can audit
//! the information flow.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{derive_seed, RunConfig};
use crate::diffusion::{
    build_schedule, sample, train_denoiser, DenoiserParams, NoiseSchedule, TrainConfig,
};
use crate::numerics::{read_mlp, write_mlp};
use crate::tabular::{
    decode, encode, fit_encoder, format_cell, generate_synthetic_population, make_splits,
    parse_cell, read_rows_csv, read_schema_json, write_rows_csv, write_schema_json, EncoderStats,
    Row, RowId, SplitManifest, TableSchema,
};
use crate::Scalar;

use super::attacks::{evaluate_scores, run_attack_for_view};
use super::spec::{ModelMeta, Phase, Track};
use super::view::load_adversary_view;
use super::{ChallengeError, Result};

pub fn model_dir(root: &Path, model_id: u32) -> PathBuf {
    root.join("models").join(format!("m{model_id:03}"))
}

pub fn checkpoint_path(root: &Path, model_id: u32) -> PathBuf {
    model_dir(root, model_id).join("checkpoint.bin")
}

pub fn meta_path(root: &Path, model_id: u32) -> PathBuf {
    model_dir(root, model_id).join("meta.json")
}

pub fn synth_path(root: &Path, model_id: u32) -> PathBuf {
    model_dir(root, model_id).join("synth.csv")
}

pub fn challenge_csv_path(root: &Path, model_id: u32) -> PathBuf {
    model_dir(root, model_id).join("challenge.csv")
}

pub fn ground_truth_path(root: &Path, model_id: u32) -> PathBuf {
    root.join("ground_truth").join(format!("m{model_id:03}.csv"))
}

pub fn scores_path(root: &Path, track: Track) -> PathBuf {
    root.join("scores").join(format!("{}.csv", track.as_str()))
}

pub fn metrics_dir(root: &Path, track: Track) -> PathBuf {
    root.join("metrics").join(track.as_str())
}

/// Paths and fleet composition produced by [`run_challenge`].
#[derive(Debug, Clone)]
pub struct ChallengeArtifacts {
    pub out_dir: PathBuf,
    pub models: Vec<(u32, Phase)>,
    pub scores_csv: PathBuf,
    pub metrics_json: PathBuf,
}

/// Writes query rows as `record_id,<columns...>[,is_member]`.
pub(crate) fn write_challenge_csv(
    path: &Path,
    schema: &TableSchema,
    queries: &[(RowId, Row)],
    labels: Option<&[bool]>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let mut header: Vec<String> = vec!["record_id".into()];
    header.extend(schema.column_names().iter().map(|s| s.to_string()));
    if labels.is_some() {
        header.push("is_member".into());
    }
    w.write_record(&header).map_err(crate::tabular::TabularError::from)?;
    for (i, (id, row)) in queries.iter().enumerate() {
        let mut rec: Vec<String> = vec![id.to_string()];
        rec.extend(row.iter().map(format_cell));
        if let Some(l) = labels {
            rec.push(if l[i] { "1".into() } else { "0".into() });
        }
        w.write_record(&rec).map_err(crate::tabular::TabularError::from)?;
    }
    w.flush().map_err(crate::tabular::TabularError::from)?;
    Ok(())
}

/// Reads a challenge file back; the label column is returned when present.
pub fn read_challenge_csv(path: &Path, schema: &TableSchema) -> Result<super::LabeledQueries> {
    let mut r = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let header: Vec<String> = r
        .headers()
        .map_err(crate::tabular::TabularError::from)?
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut expected: Vec<String> = vec!["record_id".into()];
    expected.extend(schema.column_names().iter().map(|s| s.to_string()));
    let labeled = if header == expected {
        false
    } else if header.len() == expected.len() + 1
        && header[..expected.len()] == expected[..]
        && header.last().map(String::as_str) == Some("is_member")
    {
        true
    } else {
        return Err(ChallengeError::Layout(format!(
            "unexpected challenge header {header:?} in {path:?}"
        )));
    };
    let mut queries = Vec::new();
    let mut labels = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(crate::tabular::TabularError::from)?;
        let id: RowId = rec
            .get(0)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ChallengeError::Layout(format!("bad record_id in {path:?}")))?;
        let row: Row = schema
            .columns
            .iter()
            .zip(rec.iter().skip(1))
            .map(|(col, raw)| parse_cell(col, raw))
            .collect::<std::result::Result<_, _>>()?;
        queries.push((id, row));
        if labeled {
            let raw = rec.get(1 + schema.columns.len()).ok_or_else(|| {
                ChallengeError::Layout(format!("missing is_member cell in {path:?}"))
            })?;
            labels.push(raw == "1");
        }
    }
    Ok((queries, if labeled { Some(labels) } else { None }))
}

fn write_ground_truth(path: &Path, queries: &[(RowId, Row)], labels: &[bool]) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(b"record_id,is_member\n")?;
    for ((id, _), &label) in queries.iter().zip(labels) {
        writeln!(f, "{},{}", id, if label { 1 } else { 0 })?;
    }
    f.flush()?;
    Ok(())
}

fn read_ground_truth(path: &Path) -> Result<Vec<(RowId, bool)>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some("record_id,is_member") {
        return Err(ChallengeError::Layout(format!(
            "unexpected ground truth header in {path:?}"
        )));
    }
    lines
        .map(|line| {
            let (id, label) = line
                .split_once(',')
                .ok_or_else(|| ChallengeError::Layout(format!("bad ground truth row: {line}")))?;
            Ok((
                id.parse()
                    .map_err(|_| ChallengeError::Layout(format!("bad record_id: {id}")))?,
                label == "1",
            ))
        })
        .collect()
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

/// In-memory data plane shared by the stage functions.
pub(crate) struct DataPlane {
    pub schema: TableSchema,
    pub stats: EncoderStats,
    pub population: Vec<Row>,
    pub manifests: Vec<SplitManifest>,
    pub schedule: NoiseSchedule<Scalar>,
}

fn materialize_data_plane(cfg: &RunConfig) -> Result<DataPlane> {
    let population =
        generate_synthetic_population(&cfg.generator, derive_seed(cfg.master_seed, "population"))?;
    let stats = fit_encoder(&cfg.generator.schema, &population)?;
    let manifests = make_splits(
        population.len(),
        cfg.challenge.total_models(),
        cfg.challenge.members_per_model,
        derive_seed(cfg.master_seed, "splits"),
    )?;
    Ok(DataPlane {
        schema: cfg.generator.schema.clone(),
        stats,
        population,
        manifests,
        schedule: build_schedule(
            cfg.diffusion.t_total,
            cfg.diffusion.beta_start,
            cfg.diffusion.beta_end,
        )?,
    })
}

/// Reloads the data plane from a prepared experiment directory. Population
/// rows round-trip exactly (shortest round-trip float formatting), so this
/// agrees bit for bit with the in-memory plane.
pub(crate) fn load_data_plane(cfg: &RunConfig, out_dir: &Path) -> Result<DataPlane> {
    let schema = read_schema_json(&out_dir.join("schema.json"))?;
    let stats: EncoderStats =
        serde_json::from_reader(BufReader::new(File::open(out_dir.join("encoder.json"))?))?;
    let population = read_rows_csv(&out_dir.join("population.csv"), &schema)?;
    let manifests = make_splits(
        population.len(),
        cfg.challenge.total_models(),
        cfg.challenge.members_per_model,
        derive_seed(cfg.master_seed, "splits"),
    )?;
    Ok(DataPlane {
        schema,
        stats,
        population,
        manifests,
        schedule: build_schedule(
            cfg.diffusion.t_total,
            cfg.diffusion.beta_start,
            cfg.diffusion.beta_end,
        )?,
    })
}

/// Stage 1: generates the population and writes every data-plane artifact:
/// `spec.json`, `population.csv`, `schema.json`, `encoder.json`, and each
/// model's challenge file and ground truth. No models are trained yet.
pub fn prepare_experiment_data(cfg: &RunConfig, out_dir: &Path) -> Result<()> {
    cfg.challenge.validate()?;
    cfg.generator.validate().map_err(ChallengeError::Tabular)?;

    std::fs::create_dir_all(out_dir)?;
    std::fs::create_dir_all(out_dir.join("models"))?;
    std::fs::create_dir_all(out_dir.join("ground_truth"))?;
    std::fs::create_dir_all(out_dir.join("scores"))?;
    write_json(&out_dir.join("spec.json"), cfg)?;

    let plane = materialize_data_plane(cfg)?;
    write_rows_csv(&out_dir.join("population.csv"), &plane.schema, &plane.population)?;
    write_schema_json(&out_dir.join("schema.json"), &plane.schema)?;
    write_json(&out_dir.join("encoder.json"), &plane.stats)?;

    for model_id in 0..cfg.challenge.total_models() as u32 {
        write_queries_for_model(cfg, out_dir, &plane, model_id)
            .map_err(|e| ChallengeError::for_model(model_id, e))?;
    }
    Ok(())
}

fn write_queries_for_model(
    cfg: &RunConfig,
    out_dir: &Path,
    plane: &DataPlane,
    model_id: u32,
) -> Result<()> {
    std::fs::create_dir_all(model_dir(out_dir, model_id))?;
    let manifest = &plane.manifests[model_id as usize];
    let phase = cfg.challenge.phase_of(model_id);

    // Balanced challenge queries, shuffled so row order carries no label.
    let q = cfg.challenge.challenge_queries_per_model;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
        cfg.master_seed,
        &format!("challenge-queries:{model_id}"),
    ));
    let mut member_ids = manifest.members.clone();
    member_ids.shuffle(&mut rng);
    let mut holdout_ids = manifest.holdout.clone();
    holdout_ids.shuffle(&mut rng);
    let mut labeled: Vec<(RowId, bool)> = member_ids[..q / 2]
        .iter()
        .map(|&id| (id, true))
        .chain(holdout_ids[..q / 2].iter().map(|&id| (id, false)))
        .collect();
    labeled.shuffle(&mut rng);

    let queries: Vec<(RowId, Row)> = labeled
        .iter()
        .map(|&(id, _)| (id, plane.population[id as usize].clone()))
        .collect();
    let labels: Vec<bool> = labeled.iter().map(|&(_, l)| l).collect();

    write_challenge_csv(
        &challenge_csv_path(out_dir, model_id),
        &plane.schema,
        &queries,
        if phase == Phase::Train {
            Some(&labels)
        } else {
            None
        },
    )?;
    write_ground_truth(&ground_truth_path(out_dir, model_id), &queries, &labels)?;
    Ok(())
}

fn train_target_inner(
    cfg: &RunConfig,
    out_dir: &Path,
    plane: &DataPlane,
    model_id: u32,
) -> Result<DenoiserParams<Scalar>> {
    std::fs::create_dir_all(model_dir(out_dir, model_id))?;
    let manifest = &plane.manifests[model_id as usize];
    let member_vectors: Vec<Vec<Scalar>> = manifest
        .members
        .iter()
        .map(|&id| Ok(encode(&plane.schema, &plane.stats, &plane.population[id as usize], id)?.vector))
        .collect::<Result<_>>()?;

    let train_seed = derive_seed(cfg.master_seed, &format!("train-target:{model_id}"));
    let denoiser = train_denoiser(
        &member_vectors,
        &plane.schedule,
        &cfg.diffusion.denoiser_config(),
        &TrainConfig {
            steps: cfg.diffusion.train_steps,
            batch_size: cfg.diffusion.batch_size,
            lr: cfg.diffusion.lr,
            seed: train_seed,
        },
    )?;
    write_mlp(&checkpoint_path(out_dir, model_id), &denoiser.mlp)?;
    write_json(
        &meta_path(out_dir, model_id),
        &ModelMeta {
            model_id,
            phase: cfg.challenge.phase_of(model_id),
            t_total: cfg.diffusion.t_total,
            beta_start: cfg.diffusion.beta_start,
            beta_end: cfg.diffusion.beta_end,
            input_dim: denoiser.input_dim,
            embed_dim: denoiser.embed_dim,
            seed: train_seed,
            train_steps: cfg.diffusion.train_steps,
            batch_size: cfg.diffusion.batch_size,
            lr: cfg.diffusion.lr,
        },
    )?;
    Ok(denoiser)
}

fn synth_inner(
    cfg: &RunConfig,
    out_dir: &Path,
    plane: &DataPlane,
    model_id: u32,
    denoiser: &DenoiserParams<Scalar>,
    count: usize,
) -> Result<()> {
    let synth_vectors = sample(
        denoiser,
        &plane.schedule,
        count,
        derive_seed(cfg.master_seed, &format!("synth:{model_id}")),
    )?;
    let synth_rows: Vec<Row> = synth_vectors
        .iter()
        .map(|v| Ok(decode(&plane.schema, &plane.stats, v)?))
        .collect::<Result<_>>()?;
    write_rows_csv(&synth_path(out_dir, model_id), &plane.schema, &synth_rows)?;
    Ok(())
}

/// Stage 2: trains one target model on its member rows and writes its
/// checkpoint and sidecar. Requires [`prepare_experiment_data`] artifacts.
pub fn train_target(cfg: &RunConfig, out_dir: &Path, model_id: u32) -> Result<()> {
    let plane = load_data_plane(cfg, out_dir)?;
    train_target_inner(cfg, out_dir, &plane, model_id)
        .map(|_| ())
        .map_err(|e| ChallengeError::for_model(model_id, e))
}

/// Stage 3: samples a synthetic dump from a trained target. By default the
/// dump has one row per member row.
pub fn synthesize_dump(
    cfg: &RunConfig,
    out_dir: &Path,
    model_id: u32,
    count: Option<usize>,
) -> Result<()> {
    let plane = load_data_plane(cfg, out_dir)?;
    let handle = ExperimentHandle::open(out_dir)?;
    let denoiser = handle.denoiser(model_id)?;
    synth_inner(
        cfg,
        out_dir,
        &plane,
        model_id,
        &denoiser,
        count.unwrap_or(cfg.challenge.members_per_model),
    )
    .map_err(|e| ChallengeError::for_model(model_id, e))
}

/// Builds the whole experiment: population, splits, the target fleet with
/// its dumps and challenge files, then runs the configured track's attack
/// and evaluates it. Deterministic for a fixed `master_seed`; sub-step
/// failures abort tagged with the failing model id.
pub fn run_challenge(cfg: &RunConfig, out_dir: &Path) -> Result<ChallengeArtifacts> {
    prepare_experiment_data(cfg, out_dir)?;
    let plane = materialize_data_plane(cfg)?;

    let models: Vec<(u32, Phase)> = (0..cfg.challenge.total_models() as u32)
        .map(|id| (id, cfg.challenge.phase_of(id)))
        .collect();

    models
        .par_iter()
        .map(|&(model_id, _)| {
            let denoiser = train_target_inner(cfg, out_dir, &plane, model_id)
                .map_err(|e| ChallengeError::for_model(model_id, e))?;
            synth_inner(
                cfg,
                out_dir,
                &plane,
                model_id,
                &denoiser,
                cfg.challenge.members_per_model,
            )
            .map_err(|e| ChallengeError::for_model(model_id, e))
        })
        .collect::<Result<Vec<()>>>()?;

    let track = cfg.challenge.track;
    let view = load_adversary_view(out_dir, track)?;
    let outcome = run_attack_for_view(&view)?;
    crate::attack::write_scores_csv(&scores_path(out_dir, track), &outcome.scores)
        .map_err(ChallengeError::Attack)?;

    let (reports, curves) = evaluate_scores(out_dir, track, &cfg.evaluation.fpr_levels)?;
    let mdir = metrics_dir(out_dir, track);
    crate::evaluation::emit_report(&reports, &curves, &mdir).map_err(ChallengeError::Eval)?;

    Ok(ChallengeArtifacts {
        out_dir: out_dir.to_path_buf(),
        models,
        scores_csv: scores_path(out_dir, track),
        metrics_json: mdir.join("metrics.json"),
    })
}

/// Organizer-side handle over a finished experiment directory, with access
/// to ground truth. Attack code must go through the adversary view instead.
#[derive(Debug, Clone)]
pub struct ExperimentHandle {
    pub dir: PathBuf,
    pub cfg: RunConfig,
    pub schema: TableSchema,
    pub stats: EncoderStats,
}

impl ExperimentHandle {
    pub fn open(dir: &Path) -> Result<Self> {
        let spec_path = dir.join("spec.json");
        if !spec_path.exists() {
            return Err(ChallengeError::MissingArtifact(spec_path));
        }
        let cfg: RunConfig = serde_json::from_reader(BufReader::new(File::open(&spec_path)?))?;
        let schema = read_schema_json(&dir.join("schema.json"))?;
        let stats: EncoderStats =
            serde_json::from_reader(BufReader::new(File::open(dir.join("encoder.json"))?))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            cfg,
            schema,
            stats,
        })
    }

    pub fn schedule(&self) -> Result<NoiseSchedule<Scalar>> {
        Ok(build_schedule(
            self.cfg.diffusion.t_total,
            self.cfg.diffusion.beta_start,
            self.cfg.diffusion.beta_end,
        )?)
    }

    pub fn denoiser(&self, model_id: u32) -> Result<DenoiserParams<Scalar>> {
        let path = checkpoint_path(&self.dir, model_id);
        if !path.exists() {
            return Err(ChallengeError::MissingArtifact(path));
        }
        let mlp = read_mlp(&path)?;
        let meta: ModelMeta =
            serde_json::from_reader(BufReader::new(File::open(meta_path(&self.dir, model_id))?))?;
        Ok(DenoiserParams::new(mlp, meta.input_dim, meta.embed_dim)?)
    }

    /// Challenge queries of one model, encoded, with their true labels.
    pub fn labeled_queries(&self, model_id: u32) -> Result<super::EncodedLabeledQueries> {
        let (queries, _) =
            read_challenge_csv(&challenge_csv_path(&self.dir, model_id), &self.schema)?;
        let truth = read_ground_truth(&ground_truth_path(&self.dir, model_id))?;
        let truth_map: std::collections::HashMap<RowId, bool> = truth.into_iter().collect();
        let mut encoded = Vec::with_capacity(queries.len());
        let mut labels = Vec::with_capacity(queries.len());
        for (id, row) in &queries {
            encoded.push((*id, encode(&self.schema, &self.stats, row, *id)?.vector));
            labels.push(*truth_map.get(id).ok_or_else(|| {
                ChallengeError::Layout(format!("record {id} missing from ground truth"))
            })?);
        }
        Ok((encoded, labels))
    }

    pub fn model_ids(&self, phase: Phase) -> Vec<u32> {
        self.cfg.challenge.model_ids(phase)
    }

    /// Population rows read back from the experiment directory.
    pub fn population(&self) -> Result<Vec<Row>> {
        Ok(read_rows_csv(&self.dir.join("population.csv"), &self.schema)?)
    }
}
