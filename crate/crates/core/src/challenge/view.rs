//! The adversary's view of an experiment directory.
//!
//! The loader materializes exactly what the track's threat model allows and
//! records every path it opens, so tests can assert that ground truth and
//! the raw population are never touched by attack code.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::diffusion::DenoiserParams;
use crate::numerics::read_mlp;
use crate::tabular::{read_schema_json, EncoderStats, Row, RowId, TableSchema};
use crate::Scalar;

use super::artifacts::{challenge_csv_path, checkpoint_path, meta_path, read_challenge_csv, synth_path};
use super::spec::{ModelMeta, Phase, Track};
use super::{ChallengeError, Result};

/// One target model as the adversary sees it.
#[derive(Debug, Clone)]
pub struct VisibleModel {
    pub id: u32,
    pub phase: Phase,
    pub queries: Vec<(RowId, Row)>,
    /// Membership labels for the queries; train phase only.
    pub labels: Option<Vec<bool>>,
    /// Target weights; white-box track only.
    pub checkpoint: Option<DenoiserParams<Scalar>>,
    /// Model-generated rows; black-box track only.
    pub synth: Option<Vec<Row>>,
}

/// Everything the adversary may use. Never contains dev/final membership
/// labels; in the black-box track, never contains target weights.
#[derive(Debug, Clone)]
pub struct AdversaryView {
    pub track: Track,
    pub cfg: RunConfig,
    pub schema: TableSchema,
    pub stats: EncoderStats,
    pub models: Vec<VisibleModel>,
    /// Every file the loader opened, for information-flow audits.
    pub accessed_paths: Vec<PathBuf>,
}

impl AdversaryView {
    pub fn models_in_phase(&self, phase: Phase) -> impl Iterator<Item = &VisibleModel> {
        self.models.iter().filter(move |m| m.phase == phase)
    }
}

fn open_tracked(path: &Path, log: &mut Vec<PathBuf>) -> Result<BufReader<File>> {
    if !path.exists() {
        return Err(ChallengeError::MissingArtifact(path.to_path_buf()));
    }
    log.push(path.to_path_buf());
    Ok(BufReader::new(File::open(path)?))
}

pub fn load_adversary_view(dir: &Path, track: Track) -> Result<AdversaryView> {
    let mut log = Vec::new();

    let cfg: RunConfig = serde_json::from_reader(open_tracked(&dir.join("spec.json"), &mut log)?)?;
    log.push(dir.join("schema.json"));
    let schema = read_schema_json(&dir.join("schema.json"))?;
    let stats: EncoderStats =
        serde_json::from_reader(open_tracked(&dir.join("encoder.json"), &mut log)?)?;

    let mut models = Vec::with_capacity(cfg.challenge.total_models());
    for id in 0..cfg.challenge.total_models() as u32 {
        let phase = cfg.challenge.phase_of(id);

        let challenge_path = challenge_csv_path(dir, id);
        if !challenge_path.exists() {
            return Err(ChallengeError::MissingArtifact(challenge_path));
        }
        log.push(challenge_path.clone());
        let (queries, labels) = read_challenge_csv(&challenge_path, &schema)?;
        match (phase, &labels) {
            (Phase::Train, None) => {
                return Err(ChallengeError::Layout(format!(
                    "train-phase model {id} has no labels in its challenge file"
                )))
            }
            (Phase::Dev | Phase::Final, Some(_)) => {
                return Err(ChallengeError::Layout(format!(
                    "model {id} is not train-phase but its challenge file leaks labels"
                )))
            }
            _ => {}
        }

        let checkpoint = match track {
            Track::WhiteBox => {
                let meta: ModelMeta =
                    serde_json::from_reader(open_tracked(&meta_path(dir, id), &mut log)?)?;
                let ckpt_path = checkpoint_path(dir, id);
                if !ckpt_path.exists() {
                    return Err(ChallengeError::MissingArtifact(ckpt_path));
                }
                log.push(ckpt_path.clone());
                let mlp = read_mlp(&ckpt_path)?;
                Some(DenoiserParams::new(mlp, meta.input_dim, meta.embed_dim)?)
            }
            Track::BlackBox => None,
        };

        let synth = match track {
            Track::BlackBox => {
                let path = synth_path(dir, id);
                if !path.exists() {
                    return Err(ChallengeError::MissingArtifact(path));
                }
                log.push(path.clone());
                Some(crate::tabular::read_rows_csv(&path, &schema)?)
            }
            Track::WhiteBox => None,
        };

        models.push(VisibleModel {
            id,
            phase,
            queries,
            labels,
            checkpoint,
            synth,
        });
    }

    Ok(AdversaryView {
        track,
        cfg,
        schema,
        stats,
        models,
        accessed_paths: log,
    })
}
