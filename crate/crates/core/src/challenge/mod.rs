//! Orchestration of the full experiment: population, fleet training,
//! adversary views, end-to-end attacks, and score evaluation.

mod artifacts;
mod attacks;
mod spec;
mod view;

pub use artifacts::{
    challenge_csv_path, checkpoint_path, ground_truth_path, meta_path, metrics_dir, model_dir,
    prepare_experiment_data, read_challenge_csv, run_challenge, scores_path, synth_path,
    synthesize_dump, train_target, ChallengeArtifacts, ExperimentHandle,
};
pub use attacks::{
    build_blackbox_attack, build_whitebox_attack, evaluate_scores, run_attack_on_experiment,
    AttackOutcome,
};
pub use spec::{ChallengeSpec, ModelMeta, Phase, PhaseCounts, Track};
pub use view::{load_adversary_view, AdversaryView, VisibleModel};

use std::path::PathBuf;

use thiserror::Error;

use crate::tabular::{Row, RowId};
use crate::Scalar;

/// Query rows as `(record id, row)` plus labels when the file carries them.
pub type LabeledQueries = (Vec<(RowId, Row)>, Option<Vec<bool>>);

/// Encoded query vectors paired with their ground-truth labels.
pub type EncodedLabeledQueries = (Vec<(RowId, Vec<Scalar>)>, Vec<bool>);

/// Per-model and pooled reports plus the matching ROC curves.
pub type EvaluationOutput = (Vec<crate::evaluation::MetricReport>, Vec<(String, crate::evaluation::RocCurve)>);

use crate::attack::AttackError;
use crate::diffusion::DiffusionError;
use crate::evaluation::EvalError;
use crate::numerics::NumericsError;
use crate::tabular::TabularError;

#[derive(Debug, Error)]
pub enum ChallengeError {
    #[error("invalid challenge spec: {0}")]
    InvalidSpec(String),
    #[error("missing artifact: {0}")]
    MissingArtifact(PathBuf),
    #[error("experiment layout violation: {0}")]
    Layout(String),
    #[error("synthetic dump for model {model_id} is empty")]
    EmptySyntheticDump { model_id: u32 },
    #[error("model {model_id}: {source}")]
    Model {
        model_id: u32,
        #[source]
        source: Box<ChallengeError>,
    },
    #[error(transparent)]
    Tabular(#[from] TabularError),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl ChallengeError {
    /// Tags an error with the model whose pipeline step failed.
    pub fn for_model(model_id: u32, source: ChallengeError) -> Self {
        ChallengeError::Model {
            model_id,
            source: Box::new(source),
        }
    }
}

pub type Result<T> = std::result::Result<T, ChallengeError>;
