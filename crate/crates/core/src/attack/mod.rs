//! Membership-inference scoring: naive loss, SecMI t-error, the best-noise
//! oracle, and the trained classifier over the loss-feature grid.

mod classifier;
mod features;
mod scores;
mod split;

pub use classifier::{
    read_classifier, score_records, train_attack_classifier, write_classifier, AttackClassifier,
    FeatureNorm, HparamGrid, SelectedHparams,
};
pub use features::{
    extract_features, read_feature_matrix, write_feature_matrix, FeatureMatrix, NoiseSet, TimeSet,
};
pub use scores::{
    best_noise_oracle, naive_loss_score, read_scores_csv, secmi_t_error, write_scores_csv,
    BestNoiseReport, PsiPrediction, ScoreRecord,
};
pub use split::{model_based_split, ModelSplit};

use thiserror::Error;

use crate::diffusion::DiffusionError;
use crate::evaluation::EvalError;
use crate::numerics::NumericsError;

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("non-finite loss feature for record {record_id} (noise {noise_idx}, t = {t})")]
    NonFiniteFeature {
        record_id: u64,
        noise_idx: usize,
        t: usize,
    },
    #[error("feature width mismatch: expected {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("duplicate model ids in split input")]
    DuplicateModelIds,
    #[error("insufficient models for a train/validation split: have {have}")]
    InsufficientModels { have: usize },
    #[error("feature matrix has no labels")]
    MissingLabels,
    #[error("labels must be balanced, got {n_pos} members / {n_neg} holdouts")]
    UnbalancedLabels { n_pos: usize, n_neg: usize },
    #[error("invalid attack config: {0}")]
    InvalidConfig(String),
    #[error("malformed feature file: {0}")]
    MalformedFeatureFile(String),
    #[error("malformed classifier file: {0}")]
    MalformedClassifierFile(String),
    #[error("malformed scores file: {0}")]
    MalformedScoresFile(String),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, AttackError>;
