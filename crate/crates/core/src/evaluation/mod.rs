//! Attack metrics: ROC curves, AUC, TPR at fixed FPR, and report emission.
//!
//! The ranking statistics are computed from exact integer counts (AUC is an
//! exact rational, ties counting one half) and only converted to `f64` at the
//! edges, so algebraic identities like `auc(y) + auc(1-y) = 1` hold exactly.

mod report;
mod roc;

pub use report::{emit_report, MetricReport};
pub use roc::{auc, auc_exact, auc_from_roc, compute_roc, tpr_at_fpr, RocCurve};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("scores and labels have different lengths: {scores} vs {labels}")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("both classes must be present (got {n_pos} positives, {n_neg} negatives)")]
    SingleClass { n_pos: usize, n_neg: usize },
    #[error("non-finite score at index {0}")]
    NonFiniteScore(usize),
    #[error("fpr level must lie in (0, 1), got {0}")]
    InvalidFprLevel(f64),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, EvalError>;
