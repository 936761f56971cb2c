//! ROC construction and threshold-free ranking statistics.

use num_rational::Ratio;

use super::{EvalError, Result};

/// ROC curve from a descending threshold sweep.
///
/// `thresholds[0]` is `+inf` (nothing classified positive, the `(0, 0)`
/// endpoint); each later threshold is a distinct score value, classifying
/// `score >= threshold` as positive. Tied scores flip together, and the final
/// point is always `(1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub thresholds: Vec<f64>,
    pub fpr: Vec<f64>,
    pub tpr: Vec<f64>,
}

impl RocCurve {
    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }
}

fn class_counts(scores: &[f64], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    if let Some(i) = scores.iter().position(|v| !v.is_finite()) {
        return Err(EvalError::NonFiniteScore(i));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::SingleClass { n_pos, n_neg });
    }
    Ok((n_pos, n_neg))
}

/// Standard threshold sweep with ties grouped at a single threshold.
pub fn compute_roc(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    let (n_pos, n_neg) = class_counts(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("finite scores"));

    let mut thresholds = vec![f64::INFINITY];
    let mut fpr = vec![0.0];
    let mut tpr = vec![0.0];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        // All scores tied at this threshold flip together.
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        thresholds.push(threshold);
        fpr.push(fp as f64 / n_neg as f64);
        tpr.push(tp as f64 / n_pos as f64);
    }
    Ok(RocCurve {
        thresholds,
        fpr,
        tpr,
    })
}

/// AUC as the exact Mann–Whitney statistic
/// `P(score_pos > score_neg) + P(score_pos = score_neg) / 2`,
/// returned as a reduced rational.
pub fn auc_exact(scores: &[f64], labels: &[bool]) -> Result<Ratio<u64>> {
    let (n_pos, n_neg) = class_counts(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));

    // Ascending sweep: each positive beats every strictly smaller negative.
    let mut wins: u64 = 0;
    let mut ties: u64 = 0;
    let mut neg_seen: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let v = scores[order[i]];
        let (mut pos_here, mut neg_here) = (0u64, 0u64);
        while i < order.len() && scores[order[i]] == v {
            if labels[order[i]] {
                pos_here += 1;
            } else {
                neg_here += 1;
            }
            i += 1;
        }
        wins += pos_here * neg_seen;
        ties += pos_here * neg_here;
        neg_seen += neg_here;
    }
    Ok(Ratio::new(
        2 * wins + ties,
        2 * (n_pos as u64) * (n_neg as u64),
    ))
}

/// AUC as `f64` (the exact statistic, rounded once).
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let r = auc_exact(scores, labels)?;
    Ok(*r.numer() as f64 / *r.denom() as f64)
}

/// Trapezoidal integral of a ROC curve. Must agree with [`auc`] to 1e-12;
/// the two are kept as independent routes on purpose.
pub fn auc_from_roc(curve: &RocCurve) -> f64 {
    let mut area = 0.0;
    for i in 1..curve.len() {
        area += (curve.fpr[i] - curve.fpr[i - 1]) * (curve.tpr[i] + curve.tpr[i - 1]) / 2.0;
    }
    area
}

/// Conservative TPR at a fixed FPR budget: the maximum TPR over sweep
/// thresholds whose empirical FPR is `<= fpr_level`, with no interpolation.
pub fn tpr_at_fpr(scores: &[f64], labels: &[bool], fpr_level: f64) -> Result<f64> {
    if !(fpr_level > 0.0 && fpr_level < 1.0) {
        return Err(EvalError::InvalidFprLevel(fpr_level));
    }
    let curve = compute_roc(scores, labels)?;
    let mut best = 0.0f64;
    for i in 0..curve.len() {
        if curve.fpr[i] <= fpr_level && curve.tpr[i] > best {
            best = curve.tpr[i];
        }
    }
    Ok(best)
}
