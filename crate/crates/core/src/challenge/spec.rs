//! Challenge fleet specification and per-model metadata.

use serde::{Deserialize, Serialize};

use super::{ChallengeError, Result};

/// Which phase a target model belongs to. Train-phase membership labels are
/// adversary-visible; dev/final labels are not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Train,
    Dev,
    Final,
}

/// Adversary access model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Track {
    WhiteBox,
    BlackBox,
}

impl Track {
    pub fn as_str(&self) -> &'static str {
        match self {
            Track::WhiteBox => "white_box",
            Track::BlackBox => "black_box",
        }
    }
}

/// Fleet sizes per phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseCounts {
    pub train_phase: usize,
    pub dev_phase: usize,
    pub final_phase: usize,
}

impl Default for PhaseCounts {
    fn default() -> Self {
        Self {
            train_phase: 30,
            dev_phase: 20,
            final_phase: 20,
        }
    }
}

impl PhaseCounts {
    pub fn total(&self) -> usize {
        self.train_phase + self.dev_phase + self.final_phase
    }
}

/// Experiment shape: fleet sizes, per-model member-set size, balanced
/// challenge query count, and the adversary track.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChallengeSpec {
    #[serde(default)]
    pub counts: PhaseCounts,
    pub members_per_model: usize,
    /// Balanced challenge queries per model (half members, half holdouts).
    pub challenge_queries_per_model: usize,
    pub track: Track,
}

impl Default for ChallengeSpec {
    fn default() -> Self {
        // Balanced halves of the published per-model sample counts:
        // 6000 training rows per model, 2000 test queries.
        Self {
            counts: PhaseCounts::default(),
            members_per_model: 6000,
            challenge_queries_per_model: 2000,
            track: Track::WhiteBox,
        }
    }
}

impl ChallengeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.counts.train_phase < 1 || self.counts.dev_phase < 1 || self.counts.final_phase < 1 {
            return Err(ChallengeError::InvalidSpec(
                "every phase needs at least one model".into(),
            ));
        }
        if self.members_per_model < 1 {
            return Err(ChallengeError::InvalidSpec(
                "members_per_model must be >= 1".into(),
            ));
        }
        let q = self.challenge_queries_per_model;
        if q < 2 || !q.is_multiple_of(2) {
            return Err(ChallengeError::InvalidSpec(format!(
                "challenge_queries_per_model must be even and >= 2, got {q}"
            )));
        }
        if q / 2 > self.members_per_model {
            return Err(ChallengeError::InvalidSpec(format!(
                "cannot draw {} member queries from {} members",
                q / 2,
                self.members_per_model
            )));
        }
        Ok(())
    }

    pub fn total_models(&self) -> usize {
        self.counts.total()
    }

    /// Phase of a sequentially assigned model id.
    pub fn phase_of(&self, model_id: u32) -> Phase {
        let id = model_id as usize;
        if id < self.counts.train_phase {
            Phase::Train
        } else if id < self.counts.train_phase + self.counts.dev_phase {
            Phase::Dev
        } else {
            Phase::Final
        }
    }

    pub fn model_ids(&self, phase: Phase) -> Vec<u32> {
        (0..self.total_models() as u32)
            .filter(|&id| self.phase_of(id) == phase)
            .collect()
    }
}

/// Denoiser checkpoint sidecar: schedule, shapes, and the training seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub model_id: u32,
    pub phase: Phase,
    pub t_total: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub input_dim: usize,
    pub embed_dim: usize,
    pub seed: u64,
    pub train_steps: usize,
    pub batch_size: usize,
    pub lr: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spec_has_seventy_models() {
        let spec = ChallengeSpec::default();
        assert_eq!(spec.total_models(), 70);
        assert_eq!(spec.model_ids(Phase::Train).len(), 30);
        assert_eq!(spec.model_ids(Phase::Dev).len(), 20);
        assert_eq!(spec.model_ids(Phase::Final).len(), 20);
    }

    #[test]
    fn default_spec_yields_seventy_split_manifests() {
        let spec = ChallengeSpec::default();
        let needed = spec.total_models() * 2 * spec.members_per_model;
        let manifests =
            crate::tabular::make_splits(needed, spec.total_models(), spec.members_per_model, 0)
                .unwrap();
        assert_eq!(manifests.len(), 70);
    }

    #[test]
    fn phases_partition_sequential_ids() {
        let spec = ChallengeSpec {
            counts: PhaseCounts {
                train_phase: 2,
                dev_phase: 1,
                final_phase: 1,
            },
            members_per_model: 4,
            challenge_queries_per_model: 4,
            track: Track::WhiteBox,
        };
        assert_eq!(spec.phase_of(0), Phase::Train);
        assert_eq!(spec.phase_of(1), Phase::Train);
        assert_eq!(spec.phase_of(2), Phase::Dev);
        assert_eq!(spec.phase_of(3), Phase::Final);
    }

    #[test]
    fn validation_rejects_odd_query_counts() {
        let mut spec = ChallengeSpec {
            challenge_queries_per_model: 3,
            ..Default::default()
        };
        assert!(spec.validate().is_err());
        spec.challenge_queries_per_model = 2 * spec.members_per_model + 2;
        assert!(spec.validate().is_err());
    }
}
