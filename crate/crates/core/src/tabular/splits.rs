//! Member/holdout partitioning for a model fleet.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Result, RowId, TabularError};

/// Balanced member/holdout row assignment for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub model_id: u32,
    pub members: Vec<RowId>,
    pub holdout: Vec<RowId>,
}

impl SplitManifest {
    pub fn is_balanced(&self) -> bool {
        self.members.len() == self.holdout.len()
    }

    pub fn is_internally_disjoint(&self) -> bool {
        self.members.iter().all(|id| !self.holdout.contains(id))
    }
}

/// Assigns each model a balanced member/holdout pair of size
/// `members_per_model` each. Assignments are pairwise disjoint across the
/// whole fleet, so no challenge row of one model can ever appear in another
/// model's sets. This is the disjointness the attack-training contract
/// relies on.
pub fn make_splits(
    population_len: usize,
    n_models: usize,
    members_per_model: usize,
    seed: u64,
) -> Result<Vec<SplitManifest>> {
    let needed = n_models
        .checked_mul(2 * members_per_model)
        .expect("split demand fits in usize");
    if needed > population_len {
        return Err(TabularError::InsufficientPopulation {
            needed,
            available: population_len,
        });
    }
    let mut ids: Vec<RowId> = (0..population_len as RowId).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);

    let mut manifests = Vec::with_capacity(n_models);
    let mut cursor = 0;
    for model_id in 0..n_models as u32 {
        let mut members = ids[cursor..cursor + members_per_model].to_vec();
        cursor += members_per_model;
        let mut holdout = ids[cursor..cursor + members_per_model].to_vec();
        cursor += members_per_model;
        members.sort_unstable();
        holdout.sort_unstable();
        manifests.push(SplitManifest {
            model_id,
            members,
            holdout,
        });
    }
    Ok(manifests)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn one_model_partitions_eight_rows_exactly() {
        let splits = make_splits(8, 1, 4, 0).unwrap();
        assert_eq!(splits.len(), 1);
        let all: HashSet<RowId> = splits[0]
            .members
            .iter()
            .chain(&splits[0].holdout)
            .copied()
            .collect();
        assert_eq!(all, (0..8).collect::<HashSet<_>>());
        assert!(splits[0].is_balanced());
        assert!(splits[0].is_internally_disjoint());
    }

    #[test]
    fn fleet_assignments_are_pairwise_disjoint() {
        let splits = make_splits(1000, 7, 20, 3).unwrap();
        let mut seen = HashSet::new();
        for m in &splits {
            for id in m.members.iter().chain(&m.holdout) {
                assert!(seen.insert(*id), "row {id} assigned twice");
            }
        }
    }

    #[test]
    fn insufficient_population_is_an_error() {
        assert!(matches!(
            make_splits(7, 1, 4, 0),
            Err(TabularError::InsufficientPopulation { .. })
        ));
    }

    #[test]
    fn manifest_json_field_names_are_stable() {
        let m = SplitManifest {
            model_id: 3,
            members: vec![1, 2],
            holdout: vec![4, 5],
        };
        assert_eq!(
            serde_json::to_string(&m).unwrap(),
            r#"{"model_id":3,"members":[1,2],"holdout":[4,5]}"#
        );
    }

    #[test]
    fn same_seed_same_partition() {
        assert_eq!(make_splits(64, 3, 8, 9).unwrap(), make_splits(64, 3, 8, 9).unwrap());
    }
}
