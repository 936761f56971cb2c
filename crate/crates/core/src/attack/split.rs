//! Model-based train/validation partitioning for classifier training.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AttackError, Result};

/// A whole-model partition: validation models never contribute rows to
/// classifier training, so validation stays independent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSplit {
    pub train: Vec<u32>,
    pub val: Vec<u32>,
}

/// Splits model ids 2:1 into train/validation (30 models give 20/10; the
/// desk-scale proportional rule is `train = floor(2n/3)`).
pub fn model_based_split(model_ids: &[u32], seed: u64) -> Result<ModelSplit> {
    let unique: HashSet<u32> = model_ids.iter().copied().collect();
    if unique.len() != model_ids.len() {
        return Err(AttackError::DuplicateModelIds);
    }
    let n_train = model_ids.len() * 2 / 3;
    if n_train == 0 || n_train == model_ids.len() {
        return Err(AttackError::InsufficientModels {
            have: model_ids.len(),
        });
    }
    let mut shuffled = model_ids.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    let mut train = shuffled[..n_train].to_vec();
    let mut val = shuffled[n_train..].to_vec();
    train.sort_unstable();
    val.sort_unstable();
    Ok(ModelSplit { train, val })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirty_models_split_twenty_ten() {
        let ids: Vec<u32> = (0..30).collect();
        let split = model_based_split(&ids, 1).unwrap();
        assert_eq!(split.train.len(), 20);
        assert_eq!(split.val.len(), 10);
        let mut all = split.train.clone();
        all.extend(&split.val);
        all.sort_unstable();
        assert_eq!(all, ids);
    }

    #[test]
    fn desk_scale_six_models_split_four_two() {
        let ids: Vec<u32> = (10..16).collect();
        let split = model_based_split(&ids, 2).unwrap();
        assert_eq!((split.train.len(), split.val.len()), (4, 2));
    }

    #[test]
    fn same_seed_same_partition() {
        let ids: Vec<u32> = (0..9).collect();
        assert_eq!(
            model_based_split(&ids, 5).unwrap(),
            model_based_split(&ids, 5).unwrap()
        );
    }

    #[test]
    fn duplicates_rejected() {
        assert!(matches!(
            model_based_split(&[1, 2, 2], 0),
            Err(AttackError::DuplicateModelIds)
        ));
    }

    #[test]
    fn single_model_is_insufficient() {
        assert!(matches!(
            model_based_split(&[1], 0),
            Err(AttackError::InsufficientModels { .. })
        ));
    }
}
