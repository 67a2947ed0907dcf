use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    /// Fold id of every sample, in dataset order.
    pub assignments: Vec<usize>,
    pub folds: usize,
    pub seed: u64,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }
}

pub fn make_folds(d: &Dataset, folds: usize, seed: u64) -> Result<FoldPlan> {
    Ok(FoldPlan {
        assignments: make_fold_ids(&d.labels(), d.class_count(), folds, seed)?,
        folds,
        seed,
    })
}

/// Stratified fold ids. Each class is shuffled and dealt round-robin; the
/// starting fold rotates from class to class so overall fold sizes also
/// differ by at most one. Classes without samples are ignored.
pub fn make_fold_ids(
    labels: &[usize],
    classes: usize,
    folds: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    if folds == 0 {
        return Err(Error::InvalidConfig("fold count must be positive".into()));
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut members = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= classes {
            return Err(Error::LabelOutOfRange { label: l, classes });
        }
        members[l].push(i);
    }
    for (class, m) in members.iter().enumerate() {
        if !m.is_empty() && m.len() < folds {
            return Err(Error::ScarceClass {
                class,
                count: m.len(),
                folds,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = vec![0; labels.len()];
    let mut offset = 0;
    for m in &mut members {
        m.shuffle(&mut rng);
        for (pos, &i) in m.iter().enumerate() {
            ids[i] = (offset + pos) % folds;
        }
        offset = (offset + m.len()) % folds;
    }
    Ok(ids)
}
