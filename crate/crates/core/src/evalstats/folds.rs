use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::RngStream;

/// Fold id per instance for stratified k-fold cross-validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
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

/// Shuffles each class independently and deals its members round-robin to
/// the folds. The dealing position carries over from one class to the next,
/// so fold sizes also differ by at most one overall.
pub fn stratified_kfold(labels: &[bool], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k = {k} folds")));
    }
    let mut rng = RngStream::new(seed, "folds");
    let mut assignments = vec![0; labels.len()];
    let mut position = 0;
    for class in [true, false] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(Error::ClassTooSmall {
                count: members.len(),
                folds: k,
            });
        }
        members.shuffle(&mut rng);
        for i in members {
            assignments[i] = position % k;
            position += 1;
        }
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
    })
}
