use std::cmp::Ordering;

use rand::seq::SliceRandom;

use super::{DatasetSplit, GraspSample, Label};
use crate::error::{Error, Result};
use crate::rng::rng_for;

/// Stratified assignment of every sample of a split to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub fold_of: Vec<usize>,
    pub k: usize,
    pub seed: u64,
    pub round: u64,
}

impl FoldAssignment {
    /// Sample indices of fold `fold` (validation) and of all other folds
    /// (training), each in ascending order.
    pub fn split_indices(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let (val, train): (Vec<usize>, Vec<usize>) =
            (0..self.fold_of.len()).partition(|&i| self.fold_of[i] == fold);
        (train, val)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

fn canonical_order(a: &GraspSample, b: &GraspSample) -> Ordering {
    a.object_id
        .cmp(&b.object_id)
        .then(a.orientation.cmp(&b.orientation))
        .then(a.label.cmp(&b.label))
        .then(a.readings.cmp(&b.readings))
}

/// Stratified k-fold assignment.
///
/// Samples are first put in a canonical order (by content, then by row index),
/// so the assignment does not depend on the order of rows in the file. Each
/// label class is then shuffled with a ChaCha8 stream derived from
/// `(seed, round)` and dealt round-robin over the folds; the second class
/// continues dealing where the first stopped, so both per-class and total fold
/// sizes differ by at most one.
pub fn make_folds(split: &DatasetSplit, k: usize, seed: u64, round: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be at least 2, got {k}")));
    }
    let samples = &split.samples;
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| canonical_order(&samples[a], &samples[b]).then(a.cmp(&b)));

    let mut rng = rng_for(seed, round);
    let mut fold_of = vec![0; samples.len()];
    let mut dealt = 0;
    for label in Label::ALL {
        let mut class: Vec<usize> = order.iter().copied().filter(|&i| samples[i].label == label).collect();
        if class.len() < k {
            return Err(Error::InvalidArgument(format!(
                "{} {label} samples, need at least {k} for {k}-fold cross-validation",
                class.len()
            )));
        }
        class.shuffle(&mut rng);
        for i in class {
            fold_of[i] = dealt % k;
            dealt += 1;
        }
    }
    Ok(FoldAssignment {
        fold_of,
        k,
        seed,
        round,
    })
}
