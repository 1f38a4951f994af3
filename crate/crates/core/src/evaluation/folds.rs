use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rng::rng_from_seed;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FoldError {
    #[error("k must be at least 2, got {0}")]
    TooFewFolds(usize),
    #[error("{n} instances cannot fill {k} folds")]
    TooFewInstances { n: usize, k: usize },
}

/// Fold assignment for every instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// Name of the stratification key, e.g. `y_true` or `s`.
    pub stratified_on: String,
    pub assignment: Vec<usize>,
}

impl FoldPlan {
    pub fn n_instances(&self) -> usize {
        self.assignment.len()
    }

    pub fn with_key_name(mut self, name: &str) -> FoldPlan {
        self.stratified_on = name.to_string();
        self
    }

    /// `(train, test)` row indices for one fold, both ascending.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let (test, train): (Vec<usize>, Vec<usize>) =
            (0..self.assignment.len()).partition(|&i| self.assignment[i] == fold);
        (train, test)
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("fold plan serialises");
        hex::encode(Sha256::digest(&json))
    }
}

/// Stratified k-fold assignment.
///
/// Each stratum is shuffled and dealt round-robin over the folds; the dealing
/// position carries over between strata, so strata smaller than `k` are
/// spread across different folds instead of all landing in fold 0.
pub fn stratified_kfold(keys: &[bool], k: usize, seed: u64) -> Result<FoldPlan, FoldError> {
    if k < 2 {
        return Err(FoldError::TooFewFolds(k));
    }
    if keys.len() < k {
        return Err(FoldError::TooFewInstances { n: keys.len(), k });
    }
    let mut rng = rng_from_seed(seed);
    let mut assignment = vec![0usize; keys.len()];
    let mut offset = 0usize;
    for stratum in [true, false] {
        let mut idx: Vec<usize> = (0..keys.len()).filter(|&i| keys[i] == stratum).collect();
        idx.shuffle(&mut rng);
        for (j, &i) in idx.iter().enumerate() {
            assignment[i] = (offset + j) % k;
        }
        offset = (offset + idx.len()) % k;
    }
    Ok(FoldPlan { k, seed, stratified_on: "labels".into(), assignment })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(plan: &FoldPlan, keys: &[bool], class: bool) -> Vec<usize> {
        (0..plan.k).map(|f| (0..keys.len()).filter(|&i| plan.assignment[i] == f && keys[i] == class).count()).collect()
    }

    #[test]
    fn exact_division() {
        let keys: Vec<bool> = (0..100).map(|i| i < 50).collect();
        let plan = stratified_kfold(&keys, 5, 1).unwrap();
        assert_eq!(counts(&plan, &keys, true), vec![10; 5]);
        assert_eq!(counts(&plan, &keys, false), vec![10; 5]);
    }

    #[test]
    fn uneven_strata_within_one() {
        let keys: Vec<bool> = (0..100).map(|i| i < 52).collect();
        let plan = stratified_kfold(&keys, 5, 2).unwrap();
        assert!(counts(&plan, &keys, true).iter().all(|c| (10..=11).contains(c)));
        assert!(counts(&plan, &keys, false).iter().all(|c| (9..=10).contains(c)));
        assert_eq!(plan, stratified_kfold(&keys, 5, 2).unwrap());
        assert_ne!(plan.assignment, stratified_kfold(&keys, 5, 3).unwrap().assignment);
    }

    #[test]
    fn small_strata_are_spread() {
        let keys = [true, true, false, false, false, false, false];
        let plan = stratified_kfold(&keys, 5, 0).unwrap();
        let sizes: Vec<usize> = (0..5).map(|f| plan.split(f).1.len()).collect();
        assert!(sizes.iter().all(|&s| s >= 1));
    }

    #[test]
    fn errors() {
        assert_eq!(stratified_kfold(&[true, false], 1, 0), Err(FoldError::TooFewFolds(1)));
        assert!(stratified_kfold(&[true, false], 3, 0).is_err());
    }
}
