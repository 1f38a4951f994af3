use rand::seq::SliceRandom;
use thiserror::Error;

use crate::data::{DataError, Dataset, PuDataset};
use crate::rng::rng_from_seed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineerError {
    #[error("delta must lie in [0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("hiding {hidden} of {positives} positives would leave none labelled")]
    AllHidden { hidden: usize, positives: usize },
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Number of positives hidden for a given `delta`: `delta * n_pos` rounded
/// half up.
pub fn hidden_count(delta: f64, n_pos: usize) -> usize {
    (delta * n_pos as f64 + 0.5 + 1e-9).floor() as usize
}

/// Turns a labelled training set into PU data by hiding a `delta` fraction of
/// the positives among the unlabelled instances. Features and true classes
/// are kept as they are.
pub fn engineer_pu(train: &Dataset, delta: f64, seed: u64) -> Result<PuDataset, EngineerError> {
    if !(0.0..1.0).contains(&delta) {
        return Err(EngineerError::InvalidDelta(delta));
    }
    let labels = train.labels();
    let mut positives: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let hidden = hidden_count(delta, positives.len());
    if hidden >= positives.len() {
        return Err(EngineerError::AllHidden { hidden, positives: positives.len() });
    }
    positives.shuffle(&mut rng_from_seed(seed));
    let mut s = labels.to_vec();
    for &i in &positives[..hidden] {
        s[i] = false;
    }
    Ok(PuDataset::new(train.features().to_owned(), s, Some(labels.to_vec()))?)
}
