use crate::data::{DataError, PuDataset};
use crate::evaluation::folds::{stratified_kfold, FoldError};
use crate::evaluation::metrics::f_measure;
use crate::pu::PuLearner;
use crate::rng::derive_tagged;

/// Internal cross-validation folds used by every objective evaluation.
pub const INTERNAL_FOLDS: usize = 5;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error(transparent)]
    Folds(#[from] FoldError),
    #[error("internal fold {fold}: {source}")]
    Data { fold: usize, source: DataError },
    #[error("internal fold {fold}: {message}")]
    Predict { fold: usize, message: String },
}

/// Mean F-measure over internal folds stratified on `s`, scoring held-out
/// instances against `s` (labelled = positive, unlabelled = negative).
///
/// The learner only ever sees a blind copy of the data, so the hidden true
/// classes cannot influence model selection.
pub fn objective<L: PuLearner + ?Sized>(learner: &L, pu: &PuDataset, seed: u64) -> Result<f64, ObjectiveError> {
    let blind = pu.blind();
    let s = blind.s();
    let plan = stratified_kfold(s, INTERNAL_FOLDS, derive_tagged(seed, "inner", 0))?.with_key_name("s");
    let mut total = 0.0;
    for fold in 0..INTERNAL_FOLDS {
        let (train, test) = plan.split(fold);
        let train_pu = blind.subset(&train).map_err(|source| ObjectiveError::Data { fold, source })?;
        let model = learner.learn(&train_pu, derive_tagged(seed, "inner_fit", fold as u64));
        if model.is_failed() {
            continue;
        }
        let x_test = blind.features().select(ndarray::Axis(0), &test);
        let pred = model.predict(x_test.view()).map_err(|e| ObjectiveError::Predict { fold, message: e.to_string() })?;
        let truth: Vec<bool> = test.iter().map(|&i| s[i]).collect();
        total += f_measure(&pred, &truth);
    }
    Ok(total / INTERNAL_FOLDS as f64)
}
