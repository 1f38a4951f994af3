use std::collections::BTreeMap;
use std::time::Instant;

use ndarray::Axis;
use serde::{Deserialize, Serialize};

use crate::config::CandidateConfig;
use crate::data::{Dataset, PuDataset};
use crate::evaluation::engineer::engineer_pu;
use crate::evaluation::folds::{stratified_kfold, FoldError, FoldPlan};
use crate::evaluation::metrics::{metrics, ConfusionCounts, Metrics};
use crate::pu::PuLearner;
use crate::rng::derive_tagged;
use crate::search::SearchTrace;

/// Version of the [`RunResult`] JSON layout.
pub const RESULT_SCHEMA_VERSION: u32 = 1;

/// Outer folds of the default protocol.
pub const OUTER_FOLDS: usize = 5;

/// What a system hands back after searching one engineered training set.
pub struct Selection {
    pub learner: Box<dyn PuLearner>,
    pub config: Option<CandidateConfig>,
    /// Baseline hyperparameters (or any extra detail) as name/value pairs.
    pub hyperparameters: BTreeMap<String, String>,
    pub best_objective: f64,
    pub evaluations: usize,
    pub cache_hits: usize,
    pub trace: Option<SearchTrace>,
}

/// An optimiser or baseline that picks a PU learner from training data alone.
pub trait System: Sync {
    /// Short identifier, e.g. `ga` or `sem`.
    fn id(&self) -> String;
    /// Search-space variant label, or `None` for baselines without one.
    fn variant(&self) -> Option<String> {
        None
    }
    fn select(&self, pu_train: &PuDataset, seed: u64) -> Result<Selection, String>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub failed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_config: Option<CandidateConfig>,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, String>,
    pub best_objective: f64,
    pub test: Metrics,
    pub counts: ConfusionCounts,
    pub evaluations: usize,
    pub cache_hits: usize,
    pub n_train: usize,
    pub n_labelled: usize,
    pub n_test: usize,
    pub final_model_failed: bool,
    /// Search trace of the optimiser, when the system produces one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<SearchTrace>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub fold_seconds: Vec<f64>,
    pub total_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub schema_version: u32,
    pub dataset: String,
    pub delta: f64,
    pub system: String,
    #[serde(default)]
    pub variant: Option<String>,
    pub seed: u64,
    pub fold_plan_digest: String,
    pub folds: Vec<FoldResult>,
    /// Mean test metrics over non-failed folds.
    pub mean: Metrics,
    pub mean_evaluations: f64,
    /// Wall-clock figures; excluded from [`RunResult::payload_json`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl RunResult {
    /// `system` plus the variant, e.g. `ga-extended`.
    pub fn label(&self) -> String {
        match &self.variant {
            Some(v) => format!("{}-{}", self.system, v),
            None => self.system.clone(),
        }
    }

    /// The deterministic part of the result as pretty JSON.
    pub fn payload_json(&self) -> String {
        let mut copy = self.clone();
        copy.timing = None;
        serde_json::to_string_pretty(&copy).expect("run result serialises")
    }
}

/// The outer fold plan for a dataset; shared by every system run on it.
pub fn outer_fold_plan(dataset: &Dataset, k: usize, seed: u64) -> Result<FoldPlan, FoldError> {
    Ok(stratified_kfold(dataset.labels(), k, derive_tagged(seed, "outer", 0))?.with_key_name("y_true"))
}

/// Engineered PU training set for one outer fold.
pub fn engineered_fold(
    dataset: &Dataset,
    plan: &FoldPlan,
    fold: usize,
    delta: f64,
    seed: u64,
) -> Result<(PuDataset, Vec<usize>, Vec<usize>), String> {
    let (train, test) = plan.split(fold);
    let pu = engineer_pu(&dataset.subset(&train), delta, derive_tagged(seed, "engineer", fold as u64))
        .map_err(|e| e.to_string())?;
    Ok((pu, train, test))
}

fn mean_of(folds: &[FoldResult]) -> (Metrics, f64) {
    let ok: Vec<&FoldResult> = folds.iter().filter(|f| !f.failed).collect();
    let n = ok.len().max(1) as f64;
    let m = Metrics {
        precision: ok.iter().map(|f| f.test.precision).sum::<f64>() / n,
        recall: ok.iter().map(|f| f.test.recall).sum::<f64>() / n,
        f_measure: ok.iter().map(|f| f.test.f_measure).sum::<f64>() / n,
    };
    (m, ok.iter().map(|f| f.evaluations as f64).sum::<f64>() / n)
}

/// Nested cross-validation of one system on one dataset.
///
/// Per outer fold: engineer the training part, let the system select a
/// learner on it, retrain the chosen learner on the whole engineered
/// training part and score the untouched test part against the true labels.
pub fn nested_cv(
    system: &dyn System,
    dataset: &Dataset,
    dataset_id: &str,
    plan: &FoldPlan,
    delta: f64,
    seed: u64,
) -> RunResult {
    let start = Instant::now();
    let mut folds = Vec::with_capacity(plan.k);
    let mut fold_seconds = Vec::with_capacity(plan.k);
    for fold in 0..plan.k {
        let t0 = Instant::now();
        folds.push(run_fold(system, dataset, plan, fold, delta, seed));
        fold_seconds.push(t0.elapsed().as_secs_f64());
    }
    let (mean, mean_evaluations) = mean_of(&folds);
    RunResult {
        schema_version: RESULT_SCHEMA_VERSION,
        dataset: dataset_id.to_string(),
        delta,
        system: system.id(),
        variant: system.variant(),
        seed,
        fold_plan_digest: plan.digest(),
        folds,
        mean,
        mean_evaluations,
        timing: Some(Timing { fold_seconds, total_seconds: start.elapsed().as_secs_f64() }),
    }
}

fn run_fold(system: &dyn System, dataset: &Dataset, plan: &FoldPlan, fold: usize, delta: f64, seed: u64) -> FoldResult {
    let (train, test) = plan.split(fold);
    let mut result = FoldResult {
        fold,
        failed: true,
        error: None,
        best_config: None,
        hyperparameters: BTreeMap::new(),
        best_objective: 0.0,
        test: Metrics { precision: 0.0, recall: 0.0, f_measure: 0.0 },
        counts: ConfusionCounts::default(),
        evaluations: 0,
        cache_hits: 0,
        n_train: train.len(),
        n_labelled: 0,
        n_test: test.len(),
        final_model_failed: false,
        trace: None,
    };
    let pu = match engineered_fold(dataset, plan, fold, delta, seed) {
        Ok((pu, _, _)) => pu,
        Err(e) => {
            result.error = Some(e);
            return result;
        }
    };
    result.n_labelled = pu.labelled_indices().len();
    let blind = pu.blind();
    let selection = match system.select(&blind, derive_tagged(seed, "search", fold as u64)) {
        Ok(s) => s,
        Err(e) => {
            result.error = Some(e);
            return result;
        }
    };
    result.best_config = selection.config.clone();
    result.hyperparameters = selection.hyperparameters.clone();
    result.best_objective = selection.best_objective;
    result.evaluations = selection.evaluations;
    result.cache_hits = selection.cache_hits;
    result.trace = selection.trace;

    let model = selection.learner.learn(&blind, derive_tagged(seed, "final", fold as u64));
    result.final_model_failed = model.is_failed();
    let x_test = dataset.features().select(Axis(0), &test);
    let truth: Vec<bool> = test.iter().map(|&i| dataset.labels()[i]).collect();
    match model.predict(x_test.view()) {
        Ok(pred) => {
            result.counts = ConfusionCounts::from_predictions(&pred, &truth);
            result.test = metrics(&result.counts);
            result.failed = false;
        }
        Err(e) => result.error = Some(e.to_string()),
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::TrainedModel;
    use crate::pu::{PuModel, ReliableNegativeSet};
    use crate::synthetic::gaussian_blobs;
    use std::collections::BTreeSet;

    struct Oracle;
    impl PuLearner for Oracle {
        fn learn(&self, pu: &PuDataset, _: u64) -> PuModel {
            PuModel::new(TrainedModel::constant(1.0, pu.n_features()), "all".into(), ReliableNegativeSet::default(), 0)
        }
    }

    struct Fixed;
    impl System for Fixed {
        fn id(&self) -> String {
            "fixed".into()
        }
        fn select(&self, pu: &PuDataset, _: u64) -> Result<Selection, String> {
            assert!(pu.y_true().is_none());
            Ok(Selection {
                learner: Box::new(Oracle),
                config: None,
                hyperparameters: BTreeMap::new(),
                best_objective: 0.5,
                evaluations: 1,
                cache_hits: 0,
                trace: None,
            })
        }
    }

    #[test]
    fn five_folds_and_disjoint_indices() {
        let d = gaussian_blobs(60, 2, 0.4, 4.0, 2, 0);
        let plan = outer_fold_plan(&d, OUTER_FOLDS, 3).unwrap();
        let r = nested_cv(&Fixed, &d, "blobs", &plan, 0.2, 3);
        assert_eq!(r.folds.len(), 5);
        assert!(r.folds.iter().all(|f| !f.failed));
        // Predicting everything positive: recall 1, precision = prevalence.
        assert!((r.mean.recall - 1.0).abs() < 1e-12);
        assert!((r.mean.precision - 0.4).abs() < 0.05);
        for f in 0..5 {
            let (train, test) = plan.split(f);
            let a: BTreeSet<_> = train.into_iter().collect();
            assert!(test.iter().all(|i| !a.contains(i)));
        }
        assert_eq!(r.payload_json(), nested_cv(&Fixed, &d, "blobs", &plan, 0.2, 3).payload_json());
    }
}
