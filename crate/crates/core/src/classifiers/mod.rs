//! Base learners behind a uniform fit / predict-probability interface.
//!
//! Every algorithm is addressed by a [`ClassifierKey`] resolved against
//! [`registry`]. All settings are fixed defaults; only pipeline-level
//! choices are searched.

pub mod boosting;
pub mod deep_forest;
pub mod forest;
pub mod knn;
pub mod linear;
pub mod naive_bayes;
pub mod tree;

use ndarray::ArrayView2;
use thiserror::Error;

use crate::rng::rng_from_seed;
use crate::space::ClassifierKey;
use boosting::{AdaBoost, BoostParams, GradientBoosting};
use deep_forest::{DeepForest, DeepForestParams};
use forest::Forest;
use knn::Knn;
use linear::LinearModel;
use naive_bayes::{BernoulliNb, GaussianNb};
use tree::{Columns, MaxFeatures, Splitter, Tree, TreeParams};

pub use forest::{fit_regressor, ForestParams, RegressionForest, RegressorError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    GaussianNb,
    BernoulliNb,
    LogisticRegression,
    SgdLinear,
    DecisionTree,
    RandomForest,
    ExtraTree,
    ExtraTreesEnsemble,
    Bagging,
    AdaBoost,
    GradientBoosting,
    HistGradientBoosting,
    Lda,
    Knn,
    DeepForest,
    Svm,
}

impl Algorithm {
    /// Registry order. Encodings depend on it, so it must never change.
    pub const ALL: [Algorithm; 16] = [
        Algorithm::GaussianNb,
        Algorithm::BernoulliNb,
        Algorithm::LogisticRegression,
        Algorithm::SgdLinear,
        Algorithm::DecisionTree,
        Algorithm::RandomForest,
        Algorithm::ExtraTree,
        Algorithm::ExtraTreesEnsemble,
        Algorithm::Bagging,
        Algorithm::AdaBoost,
        Algorithm::GradientBoosting,
        Algorithm::HistGradientBoosting,
        Algorithm::Lda,
        Algorithm::Knn,
        Algorithm::DeepForest,
        Algorithm::Svm,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Algorithm::GaussianNb => "gaussian_nb",
            Algorithm::BernoulliNb => "bernoulli_nb",
            Algorithm::LogisticRegression => "logistic_regression",
            Algorithm::SgdLinear => "sgd_linear",
            Algorithm::DecisionTree => "decision_tree",
            Algorithm::RandomForest => "random_forest",
            Algorithm::ExtraTree => "extra_tree",
            Algorithm::ExtraTreesEnsemble => "extra_trees_ensemble",
            Algorithm::Bagging => "bagging",
            Algorithm::AdaBoost => "adaboost",
            Algorithm::GradientBoosting => "gradient_boosting",
            Algorithm::HistGradientBoosting => "hist_gradient_boosting",
            Algorithm::Lda => "lda",
            Algorithm::Knn => "knn",
            Algorithm::DeepForest => "deep_forest",
            Algorithm::Svm => "svm",
        }
    }

    pub fn from_key(key: &str) -> Option<Algorithm> {
        Algorithm::ALL.into_iter().find(|a| a.key() == key)
    }
}

/// Keys that have a registry slot but no implementation.
pub const UNAVAILABLE: [&str; 2] = ["mlp", "gaussian_process"];

/// Available classifiers in stable order.
pub fn registry() -> Vec<ClassifierKey> {
    Algorithm::ALL.iter().map(|a| ClassifierKey::new(a.key())).collect()
}

/// The full 18-slot list including the unavailable keys; only useful for
/// cardinality and encoding-size calculations.
pub fn full_registry() -> Vec<ClassifierKey> {
    registry().into_iter().chain(UNAVAILABLE.iter().map(|k| ClassifierKey::new(*k))).collect()
}

/// SHA-256 of the registry keys in order; recorded in run manifests.
pub fn registry_digest() -> String {
    use sha2::{Digest, Sha256};
    let joined = registry().iter().map(|k| k.as_str()).collect::<Vec<_>>().join("\n");
    hex::encode(Sha256::digest(joined.as_bytes()))
}

pub fn is_available(key: &ClassifierKey) -> bool {
    Algorithm::from_key(key.as_str()).is_some()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassifierError {
    #[error("unknown classifier key `{0}`")]
    UnknownKey(String),
    #[error("classifier `{0}` has no implementation")]
    Unavailable(String),
    #[error("cannot fit on an empty training set")]
    Empty,
    #[error("{rows} rows but {targets} targets")]
    LengthMismatch { rows: usize, targets: usize },
    #[error("model was trained on {expected} features, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("non-finite feature value")]
    NonFinite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelMeta {
    pub key: ClassifierKey,
    pub n_rows: usize,
    pub n_features: usize,
    pub seed: u64,
    /// `Some(class)` when the training targets contained a single class.
    pub degenerate: Option<bool>,
}

#[derive(Clone, Debug)]
enum State {
    Constant(f64),
    GaussianNb(GaussianNb),
    BernoulliNb(BernoulliNb),
    Linear(LinearModel),
    Tree(Tree),
    Forest(Forest),
    AdaBoost(AdaBoost),
    Boosting(GradientBoosting),
    Knn(Knn),
    DeepForest(DeepForest),
}

/// A fitted binary classifier. Immutable and shareable across threads.
#[derive(Clone, Debug)]
pub struct TrainedModel {
    meta: ModelMeta,
    state: State,
}

impl TrainedModel {
    /// A model returning probability `p` for every instance.
    pub fn constant(p: f64, n_features: usize) -> TrainedModel {
        TrainedModel {
            meta: ModelMeta { key: ClassifierKey::new("constant"), n_rows: 0, n_features, seed: 0, degenerate: None },
            state: State::Constant(p.clamp(0.0, 1.0)),
        }
    }

    pub fn meta(&self) -> &ModelMeta {
        &self.meta
    }

    pub fn is_degenerate(&self) -> bool {
        self.meta.degenerate.is_some()
    }

    /// Positive-class probabilities, one per row.
    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Result<Vec<f64>, ClassifierError> {
        if x.ncols() != self.meta.n_features {
            return Err(ClassifierError::ShapeMismatch { expected: self.meta.n_features, got: x.ncols() });
        }
        let p = match &self.state {
            State::Constant(p) => vec![*p; x.nrows()],
            State::GaussianNb(m) => m.predict_proba(&x),
            State::BernoulliNb(m) => m.predict_proba(&x),
            State::Linear(m) => m.predict_proba(&x),
            State::Tree(t) => t.predict(&x),
            State::Forest(f) => f.predict(&x),
            State::AdaBoost(m) => m.predict_proba(&x),
            State::Boosting(m) => m.predict_proba(&x),
            State::Knn(m) => m.predict_proba(&x),
            State::DeepForest(m) => m.predict_proba(&x),
        };
        Ok(p.into_iter().map(|v| if v.is_nan() { 0.5 } else { v.clamp(0.0, 1.0) }).collect())
    }

    /// `(P(negative), P(positive))` pairs.
    pub fn predict_pair(&self, x: ArrayView2<f64>) -> Result<Vec<(f64, f64)>, ClassifierError> {
        Ok(self.predict_proba(x)?.into_iter().map(|p| (1.0 - p, p)).collect())
    }

    /// Hard labels with the 0.5 cut-off.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<bool>, ClassifierError> {
        Ok(self.predict_proba(x)?.into_iter().map(|p| p >= 0.5).collect())
    }
}

fn single_tree(max_features: MaxFeatures, splitter: Splitter) -> TreeParams {
    TreeParams { max_features, splitter, ..TreeParams::default() }
}

/// Fits the classifier named by `key` on `(x, y)` with `y = true` positive.
pub fn fit(key: &ClassifierKey, x: ArrayView2<f64>, y: &[bool], seed: u64) -> Result<TrainedModel, ClassifierError> {
    let alg = match Algorithm::from_key(key.as_str()) {
        Some(a) => a,
        None if UNAVAILABLE.contains(&key.as_str()) => return Err(ClassifierError::Unavailable(key.to_string())),
        None => return Err(ClassifierError::UnknownKey(key.to_string())),
    };
    fit_algorithm(alg, x, y, seed)
}

pub fn fit_algorithm(alg: Algorithm, x: ArrayView2<f64>, y: &[bool], seed: u64) -> Result<TrainedModel, ClassifierError> {
    if x.nrows() != y.len() {
        return Err(ClassifierError::LengthMismatch { rows: x.nrows(), targets: y.len() });
    }
    if y.is_empty() {
        return Err(ClassifierError::Empty);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(ClassifierError::NonFinite);
    }
    let mut meta = ModelMeta {
        key: ClassifierKey::new(alg.key()),
        n_rows: x.nrows(),
        n_features: x.ncols(),
        seed,
        degenerate: None,
    };
    let n_pos = y.iter().filter(|&&v| v).count();
    if n_pos == 0 || n_pos == y.len() {
        let class = n_pos > 0;
        meta.degenerate = Some(class);
        return Ok(TrainedModel { meta, state: State::Constant(if class { 1.0 } else { 0.0 }) });
    }
    let yf = || y.iter().map(|&b| b as u8 as f64).collect::<Vec<f64>>();
    let tree_fit = |params: TreeParams| {
        let cols = Columns::from_view(x);
        Tree::fit(&cols, &yf(), &vec![1.0; y.len()], &params, &mut rng_from_seed(seed))
    };
    let state = match alg {
        Algorithm::GaussianNb => State::GaussianNb(GaussianNb::fit(x, y)),
        Algorithm::BernoulliNb => State::BernoulliNb(BernoulliNb::fit(x, y, 0.0)),
        Algorithm::LogisticRegression => State::Linear(linear::fit_logistic(x, y)),
        Algorithm::SgdLinear => State::Linear(linear::fit_sgd(x, y, seed)),
        Algorithm::Lda => State::Linear(linear::fit_lda(x, y)),
        Algorithm::Svm => State::Linear(linear::fit_svm(x, y, seed)),
        Algorithm::DecisionTree => State::Tree(tree_fit(single_tree(MaxFeatures::All, Splitter::Best))),
        Algorithm::ExtraTree => State::Tree(tree_fit(single_tree(MaxFeatures::Sqrt, Splitter::Random))),
        Algorithm::RandomForest => State::Forest(Forest::fit(x, &yf(), &ForestParams::random_forest(), seed)),
        Algorithm::ExtraTreesEnsemble => State::Forest(Forest::fit(x, &yf(), &ForestParams::extra_trees(), seed)),
        Algorithm::Bagging => State::Forest(Forest::fit(x, &yf(), &ForestParams::bagging(), seed)),
        Algorithm::AdaBoost => State::AdaBoost(AdaBoost::fit(x, y, 50, seed)),
        Algorithm::GradientBoosting => {
            let params = BoostParams {
                rounds: 50,
                learning_rate: 0.1,
                tree: TreeParams { max_depth: Some(3), ..TreeParams::default() },
            };
            State::Boosting(GradientBoosting::fit(x, y, &params, seed))
        }
        Algorithm::HistGradientBoosting => {
            let params = BoostParams {
                rounds: 50,
                learning_rate: 0.1,
                tree: TreeParams { max_depth: Some(5), min_samples_leaf: 20, ..TreeParams::default() },
            };
            State::Boosting(GradientBoosting::fit_hist(x, y, &params, 64, seed))
        }
        Algorithm::Knn => State::Knn(Knn::fit(x, y, 5)),
        Algorithm::DeepForest => State::DeepForest(DeepForest::fit(x, y, &DeepForestParams::default(), seed)),
    };
    Ok(TrainedModel { meta, state })
}

/// Fits a deep forest with non-default settings (used by DF-PU at reduced scale).
pub fn fit_deep_forest(
    x: ArrayView2<f64>,
    y: &[bool],
    params: &DeepForestParams,
    seed: u64,
) -> Result<TrainedModel, ClassifierError> {
    if params == &DeepForestParams::default() {
        return fit_algorithm(Algorithm::DeepForest, x, y, seed);
    }
    let mut model = fit_algorithm(Algorithm::GaussianNb, x, y, seed)?;
    model.meta.key = ClassifierKey::new(Algorithm::DeepForest.key());
    if model.meta.degenerate.is_none() {
        model.state = State::DeepForest(DeepForest::fit(x, y, params, seed));
    }
    Ok(model)
}

/// k-NN with an explicit neighbour count.
pub fn fit_knn(x: ArrayView2<f64>, y: &[bool], k: usize) -> Result<TrainedModel, ClassifierError> {
    let mut model = fit_algorithm(Algorithm::GaussianNb, x, y, 0)?;
    model.meta.key = ClassifierKey::new(Algorithm::Knn.key());
    if model.meta.degenerate.is_none() {
        model.state = State::Knn(Knn::fit(x, y, k));
    }
    Ok(model)
}

/// Wraps a Gaussian naive Bayes fitted elsewhere (soft-label EM).
pub fn from_gaussian_nb(nb: GaussianNb, n_rows: usize, n_features: usize) -> TrainedModel {
    TrainedModel {
        meta: ModelMeta {
            key: ClassifierKey::new(Algorithm::GaussianNb.key()),
            n_rows,
            n_features,
            seed: 0,
            degenerate: None,
        },
        state: State::GaussianNb(nb),
    }
}
