//! Tree ensembles: random forest, extra trees, bagging and the regression
//! forest used as the search surrogate.

use ndarray::ArrayView2;
use rand::Rng as _;
use rayon::prelude::*;

use super::tree::{Columns, MaxFeatures, Splitter, Tree, TreeParams};
use crate::rng::{derive_seed, rng_from_seed};

#[derive(Clone, Debug, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    pub tree: TreeParams,
}

impl ForestParams {
    pub fn random_forest() -> Self {
        ForestParams {
            n_trees: 100,
            bootstrap: true,
            tree: TreeParams { max_features: MaxFeatures::Sqrt, ..TreeParams::default() },
        }
    }

    pub fn extra_trees() -> Self {
        ForestParams {
            n_trees: 100,
            bootstrap: false,
            tree: TreeParams { max_features: MaxFeatures::Sqrt, splitter: Splitter::Random, ..TreeParams::default() },
        }
    }

    pub fn bagging() -> Self {
        ForestParams { n_trees: 100, bootstrap: true, tree: TreeParams::default() }
    }

    /// Surrogate defaults: 100 trees, a third of the features per split, min leaf 2.
    pub fn surrogate() -> Self {
        ForestParams {
            n_trees: 100,
            bootstrap: true,
            tree: TreeParams { max_features: MaxFeatures::Third, min_samples_leaf: 2, ..TreeParams::default() },
        }
    }
}

/// Bagged / randomised ensemble of [`Tree`]s. Predictions are tree means.
#[derive(Clone, Debug)]
pub struct Forest {
    trees: Vec<Tree>,
    n_features: usize,
}

/// Out-of-bag mean predictions; `None` for rows that were in every bag.
pub type OobPredictions = Vec<Option<f64>>;

impl Forest {
    pub fn fit(x: ArrayView2<f64>, y: &[f64], params: &ForestParams, seed: u64) -> Forest {
        Self::fit_inner(&Columns::from_view(x), y, params, seed, false).0
    }

    pub fn fit_columns(cols: &Columns, y: &[f64], params: &ForestParams, seed: u64) -> Forest {
        Self::fit_inner(cols, y, params, seed, false).0
    }

    /// Fits and also returns out-of-bag predictions (bootstrap forests only;
    /// without bootstrap every row is in-bag and all entries are `None`).
    pub fn fit_with_oob(cols: &Columns, y: &[f64], params: &ForestParams, seed: u64) -> (Forest, OobPredictions) {
        let (forest, oob) = Self::fit_inner(cols, y, params, seed, true);
        (forest, oob.unwrap_or_default())
    }

    fn fit_inner(
        cols: &Columns,
        y: &[f64],
        params: &ForestParams,
        seed: u64,
        want_oob: bool,
    ) -> (Forest, Option<OobPredictions>) {
        let n = y.len();
        let fitted: Vec<(Tree, Option<Vec<u32>>)> = (0..params.n_trees.max(1))
            .into_par_iter()
            .map(|t| {
                let mut rng = rng_from_seed(derive_seed(seed, t as u64));
                let counts = if params.bootstrap {
                    let mut c = vec![0u32; n];
                    for _ in 0..n {
                        c[rng.random_range(0..n)] += 1;
                    }
                    c
                } else {
                    vec![1u32; n]
                };
                let w: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
                let tree = Tree::fit(cols, y, &w, &params.tree, &mut rng);
                (tree, (want_oob && params.bootstrap).then_some(counts))
            })
            .collect();

        let oob = want_oob.then(|| {
            let mut sum = vec![0.0; n];
            let mut hits = vec![0usize; n];
            for (tree, counts) in &fitted {
                if let Some(counts) = counts {
                    for i in 0..n {
                        if counts[i] == 0 {
                            sum[i] += tree.predict_columns(cols, i);
                            hits[i] += 1;
                        }
                    }
                }
            }
            (0..n).map(|i| (hits[i] > 0).then(|| sum[i] / hits[i] as f64)).collect()
        });
        let trees = fitted.into_iter().map(|(t, _)| t).collect();
        (Forest { trees, n_features: cols.n_cols() }, oob)
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn predict(&self, x: &ArrayView2<f64>) -> Vec<f64> {
        let k = self.trees.len() as f64;
        (0..x.nrows())
            .map(|i| self.trees.iter().map(|t| t.predict_row(x, i)).sum::<f64>() / k)
            .collect()
    }
}

/// Regression forest used as the surrogate model of BO and EBO.
#[derive(Clone, Debug)]
pub struct RegressionForest {
    forest: Forest,
    seed: u64,
}

impl RegressionForest {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_trees(&self) -> usize {
        self.forest.n_trees()
    }

    pub fn predict(&self, x: &ArrayView2<f64>) -> Vec<f64> {
        self.forest.predict(x)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RegressorError {
    #[error("regression needs at least one instance")]
    Empty,
    #[error("{rows} rows but {targets} targets")]
    LengthMismatch { rows: usize, targets: usize },
}

pub fn fit_regressor(
    x: ArrayView2<f64>,
    targets: &[f64],
    params: &ForestParams,
    seed: u64,
) -> Result<RegressionForest, RegressorError> {
    if x.nrows() != targets.len() {
        return Err(RegressorError::LengthMismatch { rows: x.nrows(), targets: targets.len() });
    }
    if targets.is_empty() {
        return Err(RegressorError::Empty);
    }
    Ok(RegressionForest { forest: Forest::fit(x, targets, params, seed), seed })
}
