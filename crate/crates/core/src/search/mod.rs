//! The GA, BO and EBO optimisers over a [`SearchSpace`].

pub mod bo;
pub mod ebo;
pub mod encoding;
pub mod evaluator;
pub mod ga;
pub mod operators;

use std::collections::BTreeMap;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::classifiers::ForestParams;
use crate::config::{random_config, CandidateConfig};
use crate::data::PuDataset;
use crate::evaluation::nested::{Selection, System};
use crate::evaluation::objective::objective;
use crate::rng::{derive_tagged, Rng};
use crate::space::{SearchSpace, SpaceVariant};

pub use bo::run_bo;
pub use ebo::run_ebo;
pub use encoding::{decode_classifiers, encode_all, encode_config, EncodeError, EncodedConfig, EncodingLayout};
pub use evaluator::{EvaluatedConfig, Evaluator, IterationRecord, Objective, SearchTrace};
pub use ga::run_ga;
pub use operators::{mutate, pair_and_cross, point_mutation, tournament_select, uniform_crossover, GeneticParams};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("the objective produced no evaluations")]
    NoEvaluations,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaParams {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub gene_crossover_prob: f64,
    pub mutation_prob: f64,
    pub tournament_size: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        let g = GeneticParams::default();
        GaParams {
            population_size: 101,
            generations: 50,
            crossover_prob: g.crossover_prob,
            gene_crossover_prob: g.gene_crossover_prob,
            mutation_prob: g.mutation_prob,
            tournament_size: g.tournament_size,
        }
    }
}

impl GaParams {
    pub fn genetic(&self) -> GeneticParams {
        GeneticParams {
            crossover_prob: self.crossover_prob,
            gene_crossover_prob: self.gene_crossover_prob,
            mutation_prob: self.mutation_prob,
            tournament_size: self.tournament_size,
        }
    }

    pub fn check(&self) -> Result<(), SearchError> {
        if self.population_size < 2 {
            return Err(SearchError::Params("population_size must be at least 2".into()));
        }
        self.genetic().check().map_err(SearchError::Params)
    }

    /// Worst-case number of objective evaluations.
    pub fn max_evaluations(&self) -> usize {
        self.population_size * (self.generations + 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoParams {
    pub it_count: usize,
    pub n_configs: usize,
    pub surrogate_trees: usize,
}

impl Default for BoParams {
    fn default() -> Self {
        BoParams { it_count: 50, n_configs: 101, surrogate_trees: 100 }
    }
}

impl BoParams {
    pub fn check(&self) -> Result<(), SearchError> {
        if self.n_configs < 2 {
            return Err(SearchError::Params("n_configs must be at least 2".into()));
        }
        if self.surrogate_trees == 0 {
            return Err(SearchError::Params("surrogate_trees must be at least 1".into()));
        }
        Ok(())
    }

    pub fn evaluations(&self) -> usize {
        self.n_configs + self.it_count
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EboParams {
    pub it_count: usize,
    pub n_configs: usize,
    pub k: usize,
    pub surrogate_trees: usize,
    pub crossover_prob: f64,
    pub gene_crossover_prob: f64,
    pub mutation_prob: f64,
    pub tournament_size: usize,
}

impl Default for EboParams {
    fn default() -> Self {
        let g = GeneticParams::default();
        EboParams {
            it_count: 50,
            n_configs: 101,
            k: 10,
            surrogate_trees: 100,
            crossover_prob: g.crossover_prob,
            gene_crossover_prob: g.gene_crossover_prob,
            mutation_prob: g.mutation_prob,
            tournament_size: g.tournament_size,
        }
    }
}

impl EboParams {
    pub fn genetic(&self) -> GeneticParams {
        GeneticParams {
            crossover_prob: self.crossover_prob,
            gene_crossover_prob: self.gene_crossover_prob,
            mutation_prob: self.mutation_prob,
            tournament_size: self.tournament_size,
        }
    }

    pub fn check(&self) -> Result<(), SearchError> {
        if self.n_configs < 2 {
            return Err(SearchError::Params("n_configs must be at least 2".into()));
        }
        if self.k + 1 > self.n_configs {
            return Err(SearchError::Params(format!("k + 1 = {} exceeds n_configs = {}", self.k + 1, self.n_configs)));
        }
        if self.surrogate_trees == 0 {
            return Err(SearchError::Params("surrogate_trees must be at least 1".into()));
        }
        self.genetic().check().map_err(SearchError::Params)
    }

    pub fn evaluations(&self) -> usize {
        self.n_configs + self.it_count * (self.k + 1)
    }
}

/// Surrogate: a regression forest on config encodings.
pub(crate) struct Surrogate {
    forest: crate::classifiers::RegressionForest,
}

impl Surrogate {
    pub(crate) fn fit(history: &[EvaluatedConfig], space: &SearchSpace, n_trees: usize, seed: u64) -> Result<Self, SearchError> {
        let configs: Vec<CandidateConfig> = history.iter().map(|e| e.config.clone()).collect();
        let scores: Vec<f64> = history.iter().map(|e| e.score).collect();
        let x = encode_all(&configs, space)?;
        let params = ForestParams { n_trees, ..ForestParams::surrogate() };
        let forest = crate::classifiers::fit_regressor(x.view(), &scores, &params, seed)
            .map_err(|_| SearchError::NoEvaluations)?;
        Ok(Surrogate { forest })
    }

    pub(crate) fn predict(&self, configs: &[CandidateConfig], space: &SearchSpace) -> Result<Vec<f64>, SearchError> {
        if configs.is_empty() {
            return Ok(Vec::new());
        }
        Ok(self.forest.predict(&encode_all(configs, space)?.view()))
    }
}

/// Up to `n` distinct random configs; fewer only if the space is tiny.
pub(crate) fn distinct_sample(space: &SearchSpace, n: usize, rng: &mut Rng) -> Vec<CandidateConfig> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n && attempts < 1000 * n.max(1) {
        attempts += 1;
        let c = random_config(space, rng);
        if seen.insert(c.clone()) {
            out.push(c);
        }
    }
    out
}

/// Candidate indices sorted by descending prediction, ties by index.
pub(crate) fn ranked(preds: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].total_cmp(&preds[a]).then(a.cmp(&b)));
    order
}

/// Which optimiser an [`AutoPuSystem`] runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Optimiser {
    Ga(GaParams),
    Bo(BoParams),
    Ebo(EboParams),
}

impl Optimiser {
    pub fn id(&self) -> &'static str {
        match self {
            Optimiser::Ga(_) => "ga",
            Optimiser::Bo(_) => "bo",
            Optimiser::Ebo(_) => "ebo",
        }
    }

    pub fn run(&self, space: &SearchSpace, objective: &Objective, seed: u64) -> Result<(EvaluatedConfig, SearchTrace), SearchError> {
        match self {
            Optimiser::Ga(p) => run_ga(space, objective, p, seed),
            Optimiser::Bo(p) => run_bo(space, objective, p, seed),
            Optimiser::Ebo(p) => run_ebo(space, objective, p, seed),
        }
    }
}

/// An Auto-PU system: an optimiser searching two-step pipelines with the
/// internal-CV objective.
#[derive(Clone, Debug)]
pub struct AutoPuSystem {
    pub optimiser: Optimiser,
    pub space: SearchSpace,
}

impl AutoPuSystem {
    pub fn new(optimiser: Optimiser, space: SearchSpace) -> Self {
        AutoPuSystem { optimiser, space }
    }
}

impl System for AutoPuSystem {
    fn id(&self) -> String {
        self.optimiser.id().to_string()
    }

    fn variant(&self) -> Option<String> {
        Some(match self.space.variant {
            SpaceVariant::Base => "base".into(),
            SpaceVariant::Extended => "extended".into(),
        })
    }

    fn select(&self, pu_train: &PuDataset, seed: u64) -> Result<Selection, String> {
        let inner_seed = derive_tagged(seed, "objective", 0);
        let f = |c: &CandidateConfig| objective(c, pu_train, inner_seed).map_err(|e| e.to_string());
        let (best, trace) = self.optimiser.run(&self.space, &f, derive_tagged(seed, "optimiser", 0)).map_err(|e| e.to_string())?;
        Ok(Selection {
            learner: Box::new(best.config.clone()),
            config: Some(best.config),
            hyperparameters: BTreeMap::new(),
            best_objective: best.score,
            evaluations: trace.evaluations,
            cache_hits: trace.cache_hits,
            trace: Some(trace),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_from_toml_like_json() {
        let p: EboParams = serde_json::from_str(r#"{"k": 3, "mutation_prob": 0.2}"#).unwrap();
        assert_eq!(p.k, 3);
        assert_eq!(p.mutation_prob, 0.2);
        assert_eq!(p.n_configs, 101);
        assert!(serde_json::from_str::<BoParams>(r#"{"k": 3}"#).is_err());
        assert!(serde_json::from_str::<GaParams>(r#"{"population": 3}"#).is_err());
        let o: Optimiser = serde_json::from_str(r#"{"kind": "bo", "it_count": 4}"#).unwrap();
        assert_eq!(o, Optimiser::Bo(BoParams { it_count: 4, ..BoParams::default() }));
    }

    #[test]
    fn default_budgets() {
        assert_eq!(GaParams::default().max_evaluations(), 101 * 51);
        assert_eq!(BoParams::default().evaluations(), 151);
        assert_eq!(EboParams::default().evaluations(), 651);
        assert!(EboParams { k: 101, ..EboParams::default() }.check().is_err());
        assert!(GaParams { population_size: 1, ..GaParams::default() }.check().is_err());
    }

    #[test]
    fn ranked_breaks_ties_by_index() {
        assert_eq!(ranked(&[0.2, 0.5, 0.5, 0.1]), vec![1, 2, 0, 3]);
    }
}
