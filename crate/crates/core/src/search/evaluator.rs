use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::CandidateConfig;

/// The expensive fitness function; errors are scored 0 and recorded.
pub type Objective<'a> = dyn Fn(&CandidateConfig) -> Result<f64, String> + Sync + 'a;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedConfig {
    pub config: CandidateConfig,
    pub score: f64,
    /// Generation / iteration that first evaluated it (0 = initial sample).
    pub iteration: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub proposed: Vec<CandidateConfig>,
    /// Surrogate predictions for `proposed` (BO / EBO only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub surrogate_scores: Vec<f64>,
    pub objective_scores: Vec<f64>,
    pub best_so_far: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub records: Vec<IterationRecord>,
    pub evaluations: usize,
    pub cache_hits: usize,
    pub errors: Vec<(CandidateConfig, String)>,
}

/// Memoising front-end to the objective.
///
/// Within a batch, new configs are evaluated concurrently; results are keyed
/// by config and inserted in batch order, so completion order never matters.
pub struct Evaluator<'a> {
    objective: &'a Objective<'a>,
    memo: HashMap<CandidateConfig, f64>,
    history: Vec<EvaluatedConfig>,
    pub trace: SearchTrace,
    best: Option<usize>,
    parallel: bool,
}

impl<'a> Evaluator<'a> {
    pub fn new(objective: &'a Objective<'a>) -> Self {
        Evaluator { objective, memo: HashMap::new(), history: Vec::new(), trace: SearchTrace::default(), best: None, parallel: true }
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }

    pub fn is_evaluated(&self, c: &CandidateConfig) -> bool {
        self.memo.contains_key(c)
    }

    pub fn score(&self, c: &CandidateConfig) -> Option<f64> {
        self.memo.get(c).copied()
    }

    /// Every distinct config evaluated so far, in evaluation order.
    pub fn history(&self) -> &[EvaluatedConfig] {
        &self.history
    }

    pub fn best(&self) -> Option<&EvaluatedConfig> {
        self.best.map(|i| &self.history[i])
    }

    pub fn best_score(&self) -> f64 {
        self.best().map_or(f64::NEG_INFINITY, |b| b.score)
    }

    /// Scores for `configs`, evaluating each distinct unseen config once.
    pub fn evaluate_batch(&mut self, configs: &[CandidateConfig], iteration: usize) -> Vec<f64> {
        let mut fresh: Vec<&CandidateConfig> = Vec::new();
        let mut seen = HashSet::new();
        for c in configs {
            if self.memo.contains_key(c) || !seen.insert(c) {
                self.trace.cache_hits += 1;
            } else {
                fresh.push(c);
            }
        }
        let objective = self.objective;
        let results: Vec<Result<f64, String>> = if self.parallel && fresh.len() > 1 {
            fresh.par_iter().map(|c| objective(c)).collect()
        } else {
            fresh.iter().map(|c| objective(c)).collect()
        };
        for (c, r) in fresh.into_iter().zip(results) {
            let score = match r {
                Ok(s) if s.is_finite() => s,
                Ok(s) => {
                    self.trace.errors.push((c.clone(), format!("non-finite score {s}")));
                    0.0
                }
                Err(e) => {
                    self.trace.errors.push((c.clone(), e));
                    0.0
                }
            };
            self.trace.evaluations += 1;
            self.memo.insert(c.clone(), score);
            self.history.push(EvaluatedConfig { config: c.clone(), score, iteration });
            if self.best.is_none_or(|b| score > self.history[b].score) {
                self.best = Some(self.history.len() - 1);
            }
        }
        configs.iter().map(|c| self.memo[c]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::registry;
    use crate::config::random_config;
    use crate::rng::rng_from_seed;
    use crate::space::SearchSpace;

    #[test]
    fn memoises_and_counts() {
        let space = SearchSpace::base(registry());
        let mut rng = rng_from_seed(0);
        let a = random_config(&space, &mut rng);
        let b = random_config(&space, &mut rng);
        let f = |c: &CandidateConfig| {
            if c.flag_1b {
                Err("boom".to_string())
            } else {
                Ok(c.iteration_count_1a as f64)
            }
        };
        let mut ev = Evaluator::new(&f);
        let s = ev.evaluate_batch(&[a.clone(), a.clone(), b.clone()], 0);
        assert_eq!(ev.trace.evaluations, 2);
        assert_eq!(ev.trace.cache_hits, 1);
        assert_eq!(s[0], s[1]);
        ev.evaluate_batch(&[b], 1);
        assert_eq!(ev.trace.evaluations, 2);
        assert_eq!(ev.trace.cache_hits, 2);
        let n_err = [&a].iter().filter(|c| c.flag_1b).count() + usize::from(ev.history()[1].config.flag_1b);
        assert_eq!(ev.trace.errors.len(), n_err);
    }
}
