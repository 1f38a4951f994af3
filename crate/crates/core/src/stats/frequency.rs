use serde::{Deserialize, Serialize};

use crate::config::CandidateConfig;
use crate::evaluation::nested::RunResult;
use crate::space::{Gene, SearchSpace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneFrequency {
    pub hyperparameter: String,
    /// Selection count of every candidate value, in candidate-list order.
    pub counts: Vec<(String, usize)>,
    pub n_selected: usize,
    pub most_selected: String,
    /// Share of selections taken by `most_selected`, in [0, 1].
    pub frequency: f64,
    /// `1 / |candidate list|`.
    pub baseline: f64,
    pub difference: f64,
}

/// Best configs of every non-failed fold of `results`.
pub fn selected_configs(results: &[RunResult]) -> Vec<CandidateConfig> {
    results.iter().flat_map(|r| r.folds.iter().filter(|f| !f.failed).filter_map(|f| f.best_config.clone())).collect()
}

/// How often each candidate value was chosen, per hyperparameter.
///
/// Spy rate and tolerance only count configs whose spy flag is set, since
/// their values are inert otherwise. Hyperparameters with no selections are
/// omitted.
pub fn selection_frequency(configs: &[CandidateConfig], space: &SearchSpace) -> Vec<GeneFrequency> {
    let mut out = Vec::new();
    for &g in space.genes() {
        let card = space.cardinality(g);
        let mut counts = vec![0usize; card];
        let relevant = configs.iter().filter(|c| !matches!(g, Gene::SpyRate | Gene::SpyTolerance) || c.spy_flag);
        for c in relevant {
            if let Some(i) = space.index_of(g, &c.get(g)) {
                counts[i] += 1;
            }
        }
        let n: usize = counts.iter().sum();
        if n == 0 {
            continue;
        }
        let best = (0..card).fold(0, |b, i| if counts[i] > counts[b] { i } else { b });
        let frequency = counts[best] as f64 / n as f64;
        let baseline = 1.0 / card as f64;
        out.push(GeneFrequency {
            hyperparameter: g.name().to_string(),
            counts: (0..card).map(|i| (space.value_at(g, i).to_string(), counts[i])).collect(),
            n_selected: n,
            most_selected: space.value_at(g, best).to_string(),
            frequency,
            baseline,
            difference: frequency - baseline,
        });
    }
    out
}
