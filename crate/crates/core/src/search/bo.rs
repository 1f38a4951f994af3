use super::evaluator::{EvaluatedConfig, Evaluator, IterationRecord, Objective, SearchTrace};
use super::{distinct_sample, ranked, BoParams, SearchError, Surrogate};
use crate::config::random_config;
use crate::rng::{derive_tagged, rng_from_seed};
use crate::space::SearchSpace;

/// Extra random draws tried when every surrogate candidate is a duplicate.
const NOVELTY_DRAWS: usize = 1000;

/// Bayesian optimisation with a random-forest surrogate and predicted value
/// as the acquisition function.
///
/// Each iteration scores `n_configs` fresh random configs with the surrogate
/// and evaluates the best one that has not been evaluated before.
pub fn run_bo(
    space: &SearchSpace,
    objective: &Objective,
    params: &BoParams,
    seed: u64,
) -> Result<(EvaluatedConfig, SearchTrace), SearchError> {
    params.check()?;
    let mut rng = rng_from_seed(derive_tagged(seed, "bo", 0));
    let mut ev = Evaluator::new(objective);
    let initial = distinct_sample(space, params.n_configs, &mut rng);
    let scores = ev.evaluate_batch(&initial, 0);
    ev.trace.records.push(IterationRecord {
        iteration: 0,
        proposed: initial,
        surrogate_scores: Vec::new(),
        objective_scores: scores,
        best_so_far: ev.best_score(),
    });
    for it in 1..=params.it_count {
        let surrogate = Surrogate::fit(ev.history(), space, params.surrogate_trees, derive_tagged(seed, "surrogate", it as u64))?;
        let candidates: Vec<_> = (0..params.n_configs).map(|_| random_config(space, &mut rng)).collect();
        let preds = surrogate.predict(&candidates, space)?;
        let mut choice = None;
        for i in ranked(&preds) {
            if !ev.is_evaluated(&candidates[i]) {
                choice = Some((candidates[i].clone(), preds[i]));
                break;
            }
            ev.trace.cache_hits += 1;
        }
        if choice.is_none() {
            for _ in 0..NOVELTY_DRAWS {
                let c = random_config(space, &mut rng);
                if !ev.is_evaluated(&c) {
                    let p = surrogate.predict(std::slice::from_ref(&c), space)?[0];
                    choice = Some((c, p));
                    break;
                }
            }
        }
        // An exhausted space leaves only duplicates; the cached best is reused.
        let (config, pred) = choice.unwrap_or_else(|| (candidates[ranked(&preds)[0]].clone(), preds[ranked(&preds)[0]]));
        let scores = ev.evaluate_batch(std::slice::from_ref(&config), it);
        ev.trace.records.push(IterationRecord {
            iteration: it,
            proposed: vec![config],
            surrogate_scores: vec![pred],
            objective_scores: scores,
            best_so_far: ev.best_score(),
        });
    }
    let best = ev.best().cloned().ok_or(SearchError::NoEvaluations)?;
    Ok((best, ev.trace))
}
