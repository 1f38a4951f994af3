use std::collections::HashSet;

use super::evaluator::{EvaluatedConfig, Evaluator, IterationRecord, Objective, SearchTrace};
use super::operators::{mutate, pair_and_cross, point_mutation, tournament_select};
use super::{distinct_sample, ranked, EboParams, SearchError, Surrogate};
use crate::config::{random_config, CandidateConfig};
use crate::rng::{derive_tagged, rng_from_seed, Rng};
use crate::space::SearchSpace;

const REPAIR_MUTATIONS: usize = 100;
const REPAIR_DRAWS: usize = 1000;

/// Turns `c` into a config outside `taken` by point mutations, then random
/// draws. Returns `c` unchanged if both fail.
fn repair(c: CandidateConfig, taken: &dyn Fn(&CandidateConfig) -> bool, space: &SearchSpace, rng: &mut Rng) -> CandidateConfig {
    if !taken(&c) {
        return c;
    }
    let mut cur = c.clone();
    for _ in 0..REPAIR_MUTATIONS {
        cur = point_mutation(&cur, space, rng);
        if !taken(&cur) {
            return cur;
        }
    }
    for _ in 0..REPAIR_DRAWS {
        let r = random_config(space, rng);
        if !taken(&r) {
            return r;
        }
    }
    c
}

/// Evolutionary Bayesian optimisation.
///
/// Each iteration breeds offspring from the whole evaluated pool, keeps the
/// surrogate's favourite, and breeds `k` more from tournament winners on
/// surrogate scores. The `k + 1` configs are evaluated together, so the
/// budget is `n_configs + it_count * (k + 1)`.
pub fn run_ebo(
    space: &SearchSpace,
    objective: &Objective,
    params: &EboParams,
    seed: u64,
) -> Result<(EvaluatedConfig, SearchTrace), SearchError> {
    params.check()?;
    let genetic = params.genetic();
    let g = &genetic;
    let mut rng = rng_from_seed(derive_tagged(seed, "ebo", 0));
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
        let pool: Vec<CandidateConfig> = ev.history().iter().map(|e| e.config.clone()).collect();
        let offspring: Vec<CandidateConfig> =
            pair_and_cross(pool, space, g, &mut rng).iter().map(|c| mutate(c, space, g, &mut rng)).collect();
        let preds = surrogate.predict(&offspring, space)?;

        let mut batch: Vec<CandidateConfig> = Vec::with_capacity(params.k + 1);
        match ranked(&preds).into_iter().find(|&i| !ev.is_evaluated(&offspring[i])) {
            Some(i) => batch.push(offspring[i].clone()),
            None => {
                ev.trace.cache_hits += 1;
                let top = offspring[ranked(&preds)[0]].clone();
                batch.push(repair(top, &|c| ev.is_evaluated(c), space, &mut rng));
            }
        }
        if params.k > 0 {
            let winners: Vec<CandidateConfig> =
                (0..params.k).map(|_| offspring[tournament_select(&preds, g.tournament_size, &mut rng)].clone()).collect();
            for c in pair_and_cross(winners, space, g, &mut rng) {
                let c = mutate(&c, space, g, &mut rng);
                let chosen: HashSet<CandidateConfig> = batch.iter().cloned().collect();
                batch.push(repair(c, &|x| ev.is_evaluated(x) || chosen.contains(x), space, &mut rng));
            }
        }
        let surrogate_scores = surrogate.predict(&batch, space)?;
        let scores = ev.evaluate_batch(&batch, it);
        ev.trace.records.push(IterationRecord {
            iteration: it,
            proposed: batch,
            surrogate_scores,
            objective_scores: scores,
            best_so_far: ev.best_score(),
        });
    }
    let best = ev.best().cloned().ok_or(SearchError::NoEvaluations)?;
    Ok((best, ev.trace))
}
