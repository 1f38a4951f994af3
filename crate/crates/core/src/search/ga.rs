use super::evaluator::{EvaluatedConfig, Evaluator, IterationRecord, Objective, SearchTrace};
use super::operators::{mutate, pair_and_cross, tournament_select};
use super::{GaParams, SearchError};
use crate::config::random_config;
use crate::rng::{derive_tagged, rng_from_seed};
use crate::space::SearchSpace;

/// Genetic algorithm with elitism and memoised fitness.
///
/// Each generation keeps the fittest individual and fills the rest of the
/// population with `population_size - 1` tournament winners after crossover
/// and mutation. The final population is evaluated too, so at most
/// `population_size * (generations + 1)` objective calls are made.
pub fn run_ga(
    space: &SearchSpace,
    objective: &Objective,
    params: &GaParams,
    seed: u64,
) -> Result<(EvaluatedConfig, SearchTrace), SearchError> {
    params.check()?;
    let genetic = params.genetic();
    let mut rng = rng_from_seed(derive_tagged(seed, "ga", 0));
    let mut ev = Evaluator::new(objective);
    let mut population: Vec<_> = (0..params.population_size).map(|_| random_config(space, &mut rng)).collect();
    for generation in 0..=params.generations {
        let scores = ev.evaluate_batch(&population, generation);
        ev.trace.records.push(IterationRecord {
            iteration: generation,
            proposed: population.clone(),
            surrogate_scores: Vec::new(),
            objective_scores: scores.clone(),
            best_so_far: ev.best_score(),
        });
        if generation == params.generations {
            break;
        }
        let elite = super::ranked(&scores)[0];
        let selected: Vec<_> = (0..params.population_size - 1)
            .map(|_| population[tournament_select(&scores, genetic.tournament_size, &mut rng)].clone())
            .collect();
        let mut next: Vec<_> = pair_and_cross(selected, space, &genetic, &mut rng)
            .iter()
            .map(|c| mutate(c, space, &genetic, &mut rng))
            .collect();
        next.push(population[elite].clone());
        population = next;
    }
    let best = ev.best().cloned().ok_or(SearchError::NoEvaluations)?;
    Ok((best, ev.trace))
}
