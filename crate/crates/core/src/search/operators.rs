use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::config::CandidateConfig;
use crate::rng::Rng;
use crate::space::SearchSpace;

/// Settings shared by GA and EBO.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneticParams {
    pub crossover_prob: f64,
    pub gene_crossover_prob: f64,
    pub mutation_prob: f64,
    pub tournament_size: usize,
}

impl Default for GeneticParams {
    fn default() -> Self {
        GeneticParams { crossover_prob: 0.9, gene_crossover_prob: 0.5, mutation_prob: 0.1, tournament_size: 2 }
    }
}

impl GeneticParams {
    pub fn check(&self) -> Result<(), String> {
        for (name, p) in [
            ("crossover_prob", self.crossover_prob),
            ("gene_crossover_prob", self.gene_crossover_prob),
            ("mutation_prob", self.mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if self.tournament_size == 0 {
            return Err("tournament_size must be at least 1".into());
        }
        Ok(())
    }
}

fn coin(rng: &mut Rng, p: f64) -> bool {
    p >= 1.0 || (p > 0.0 && rng.random::<f64>() < p)
}

/// Uniform crossover: with probability `crossover_prob` each active gene is
/// swapped between the children with probability `gene_crossover_prob`.
pub fn uniform_crossover(
    a: &CandidateConfig,
    b: &CandidateConfig,
    space: &SearchSpace,
    params: &GeneticParams,
    rng: &mut Rng,
) -> (CandidateConfig, CandidateConfig) {
    let (mut c, mut d) = (a.clone(), b.clone());
    if coin(rng, params.crossover_prob) {
        for &g in space.genes() {
            if coin(rng, params.gene_crossover_prob) {
                CandidateConfig::swap_gene(&mut c, &mut d, g);
            }
        }
    }
    (c, d)
}

/// Each active gene is resampled uniformly with probability `mutation_prob`.
pub fn mutate(config: &CandidateConfig, space: &SearchSpace, params: &GeneticParams, rng: &mut Rng) -> CandidateConfig {
    let mut out = config.clone();
    for &g in space.genes() {
        if coin(rng, params.mutation_prob) {
            let idx = rng.random_range(0..space.cardinality(g));
            out.set(g, space.value_at(g, idx));
        }
    }
    out
}

/// Resamples exactly one uniformly chosen gene.
pub fn point_mutation(config: &CandidateConfig, space: &SearchSpace, rng: &mut Rng) -> CandidateConfig {
    let genes = space.genes();
    let g = genes[rng.random_range(0..genes.len())];
    let mut out = config.clone();
    let idx = rng.random_range(0..space.cardinality(g));
    out.set(g, space.value_at(g, idx));
    out
}

/// Index of the tournament winner: `size` entrants drawn with replacement,
/// highest score wins, ties go to the lowest pool index.
pub fn tournament_select(scores: &[f64], size: usize, rng: &mut Rng) -> usize {
    assert!(!scores.is_empty(), "tournament over an empty pool");
    let mut best = rng.random_range(0..scores.len());
    for _ in 1..size.max(1) {
        let i = rng.random_range(0..scores.len());
        if scores[i] > scores[best] || (scores[i] == scores[best] && i < best) {
            best = i;
        }
    }
    best
}

/// Shuffled sequential pairing followed by crossover; an odd leftover passes
/// through unchanged. Output order is the shuffled order.
pub fn pair_and_cross(
    pool: Vec<CandidateConfig>,
    space: &SearchSpace,
    params: &GeneticParams,
    rng: &mut Rng,
) -> Vec<CandidateConfig> {
    use rand::seq::SliceRandom;
    let mut pool = pool;
    pool.shuffle(rng);
    let mut out = Vec::with_capacity(pool.len());
    let mut it = pool.chunks(2);
    for pair in &mut it {
        match pair {
            [a, b] => {
                let (c, d) = uniform_crossover(a, b, space, params, rng);
                out.push(c);
                out.push(d);
            }
            [a] => out.push(a.clone()),
            _ => unreachable!(),
        }
    }
    out
}
