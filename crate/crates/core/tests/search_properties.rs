use autopu::classifiers::registry;
use autopu::search::{
    encode_config, decode_classifiers, run_bo, run_ebo, run_ga, BoParams, EboParams, GaParams, SearchTrace,
};
use autopu::{validate_config, CandidateConfig, ClassifierKey, Fraction, SearchSpace};

fn small_space() -> SearchSpace {
    let mut s = SearchSpace::base(vec![ClassifierKey::new("gaussian_nb"), ClassifierKey::new("lda")]);
    s.iteration_counts = vec![1, 4, 7];
    s.thresholds_1a = [10, 25, 50].map(Fraction::from_hundredths).to_vec();
    s.thresholds_1b = s.thresholds_1a.clone();
    s
}

fn all_valid(trace: &SearchTrace, space: &SearchSpace) -> bool {
    trace.records.iter().flat_map(|r| &r.proposed).all(|c| validate_config(c, space).is_ok())
}

#[test]
fn ga_population_best_never_drops() {
    let space = SearchSpace::extended(registry());
    let f = |c: &CandidateConfig| Ok(c.threshold_1a.as_f64() * c.iteration_count_1a as f64 + c.spy_rate.as_f64());
    let params = GaParams { population_size: 12, generations: 8, ..GaParams::default() };
    for seed in 0..20 {
        let (_, trace) = run_ga(&space, &f, &params, seed).unwrap();
        let bests: Vec<f64> =
            trace.records.iter().map(|r| r.objective_scores.iter().cloned().fold(f64::MIN, f64::max)).collect();
        assert!(bests.windows(2).all(|w| w[1] >= w[0]), "seed {seed}: {bests:?}");
        assert!(trace.records.windows(2).all(|w| w[1].best_so_far >= w[0].best_so_far));
        assert!(all_valid(&trace, &space));
    }
}

#[test]
fn ga_finds_iteration_count_seven() {
    let space = small_space();
    let f = |c: &CandidateConfig| Ok(if c.iteration_count_1a == 7 { 1.0 } else { 0.0 });
    for seed in 0..10 {
        let (best, _) = run_ga(&space, &f, &GaParams { population_size: 20, generations: 10, ..GaParams::default() }, seed).unwrap();
        assert_eq!(best.config.iteration_count_1a, 7);
    }
}

#[test]
fn bo_surrogate_steers_towards_high_thresholds() {
    let space = SearchSpace::base(registry());
    let f = |c: &CandidateConfig| Ok(c.threshold_1a.as_f64());
    let p = BoParams { it_count: 10, n_configs: 30, surrogate_trees: 30 };
    let mut proposed = 0.0;
    let mut initial = 0.0;
    for seed in 0..5 {
        let (_, trace) = run_bo(&space, &f, &p, seed).unwrap();
        let init = &trace.records[0].proposed;
        initial += init.iter().map(|c| c.threshold_1a.as_f64()).sum::<f64>() / init.len() as f64;
        let later: Vec<f64> = trace.records[1..].iter().map(|r| r.proposed[0].threshold_1a.as_f64()).collect();
        proposed += later.iter().sum::<f64>() / later.len() as f64;
        assert!(all_valid(&trace, &space));
    }
    assert!(proposed > initial, "{proposed} vs {initial}");
}

#[test]
fn optimisers_are_deterministic() {
    let space = SearchSpace::extended(registry());
    let f = |c: &CandidateConfig| Ok(c.threshold_1b.as_f64() - c.spy_tolerance.as_f64());
    let bo = BoParams { it_count: 3, n_configs: 10, surrogate_trees: 10 };
    let ebo = EboParams { it_count: 3, n_configs: 10, k: 2, surrogate_trees: 10, ..EboParams::default() };
    assert_eq!(run_bo(&space, &f, &bo, 9).unwrap(), run_bo(&space, &f, &bo, 9).unwrap());
    assert_eq!(run_ebo(&space, &f, &ebo, 9).unwrap(), run_ebo(&space, &f, &ebo, 9).unwrap());
    let (_, trace) = run_ebo(&space, &f, &ebo, 9).unwrap();
    assert!(all_valid(&trace, &space));
}

#[test]
fn ebo_proposals_are_fresh() {
    let space = small_space();
    let f = |c: &CandidateConfig| Ok(c.threshold_1a.as_f64());
    let p = EboParams { it_count: 10, n_configs: 20, k: 4, surrogate_trees: 10, ..EboParams::default() };
    let (_, trace) = run_ebo(&space, &f, &p, 1).unwrap();
    assert_eq!(trace.evaluations, 20 + 10 * 5);
    let mut seen = std::collections::HashSet::new();
    for r in &trace.records {
        for c in &r.proposed {
            assert!(seen.insert(c.clone()), "duplicate proposal {c}");
        }
    }
}

#[test]
fn encoding_round_trips_classifiers() {
    let space = SearchSpace::extended(registry());
    let mut rng = autopu::rng::rng_from_seed(2);
    for _ in 0..100 {
        let c = autopu::random_config(&space, &mut rng);
        let keys = decode_classifiers(&encode_config(&c, &space).unwrap(), &space).unwrap();
        assert_eq!(keys, vec![c.classifier_1a.clone(), c.classifier_1b.clone(), c.classifier_2.clone()]);
    }
    let mut bad = autopu::random_config(&space, &mut rng);
    bad.classifier_2 = ClassifierKey::new("mlp");
    assert!(encode_config(&bad, &space).is_err());
}
