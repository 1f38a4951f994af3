use autopu::classifiers::registry;
use autopu::evaluation::{engineer_pu, objective};
use autopu::pu::{phase_1a, run_two_step, spy_threshold, NativeFitter};
use autopu::synthetic::gaussian_blobs;
use autopu::{CandidateConfig, Fraction, PuDataset};
use proptest::prelude::*;

fn pu(seed: u64) -> PuDataset {
    engineer_pu(&gaussian_blobs(120, 4, 0.4, 3.0, 4, seed), 0.4, seed).unwrap()
}

fn config(n: u32, t: u16, key: &str) -> CandidateConfig {
    CandidateConfig::base(n, Fraction::from_hundredths(t), key, Fraction::from_hundredths(20), key, false, key)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn higher_threshold_never_shrinks_rn(seed in 0u64..1000, n in 1u32..5, lo in 1u16..25, step in 1u16..25, k in 0usize..16) {
        let data = pu(seed % 7);
        let keys = registry();
        let key = keys[k].as_str();
        let x = data.features();
        let (p, u) = (data.labelled_indices(), data.unlabelled_indices());
        let a = phase_1a(x, &p, &u, &config(n, lo, key), &NativeFitter, seed).unwrap();
        let b = phase_1a(x, &p, &u, &config(n, lo + step, key), &NativeFitter, seed).unwrap();
        let big: std::collections::HashSet<_> = b.rn.indices().iter().collect();
        prop_assert!(a.rn.indices().iter().all(|i| big.contains(i)));
    }

    #[test]
    fn spy_threshold_respects_tolerance(probs in prop::collection::vec(0.0f64..1.0, 1..40), tol in 0u16..=20) {
        let tol = tol as f64 / 100.0;
        let t = spy_threshold(&probs, tol);
        let below = probs.iter().filter(|&&p| p < t).count();
        prop_assert!(below as f64 <= tol * probs.len() as f64 + 1e-9);
    }
}

#[test]
fn hidden_labels_never_reach_the_learner() {
    let data = pu(3);
    // Flip the hidden class of every unlabelled instance; labelled ones must stay positive.
    let scrambled_truth: Vec<bool> = data.y_true().unwrap().iter().zip(data.s()).map(|(&y, &s)| s || !y).collect();
    let scrambled = PuDataset::new(data.features().to_owned(), data.s().to_vec(), Some(scrambled_truth)).unwrap();
    let c = config(3, 30, "random_forest");
    assert_eq!(objective(&c, &data, 5).unwrap(), objective(&c, &scrambled, 5).unwrap());
    let a = run_two_step(&c, &data, &NativeFitter, 5);
    let b = run_two_step(&c, &scrambled, &NativeFitter, 5);
    assert_eq!(a.rn, b.rn);
    assert_eq!(a.predict_proba(data.features()).unwrap(), b.predict_proba(data.features()).unwrap());
}

#[test]
fn two_step_is_deterministic_and_rn_comes_from_u() {
    let data = pu(4);
    for key in registry() {
        let c = config(2, 40, key.as_str());
        let a = run_two_step(&c, &data, &NativeFitter, 11);
        let b = run_two_step(&c, &data, &NativeFitter, 11);
        assert_eq!(a.predict_proba(data.features()).unwrap(), b.predict_proba(data.features()).unwrap(), "{key}");
        assert!(a.rn.indices().iter().all(|&i| !data.s()[i]));
    }
}
