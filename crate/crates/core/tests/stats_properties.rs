use autopu::stats::{holm, pearson, wilcoxon_exact, wilcoxon_normal, average_ranks_of};
use proptest::prelude::*;

/// Two-sided p by listing all 2^n sign assignments of the observed ranks.
fn enumeration_oracle(diffs: &[f64]) -> f64 {
    let d: Vec<f64> = diffs.iter().copied().filter(|v| *v != 0.0).collect();
    let n = d.len();
    let mut abs: Vec<(f64, usize)> = d.iter().map(|v| v.abs()).zip(0..).collect();
    abs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && abs[j + 1].0 == abs[i].0 {
            j += 1;
        }
        for item in &abs[i..=j] {
            ranks[item.1] = (i + j) as f64 / 2.0 + 1.0;
        }
        i = j + 1;
    }
    let observed: f64 = (0..n).filter(|&k| d[k] > 0.0).map(|k| ranks[k]).sum();
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|&k| mask >> k & 1 == 1).map(|k| ranks[k]).sum();
        if w <= observed + 1e-9 {
            le += 1;
        }
        if w >= observed - 1e-9 {
            ge += 1;
        }
    }
    let total = (1u64 << n) as f64;
    (2.0 * (le.min(ge) as f64) / total).min(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exact_path_matches_enumeration(d in prop::collection::vec(-5i32..=5, 1..=12)) {
        let d: Vec<f64> = d.into_iter().map(f64::from).collect();
        if d.iter().any(|v| *v != 0.0) {
            let p = wilcoxon_exact(&d).p_value;
            prop_assert!((p - enumeration_oracle(&d)).abs() < 1e-12);
        }
    }

    #[test]
    fn holm_ignores_input_order(mut p in prop::collection::vec(0.0f64..0.2, 1..8), rot in 0usize..8) {
        let a = holm(&p, 0.05).unwrap();
        let rot = rot % p.len();
        p.rotate_left(rot);
        let b = holm(&p, 0.05).unwrap();
        let mut da = a.decisions();
        da.rotate_left(rot);
        prop_assert_eq!(da, b.decisions());
    }

    #[test]
    fn pearson_affine_invariance(x in prop::collection::vec(-10.0f64..10.0, 3..20), s in 0.1f64..5.0, c in -5.0f64..5.0) {
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| v * v + i as f64).collect();
        if let Ok(r) = pearson(&x, &y) {
            let x2: Vec<f64> = x.iter().map(|v| s * v + c).collect();
            prop_assert!((pearson(&x2, &y).unwrap() - r).abs() < 1e-9);
        }
    }

    #[test]
    fn ranks_sum_to_three(a in prop::collection::vec(0.0f64..1.0, 1..30)) {
        let b: Vec<f64> = a.iter().rev().copied().collect();
        let r = average_ranks_of(&a, &b).unwrap();
        prop_assert!((r.a + r.b - 3.0).abs() < 1e-12);
    }
}

#[test]
fn normal_path_tracks_exact_at_twenty() {
    let mut rng = autopu::rng::rng_from_seed(17);
    use rand::Rng as _;
    for _ in 0..50 {
        let d: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0) + 0.2).collect();
        let (e, n) = (wilcoxon_exact(&d).p_value, wilcoxon_normal(&d).p_value);
        assert!((e - n).abs() < 0.01, "{e} vs {n}");
    }
}
