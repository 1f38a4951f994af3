//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use autopu::classifiers::{fit, full_registry, registry};
use autopu::evaluation::{
    metrics, nested_cv, outer_fold_plan, ConfusionCounts, RunResult, Selection, System, OUTER_FOLDS,
};
use autopu::pu::{spy_threshold, PuLearner, PuModel, ReliableNegativeSet};
use autopu::search::{encode_config, AutoPuSystem, BoParams, EboParams, GaParams, Optimiser};
use autopu::stats::{holm, wilcoxon_exact, wilcoxon_normal, PairedSample};
use autopu::synthetic::gaussian_blobs;
use autopu::{random_config, search_space_size, CandidateConfig, ClassifierKey, Fraction, PuDataset, SearchSpace};
use autopu_cli::{cmd_run, ExperimentSpec, RunOptions};
use rand::{Rng, SeedableRng};

type Check = fn() -> Result<String, String>;

fn ensure(ok: bool, msg: String) -> Result<String, String> {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn rng(seed: u64) -> rand::rngs::StdRng {
    rand::rngs::StdRng::seed_from_u64(seed)
}

fn ac1() -> Result<String, String> {
    let base = search_space_size(&SearchSpace::base(full_registry())).map_err(|e| e.to_string())?;
    let ext = search_space_size(&SearchSpace::extended(full_registry())).map_err(|e| e.to_string())?;
    ensure(
        base == 11_664_000 && ext == 1_796_256_000 && ext % base == 0 && ext / base == 154,
        format!("base {base}, extended {ext}, ratio {}", ext as f64 / base as f64),
    )
}

fn ac2() -> Result<String, String> {
    let mut r = autopu::rng::rng_from_seed(3);
    let mut lens = Vec::new();
    for space in [SearchSpace::base(full_registry()), SearchSpace::extended(full_registry())] {
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            let c = random_config(&space, &mut r);
            seen.insert(encode_config(&c, &space).map_err(|e| e.to_string())?.values.len());
        }
        if seen.len() != 1 {
            return Err(format!("lengths vary: {seen:?}"));
        }
        lens.push(*seen.iter().next().unwrap());
    }
    ensure(lens == [58, 61], format!("base {}, extended {}", lens[0], lens[1]))
}

/// Precision, recall and F from per-instance tallies, written without the
/// library's counting code.
fn metric_oracle(pred: &[bool], truth: &[bool]) -> (f64, f64, f64) {
    let (mut tp, mut pp, mut ap) = (0.0, 0.0, 0.0);
    for i in 0..pred.len() {
        if pred[i] {
            pp += 1.0;
        }
        if truth[i] {
            ap += 1.0;
        }
        if pred[i] && truth[i] {
            tp += 1.0;
        }
    }
    let p = if pp == 0.0 { 0.0 } else { tp / pp };
    let r = if ap == 0.0 { 0.0 } else { tp / ap };
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f)
}

fn ac3() -> Result<String, String> {
    let mut r = rng(7);
    let mut worst = 0.0f64;
    let mut zero_cases = 0;
    for i in 0..10_000 {
        let n = r.random_range(0..40);
        let (pp, pt) = match i % 4 {
            0 => (0.0, r.random()),
            1 => (r.random(), 0.0),
            _ => (r.random(), r.random()),
        };
        let pred: Vec<bool> = (0..n).map(|_| r.random_bool(pp)).collect();
        let truth: Vec<bool> = (0..n).map(|_| r.random_bool(pt)).collect();
        let m = metrics(&ConfusionCounts::from_predictions(&pred, &truth));
        let (p, rc, f) = metric_oracle(&pred, &truth);
        if !pred.contains(&true) || !truth.contains(&true) {
            zero_cases += 1;
        }
        worst = worst.max((m.precision - p).abs()).max((m.recall - rc).abs()).max((m.f_measure - f).abs());
    }
    ensure(worst <= 1e-12 && zero_cases > 0, format!("max deviation {worst:e} (tol 1e-12), {zero_cases} zero-denominator cases"))
}

fn ac4() -> Result<String, String> {
    let p = wilcoxon_exact(&[1.0, 2.0, 3.0, 4.0, 5.0]).p_value;
    if (p - 0.0625).abs() > 1e-12 {
        return Err(format!("exact p {p}, expected 0.0625"));
    }
    let mut r = rng(11);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let shift: f64 = r.random_range(-0.8..0.8);
        let a: Vec<f64> = (0..20).map(|_| r.random::<f64>() + shift).collect();
        let b: Vec<f64> = (0..20).map(|_| r.random::<f64>()).collect();
        let d = PairedSample::unnamed(a, b).map_err(|e| e.to_string())?.differences();
        worst = worst.max((wilcoxon_exact(&d).p_value - wilcoxon_normal(&d).p_value).abs());
    }
    ensure(worst <= 0.01, format!("p({{1..5}}) = {p}; max |exact - normal| over 100 samples {worst:.5} (tol 0.01)"))
}

/// (δ %, system, p vs DF-PU, adjusted α, significant, p vs S-EM, adjusted α, significant)
const REFERENCE_ROWS: [(u32, &str, f64, f64, bool, f64, f64, bool); 9] = [
    (20, "GA", 1e-5, 0.025, true, 0.006, 0.05, true),
    (20, "BO", 3e-4, 0.025, true, 0.003, 0.05, true),
    (20, "EBO", 6e-5, 0.025, true, 0.002, 0.05, true),
    (40, "GA", 0.007, 0.05, true, 0.002, 0.025, true),
    (40, "BO", 0.008, 0.05, true, 0.003, 0.025, true),
    (40, "EBO", 2e-4, 0.025, true, 4e-4, 0.05, true),
    (60, "GA", 0.003, 0.025, true, 0.216, 0.05, false),
    (60, "BO", 0.011, 0.025, true, 0.409, 0.05, false),
    (60, "EBO", 0.006, 0.025, true, 0.498, 0.05, false),
];

fn ac5() -> Result<String, String> {
    let mut matched = 0;
    for (delta, sys, p_df, a_df, s_df, p_sem, a_sem, s_sem) in REFERENCE_ROWS {
        let report = holm(&[p_df, p_sem], 0.05).map_err(|e| e.to_string())?;
        for (i, (alpha, sig)) in [(a_df, s_df), (a_sem, s_sem)].into_iter().enumerate() {
            let e = report.for_input(i).unwrap();
            if (e.adjusted_alpha - alpha).abs() > 1e-12 || e.significant != sig {
                return Err(format!(
                    "δ={delta} {sys} row {i}: got α {} / {}, expected {alpha} / {sig}",
                    e.adjusted_alpha, e.significant
                ));
            }
            matched += 1;
        }
    }
    ensure(matched == 18, format!("{matched}/18 rows reproduce adjusted α and decision"))
}

fn cheap(c: &CandidateConfig) -> Result<f64, String> {
    let mut h = DefaultHasher::new();
    c.hash(&mut h);
    Ok((h.finish() % 10_000) as f64 / 10_000.0)
}

fn ac6() -> Result<String, String> {
    let space = SearchSpace::base(registry());
    let count = |o: Optimiser| o.run(&space, &cheap, 5).map(|(_, t)| t.evaluations).map_err(|e| e.to_string());
    let ga = count(Optimiser::Ga(GaParams::default()))?;
    let bo = count(Optimiser::Bo(BoParams::default()))?;
    let ebo = count(Optimiser::Ebo(EboParams::default()))?;
    ensure(
        ga <= 101 * 51 && bo == 151 && ebo == 651 && ga > ebo && ebo > bo,
        format!("GA {ga} (≤ 5151), BO {bo} (= 151), EBO {ebo} (= 651)"),
    )
}

fn ac7() -> Result<String, String> {
    let space = SearchSpace::extended(registry());
    let params = GaParams { population_size: 20, generations: 20, ..GaParams::default() };
    for seed in 0..50 {
        let (_, trace) = Optimiser::Ga(params.clone()).run(&space, &cheap, seed).map_err(|e| e.to_string())?;
        let gen_best: Vec<f64> =
            trace.records.iter().map(|r| r.objective_scores.iter().cloned().fold(f64::MIN, f64::max)).collect();
        let ok = gen_best.windows(2).all(|w| w[1] >= w[0])
            && trace.records.windows(2).all(|w| w[1].best_so_far >= w[0].best_so_far);
        if !ok {
            return Err(format!("seed {seed}: generation bests {gen_best:?}"));
        }
    }
    Ok("50/50 seeds non-decreasing over 21 generations".into())
}

fn needle_space() -> SearchSpace {
    let mut s = SearchSpace::base(vec![ClassifierKey::new("gaussian_nb"), ClassifierKey::new("lda")]);
    s.iteration_counts = vec![1, 5, 10];
    s.thresholds_1a = [10, 30, 50].map(Fraction::from_hundredths).to_vec();
    s.thresholds_1b = s.thresholds_1a.clone();
    s
}

fn needle_target() -> CandidateConfig {
    CandidateConfig::base(5, Fraction::from_hundredths(30), "lda", Fraction::from_hundredths(10), "gaussian_nb", true, "lda")
}

/// Share of genes agreeing with the target; 1 only at the target itself.
fn needle(c: &CandidateConfig) -> Result<f64, String> {
    let t = needle_target();
    let hits = [
        c.iteration_count_1a == t.iteration_count_1a,
        c.threshold_1a == t.threshold_1a,
        c.classifier_1a == t.classifier_1a,
        c.threshold_1b == t.threshold_1b,
        c.classifier_1b == t.classifier_1b,
        c.flag_1b == t.flag_1b,
        c.classifier_2 == t.classifier_2,
    ];
    Ok(hits.iter().filter(|h| **h).count() as f64 / hits.len() as f64)
}

fn ac8() -> Result<String, String> {
    let space = needle_space();
    let size = search_space_size(&space).map_err(|e| e.to_string())?;
    let optimisers = [
        Optimiser::Ga(GaParams { population_size: 20, generations: 10, ..GaParams::default() }),
        Optimiser::Bo(BoParams { it_count: 60, n_configs: 40, surrogate_trees: 30 }),
        Optimiser::Ebo(EboParams { it_count: 30, n_configs: 20, k: 5, surrogate_trees: 30, ..EboParams::default() }),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for o in optimisers {
        let mut hits = 0;
        for seed in 0..50 {
            let (best, _) = o.run(&space, &needle, 1000 + seed).map_err(|e| e.to_string())?;
            if best.config == needle_target() {
                hits += 1;
            }
        }
        ok &= hits >= 49;
        parts.push(format!("{} {hits}/50", o.id()));
    }
    ensure(ok, format!("{} (need ≥ 49/50 each; {size} configs)", parts.join(", ")))
}

fn ac9() -> Result<String, String> {
    let mut r = rng(13);
    for case in 0..1000 {
        let n = r.random_range(1..30);
        let levels = r.random_range(2..12);
        let probs: Vec<f64> = (0..n).map(|_| r.random_range(0..levels) as f64 / levels as f64).collect();
        let tol = if case % 5 == 0 { r.random_range(0..=10) as f64 / 10.0 } else { r.random::<f64>() };
        let t = spy_threshold(&probs, tol);
        let below = |c: f64| probs.iter().filter(|p| **p < c).count();
        let allowed = tol * n as f64 + 1e-9;
        if below(t) as f64 > allowed {
            return Err(format!("case {case}: {} spies below {t}, tolerance {tol}", below(t)));
        }
        let max = probs.iter().cloned().fold(f64::MIN, f64::max);
        let mut candidates: Vec<f64> = probs.clone();
        candidates.push(f64::INFINITY);
        let best = candidates.into_iter().filter(|c| below(*c) as f64 <= allowed).fold(f64::MIN, f64::max);
        let agrees = if best.is_infinite() { t > max && below(t) == n } else { t == best };
        if !agrees {
            return Err(format!("case {case}: threshold {t}, largest feasible candidate {best}"));
        }
    }
    Ok("1000/1000 vectors satisfy the tolerance and are maximal".into())
}

struct NaiveTree;

impl PuLearner for NaiveTree {
    fn learn(&self, pu: &PuDataset, seed: u64) -> PuModel {
        let n_pos = pu.labelled_indices().len();
        match fit(&ClassifierKey::new("decision_tree"), pu.features(), pu.s(), seed) {
            Ok(m) => PuModel::new(m, "decision_tree on s".into(), ReliableNegativeSet::default(), n_pos),
            Err(e) => PuModel::failed(e.to_string(), ReliableNegativeSet::default(), n_pos, vec![]),
        }
    }
}

/// Treats the s annotation as the class label.
struct NaiveSystem;

impl System for NaiveSystem {
    fn id(&self) -> String {
        "naive".into()
    }

    fn select(&self, _: &PuDataset, _: u64) -> Result<Selection, String> {
        Ok(Selection {
            learner: Box::new(NaiveTree),
            config: None,
            hyperparameters: Default::default(),
            best_objective: 0.0,
            evaluations: 0,
            cache_hits: 0,
            trace: None,
        })
    }
}

fn ac10() -> Result<String, String> {
    let start = Instant::now();
    let data = gaussian_blobs(500, 10, 0.4, 6.0, 10, 21);
    let plan = outer_fold_plan(&data, OUTER_FOLDS, 21).map_err(|e| e.to_string())?;
    let delta = 0.2;
    let naive: RunResult = nested_cv(&NaiveSystem, &data, "blobs", &plan, delta, 21);
    let space = SearchSpace::base(registry());
    let systems = [
        Optimiser::Ga(GaParams { population_size: 20, generations: 10, ..GaParams::default() }),
        Optimiser::Bo(BoParams { it_count: 10, n_configs: 20, ..BoParams::default() }),
        Optimiser::Ebo(EboParams { it_count: 10, n_configs: 20, k: 5, ..EboParams::default() }),
    ];
    let mut ok = true;
    let mut parts = vec![format!("naive {:.4}", naive.mean.f_measure)];
    for o in systems {
        let r = nested_cv(&AutoPuSystem::new(o, space.clone()), &data, "blobs", &plan, delta, 21);
        let f = r.mean.f_measure;
        ok &= f >= 0.90 && f >= naive.mean.f_measure && r.folds.iter().all(|f| !f.failed);
        parts.push(format!("{} {f:.4}", r.system));
    }
    ensure(
        ok,
        format!("mean test F: {} (need ≥ 0.90 and ≥ naive); {:.0} s", parts.join(", "), start.elapsed().as_secs_f64()),
    )
}

fn small_experiment(dir: &Path) -> ExperimentSpec {
    let d = gaussian_blobs(150, 5, 0.4, 4.0, 5, 8);
    let mut text = String::from("f0,f1,f2,f3,f4,label\n");
    for (i, row) in d.features().rows().into_iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
        text += &format!("{},{}\n", cells.join(","), u8::from(d.labels()[i]));
    }
    std::fs::write(dir.join("data.csv"), text).unwrap();
    let spec = r#"
dataset = "data.csv"
label_column = "label"
deltas = [0.2, 0.5]
systems = ["ga", "bo", "ebo", "sem", "dfpu"]
seed = 4
outer_folds = 3
ga = { population_size = 6, generations = 2 }
bo = { it_count = 3, n_configs = 5, surrogate_trees = 10 }
ebo = { it_count = 2, n_configs = 5, k = 2, surrogate_trees = 10 }
sem = { spy_rates = [0.1, 0.2], spy_tolerances = [0.0, 0.05] }
dfpu = { rn_rates = [0.2, 0.4], iteration_counts = [1, 3], n_trees = 10, max_layers = 2 }
"#;
    std::fs::write(dir.join("spec.toml"), spec).unwrap();
    ExperimentSpec::load(&dir.join("spec.toml")).unwrap()
}

fn ac11() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = small_experiment(dir.path());
    let run = |sub: &str, workers: usize| {
        let opts = RunOptions { workers: Some(workers), output_dir: Some(dir.path().join(sub)), quiet: true, ..Default::default() };
        cmd_run(&spec, &opts).map_err(|e| e.to_string())
    };
    let a = run("a", 1)?;
    let b = run("b", 4)?;
    if a.result_files.len() != 10 || a.result_files.len() != b.result_files.len() {
        return Err(format!("{} vs {} result files", a.result_files.len(), b.result_files.len()));
    }
    for (x, y) in a.result_files.iter().zip(&b.result_files) {
        if std::fs::read(x).map_err(|e| e.to_string())? != std::fs::read(y).map_err(|e| e.to_string())? {
            return Err(format!("{} differs between runs", x.display()));
        }
    }
    Ok("10/10 result payloads byte-identical (1 vs 4 workers)".into())
}

fn ac12() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = small_experiment(dir.path());
    let out = cmd_run(&spec, &RunOptions { quiet: true, ..Default::default() }).map_err(|e| e.to_string())?;
    let data = autopu_cli::ingest_csv(&spec.dataset, &spec.label_column, spec.missing).map_err(|e| e.to_string())?;
    let expected = outer_fold_plan(&data, spec.outer_folds, 4).map_err(|e| e.to_string())?.digest();
    let mut checked = 0;
    for r in &out.results {
        if r.fold_plan_digest != expected {
            return Err(format!("{} at δ={} used plan {}", r.label(), r.delta, r.fold_plan_digest));
        }
        checked += 1;
    }
    let plans: Vec<Vec<u8>> = out.fold_plan_files.iter().map(|p| std::fs::read(p).unwrap()).collect();
    ensure(
        checked == 10 && plans.windows(2).all(|w| w[0] == w[1]),
        format!("{checked} runs over 5 systems x 2 deltas share fold plan {}", &expected[..12]),
    )
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 12] = [
        ("search-space cardinality", ac1),
        ("encoding length", ac2),
        ("metric oracle", ac3),
        ("wilcoxon", ac4),
        ("holm decisions", ac5),
        ("evaluation budgets", ac6),
        ("ga elitism", ac7),
        ("needle landscape", ac8),
        ("spy threshold", ac9),
        ("desk-scale run", ac10),
        ("determinism", ac11),
        ("shared folds", ac12),
    ];
    // Optional filters such as `AC8`, passed after `--`.
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| a.starts_with("AC")).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        if !filters.is_empty() && !filters.contains(&format!("AC{}", i + 1)) {
            continue;
        }
        ran += 1;
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("AC{} PASS {name}: {msg} [{secs:.1}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("AC{} FAIL {name}: {msg} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{}/{ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
