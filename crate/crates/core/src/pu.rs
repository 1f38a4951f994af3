//! Running a [`CandidateConfig`] as a two-step PU algorithm.
//!
//! Phase 1A mines reliable negatives (RN) from subsets of the unlabelled set,
//! optionally calibrating the threshold with spies; Phase 1B optionally grows
//! RN with a second classifier; Phase 2 trains the final classifier on the
//! labelled positives versus RN.

use ndarray::{ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::classifiers::{self, ClassifierError, TrainedModel};
use crate::config::CandidateConfig;
use crate::data::PuDataset;
use crate::rng::{derive_tagged, rng_from_seed, Rng};
use crate::space::ClassifierKey;

/// Source of fitted classifiers. The default is [`NativeFitter`]; tests
/// substitute scripted models.
pub trait Fitter: Sync {
    fn fit(&self, key: &ClassifierKey, x: ArrayView2<f64>, y: &[bool], seed: u64) -> Result<TrainedModel, ClassifierError>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NativeFitter;

impl Fitter for NativeFitter {
    fn fit(&self, key: &ClassifierKey, x: ArrayView2<f64>, y: &[bool], seed: u64) -> Result<TrainedModel, ClassifierError> {
        classifiers::fit(key, x, y, seed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "1a")]
    OneA,
    #[serde(rename = "1b")]
    OneB,
}

/// Reliable negatives as row indices into the PU dataset, with the phase that
/// admitted each one.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReliableNegativeSet {
    indices: Vec<usize>,
    phases: Vec<Phase>,
}

impl ReliableNegativeSet {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn count(&self, phase: Phase) -> usize {
        self.phases.iter().filter(|&&p| p == phase).count()
    }

    fn push(&mut self, index: usize, phase: Phase) {
        self.indices.push(index);
        self.phases.push(phase);
    }

    /// Rebuilds a set from indices (all tagged with `phase`).
    pub fn from_indices(indices: Vec<usize>, phase: Phase) -> ReliableNegativeSet {
        let phases = vec![phase; indices.len()];
        ReliableNegativeSet { indices, phases }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Diagnostic {
    IterationCountClamped { requested: usize, used: usize },
    SpiesUnavailable,
    Phase1bSkippedEmptyRn,
    ClassifierFailed { phase: String, message: String },
    EmptyReliableNegatives,
}

#[derive(Debug)]
struct Failure(Diagnostic);

fn fail(phase: &str, e: ClassifierError) -> Failure {
    Failure(Diagnostic::ClassifierFailed { phase: phase.into(), message: e.to_string() })
}

/// Partitions `unlabelled` into `n` shuffled subsets whose sizes differ by at
/// most one. `n` is clamped to `[1, |unlabelled|]`.
pub fn split_unlabelled(unlabelled: &[usize], n: usize, rng: &mut Rng) -> (Vec<Vec<usize>>, Option<Diagnostic>) {
    let used = n.clamp(1, unlabelled.len().max(1));
    let diag = (used != n).then_some(Diagnostic::IterationCountClamped { requested: n, used });
    let mut shuffled = unlabelled.to_vec();
    shuffled.shuffle(rng);
    let (q, r) = (shuffled.len() / used, shuffled.len() % used);
    let mut out = Vec::with_capacity(used);
    let mut start = 0;
    for i in 0..used {
        let len = q + usize::from(i < r);
        out.push(shuffled[start..start + len].to_vec());
        start += len;
    }
    (out, diag)
}

/// The `(m + 1)`-th smallest spy probability, `m = floor(tolerance * |spies|)`.
/// At most a `tolerance` fraction of spies lies strictly below it. When every
/// spy is tolerated the threshold sits just above the largest probability.
pub fn spy_threshold(spy_probs: &[f64], tolerance: f64) -> f64 {
    assert!(!spy_probs.is_empty(), "spy threshold needs at least one spy");
    let mut sorted = spy_probs.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let m = (tolerance * sorted.len() as f64 + 1e-9).floor() as usize;
    if m >= sorted.len() {
        let max = sorted[sorted.len() - 1];
        return max + f64::EPSILON.max(max.abs() * f64::EPSILON);
    }
    sorted[m]
}

/// Number of spies hidden for a positive set of size `n_pos`.
pub fn spy_count(rate: f64, n_pos: usize) -> usize {
    if n_pos < 2 {
        return 0;
    }
    ((rate * n_pos as f64 + 1e-9).floor() as usize).clamp(1, n_pos - 1)
}

fn training_set(x: &ArrayView2<f64>, pos: &[usize], neg: &[&[usize]]) -> (ndarray::Array2<f64>, Vec<bool>) {
    let mut rows = pos.to_vec();
    for n in neg {
        rows.extend_from_slice(n);
    }
    let mut y = vec![true; pos.len()];
    y.resize(rows.len(), false);
    (x.select(Axis(0), &rows), y)
}

#[derive(Clone, Debug, Default)]
pub struct Phase1aOutcome {
    pub rn: ReliableNegativeSet,
    pub remaining: Vec<usize>,
    pub n_spies: usize,
    /// Effective threshold used for each subset.
    pub thresholds: Vec<f64>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Phase 1A: for each unlabelled subset, train `classifier_1a` on P vs the
/// subset (plus all spies when `spy_flag`), and move subset members scoring
/// strictly below the effective threshold into RN.
pub fn phase_1a<F: Fitter + ?Sized>(
    x: ArrayView2<f64>,
    positives: &[usize],
    unlabelled: &[usize],
    config: &CandidateConfig,
    fitter: &F,
    seed: u64,
) -> Result<Phase1aOutcome, (Diagnostic, Vec<Diagnostic>)> {
    let mut out = Phase1aOutcome::default();
    let mut rng = rng_from_seed(derive_tagged(seed, "phase1a", 0));
    let (pos, spies) = if config.spy_flag {
        let n_spies = spy_count(config.spy_rate.as_f64(), positives.len());
        if n_spies == 0 {
            out.diagnostics.push(Diagnostic::SpiesUnavailable);
            (positives.to_vec(), Vec::new())
        } else {
            let mut p = positives.to_vec();
            p.shuffle(&mut rng);
            let spies = p.split_off(p.len() - n_spies);
            (p, spies)
        }
    } else {
        (positives.to_vec(), Vec::new())
    };
    out.n_spies = spies.len();
    let (subsets, diag) = split_unlabelled(unlabelled, config.iteration_count_1a as usize, &mut rng);
    out.diagnostics.extend(diag);

    let mut is_rn = vec![false; x.nrows()];
    for (i, subset) in subsets.iter().enumerate() {
        if subset.is_empty() {
            continue;
        }
        let (xt, yt) = training_set(&x, &pos, &[subset, &spies]);
        let model = fitter
            .fit(&config.classifier_1a, xt.view(), &yt, derive_tagged(seed, "fit1a", i as u64))
            .map_err(|e| (fail("1a", e).0, out.diagnostics.clone()))?;
        let probs = model
            .predict_proba(x.select(Axis(0), subset).view())
            .map_err(|e| (fail("1a", e).0, out.diagnostics.clone()))?;
        let threshold = if spies.is_empty() {
            config.threshold_1a.as_f64()
        } else {
            let sp = model
                .predict_proba(x.select(Axis(0), &spies).view())
                .map_err(|e| (fail("1a", e).0, out.diagnostics.clone()))?;
            spy_threshold(&sp, config.spy_tolerance.as_f64())
        };
        out.thresholds.push(threshold);
        for (&row, &p) in subset.iter().zip(&probs) {
            if p < threshold {
                is_rn[row] = true;
                out.rn.push(row, Phase::OneA);
            }
        }
    }
    out.remaining = unlabelled.iter().copied().filter(|&r| !is_rn[r]).collect();
    Ok(out)
}

/// Phase 1B: one pass of `classifier_1b` trained on P vs RN over the
/// remaining unlabelled instances. RN members are never rescored.
pub fn phase_1b<F: Fitter + ?Sized>(
    x: ArrayView2<f64>,
    positives: &[usize],
    rn: &ReliableNegativeSet,
    remaining: &[usize],
    config: &CandidateConfig,
    fitter: &F,
    seed: u64,
) -> Result<(ReliableNegativeSet, Option<Diagnostic>), Diagnostic> {
    if !config.flag_1b || remaining.is_empty() {
        return Ok((rn.clone(), None));
    }
    if rn.is_empty() {
        return Ok((rn.clone(), Some(Diagnostic::Phase1bSkippedEmptyRn)));
    }
    let (xt, yt) = training_set(&x, positives, &[rn.indices()]);
    let model = fitter
        .fit(&config.classifier_1b, xt.view(), &yt, derive_tagged(seed, "fit1b", 0))
        .map_err(|e| fail("1b", e).0)?;
    let probs = model.predict_proba(x.select(Axis(0), remaining).view()).map_err(|e| fail("1b", e).0)?;
    let threshold = config.threshold_1b.as_f64();
    let mut out = rn.clone();
    for (&row, &p) in remaining.iter().zip(&probs) {
        if p < threshold {
            out.push(row, Phase::OneB);
        }
    }
    Ok((out, None))
}

/// A trained two-step PU classifier.
#[derive(Clone, Debug)]
pub struct PuModel {
    classifier: Option<TrainedModel>,
    pub description: String,
    pub rn: ReliableNegativeSet,
    pub n_positive: usize,
    pub n_spies: usize,
    pub diagnostics: Vec<Diagnostic>,
}

impl PuModel {
    pub fn new(classifier: TrainedModel, description: String, rn: ReliableNegativeSet, n_positive: usize) -> PuModel {
        PuModel { classifier: Some(classifier), description, rn, n_positive, n_spies: 0, diagnostics: Vec::new() }
    }

    pub fn failed(description: String, rn: ReliableNegativeSet, n_positive: usize, diagnostics: Vec<Diagnostic>) -> PuModel {
        PuModel { classifier: None, description, rn, n_positive, n_spies: 0, diagnostics }
    }

    pub fn is_failed(&self) -> bool {
        self.classifier.is_none()
    }

    pub fn classifier(&self) -> Option<&TrainedModel> {
        self.classifier.as_ref()
    }

    /// Failed models predict every instance positive.
    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Result<Vec<f64>, ClassifierError> {
        match &self.classifier {
            Some(m) => m.predict_proba(x),
            None => Ok(vec![1.0; x.nrows()]),
        }
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<bool>, ClassifierError> {
        Ok(self.predict_proba(x)?.into_iter().map(|p| p >= 0.5).collect())
    }
}

/// Phases 1A, 1B and 2 for one configuration.
pub fn run_two_step<F: Fitter + ?Sized>(config: &CandidateConfig, pu: &PuDataset, fitter: &F, seed: u64) -> PuModel {
    let x = pu.features();
    let positives = pu.labelled_indices();
    let unlabelled = pu.unlabelled_indices();
    let description = config.to_string();
    let one_a = match phase_1a(x, &positives, &unlabelled, config, fitter, seed) {
        Ok(o) => o,
        Err((d, mut diags)) => {
            diags.push(d);
            return PuModel::failed(description, ReliableNegativeSet::default(), positives.len(), diags);
        }
    };
    let mut diagnostics = one_a.diagnostics.clone();
    let rn = match phase_1b(x, &positives, &one_a.rn, &one_a.remaining, config, fitter, seed) {
        Ok((rn, d)) => {
            diagnostics.extend(d);
            rn
        }
        Err(d) => {
            diagnostics.push(d);
            return PuModel::failed(description, one_a.rn, positives.len(), diagnostics);
        }
    };
    let mut model = phase_2(x, &positives, rn, &config.classifier_2, fitter, seed, description, diagnostics);
    model.n_spies = one_a.n_spies;
    model
}

/// Phase 2: the final classifier on P vs RN. An empty RN gives a failed model.
#[allow(clippy::too_many_arguments)]
pub fn phase_2<F: Fitter + ?Sized>(
    x: ArrayView2<f64>,
    positives: &[usize],
    rn: ReliableNegativeSet,
    classifier: &ClassifierKey,
    fitter: &F,
    seed: u64,
    description: String,
    mut diagnostics: Vec<Diagnostic>,
) -> PuModel {
    if rn.is_empty() {
        diagnostics.push(Diagnostic::EmptyReliableNegatives);
        return PuModel::failed(description, rn, positives.len(), diagnostics);
    }
    let (xt, yt) = training_set(&x, positives, &[rn.indices()]);
    match fitter.fit(classifier, xt.view(), &yt, derive_tagged(seed, "fit2", 0)) {
        Ok(m) => {
            let mut model = PuModel::new(m, description, rn, positives.len());
            model.diagnostics = diagnostics;
            model
        }
        Err(e) => {
            diagnostics.push(fail("2", e).0);
            PuModel::failed(description, rn, positives.len(), diagnostics)
        }
    }
}

/// Anything that can be trained on PU data and scored by the objective:
/// candidate configurations and the baseline methods.
pub trait PuLearner: Sync {
    fn learn(&self, pu: &PuDataset, seed: u64) -> PuModel;
}

impl PuLearner for CandidateConfig {
    fn learn(&self, pu: &PuDataset, seed: u64) -> PuModel {
        run_two_step(self, pu, &NativeFitter, seed)
    }
}
