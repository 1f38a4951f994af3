//! The S-EM and DF-PU baselines and their grid-search tuning.

use std::collections::BTreeMap;

use ndarray::{ArrayView2, Axis};
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::classifiers::deep_forest::DeepForestParams;
use crate::classifiers::naive_bayes::GaussianNb;
use crate::classifiers::{fit_deep_forest, from_gaussian_nb};
use crate::data::PuDataset;
use crate::evaluation::nested::{Selection, System};
use crate::evaluation::objective::objective;
use crate::pu::{spy_count, spy_threshold, split_unlabelled, Diagnostic, Phase, PuLearner, PuModel, ReliableNegativeSet};
use crate::rng::{derive_tagged, rng_from_seed};

/// Round cap of the S-EM expectation-maximisation step.
pub const EM_MAX_ROUNDS: usize = 20;

fn rows_of(x: &ArrayView2<f64>, pos: &[usize], neg: &[usize]) -> (ndarray::Array2<f64>, Vec<bool>) {
    let mut rows = pos.to_vec();
    rows.extend_from_slice(neg);
    let mut y = vec![true; pos.len()];
    y.resize(rows.len(), false);
    (x.select(Axis(0), &rows), y)
}

/// S-EM and the number of EM rounds it ran (0 when it failed before EM).
pub(crate) fn sem_with_rounds(pu: &PuDataset, spy_rate: f64, spy_tolerance: f64, seed: u64) -> (PuModel, usize) {
    let x = pu.features();
    let positives = pu.labelled_indices();
    let unlabelled = pu.unlabelled_indices();
    let description = format!("sem(spy_rate={spy_rate}, spy_tolerance={spy_tolerance})");
    let n_spies = spy_count(spy_rate, positives.len());
    if n_spies == 0 || unlabelled.is_empty() {
        return (PuModel::failed(description, ReliableNegativeSet::default(), positives.len(), vec![Diagnostic::SpiesUnavailable]), 0);
    }

    // Step 1: spies.
    let mut rng = rng_from_seed(derive_tagged(seed, "sem_spies", 0));
    let mut p = positives.clone();
    p.shuffle(&mut rng);
    let spies = p.split_off(p.len() - n_spies);
    let mut negatives = unlabelled.clone();
    negatives.extend_from_slice(&spies);
    let (xt, yt) = rows_of(&x, &p, &negatives);
    let nb = GaussianNb::fit(xt.view(), &yt);
    let spy_probs = nb.predict_proba(&x.select(Axis(0), &spies).view());
    let t = spy_threshold(&spy_probs, spy_tolerance);
    let u_probs = nb.predict_proba(&x.select(Axis(0), &unlabelled).view());
    let (rn, rest): (Vec<(usize, f64)>, Vec<(usize, f64)>) =
        unlabelled.iter().copied().zip(u_probs).partition(|&(_, prob)| prob < t);
    let rn: Vec<usize> = rn.into_iter().map(|(i, _)| i).collect();
    let q: Vec<usize> = rest.into_iter().map(|(i, _)| i).collect();
    let rn_set = ReliableNegativeSet::from_indices(rn.clone(), Phase::OneA);
    if rn.is_empty() {
        let mut m = PuModel::failed(description, rn_set, positives.len(), vec![Diagnostic::EmptyReliableNegatives]);
        m.n_spies = n_spies;
        return (m, 0);
    }

    // Step 2: EM over P (fixed 1), RN (fixed 0) and the rest of U (soft).
    let (xi, yi) = rows_of(&x, &positives, &rn);
    let mut nb = GaussianNb::fit(xi.view(), &yi);
    let mut rows = positives.clone();
    rows.extend_from_slice(&rn);
    rows.extend_from_slice(&q);
    let x_all = x.select(Axis(0), &rows);
    let x_q = x.select(Axis(0), &q);
    let mut r_q = nb.predict_proba(&x_q.view());
    let mut hard: Vec<bool> = r_q.iter().map(|&v| v >= 0.5).collect();
    let mut rounds = 0;
    while rounds < EM_MAX_ROUNDS {
        rounds += 1;
        let mut r = vec![1.0; positives.len()];
        r.resize(positives.len() + rn.len(), 0.0);
        r.extend_from_slice(&r_q);
        nb = GaussianNb::fit_soft(x_all.view(), &r);
        r_q = nb.predict_proba(&x_q.view());
        let next: Vec<bool> = r_q.iter().map(|&v| v >= 0.5).collect();
        if next == hard {
            break;
        }
        hard = next;
    }
    let mut model = PuModel::new(from_gaussian_nb(nb, rows.len(), x.ncols()), description, rn_set, positives.len());
    model.n_spies = n_spies;
    (model, rounds)
}

/// Spy-based reliable negatives followed by naive-Bayes EM.
pub fn run_sem(pu: &PuDataset, spy_rate: f64, spy_tolerance: f64, seed: u64) -> PuModel {
    sem_with_rounds(pu, spy_rate, spy_tolerance, seed).0
}

/// Deep-forest two-step learner: the `rn_rate` fraction of U with the lowest
/// scores across `iteration_count` subsets becomes RN.
pub fn run_dfpu(pu: &PuDataset, rn_rate: f64, iteration_count: usize, forest: &DeepForestParams, seed: u64) -> PuModel {
    let x = pu.features();
    let positives = pu.labelled_indices();
    let unlabelled = pu.unlabelled_indices();
    let description = format!("dfpu(rn_rate={rn_rate}, iteration_count={iteration_count})");
    let n_rn = (rn_rate * unlabelled.len() as f64 + 1e-9).floor() as usize;
    let mut diagnostics = Vec::new();
    if n_rn == 0 || positives.is_empty() {
        return PuModel::failed(description, ReliableNegativeSet::default(), positives.len(), vec![Diagnostic::EmptyReliableNegatives]);
    }
    let mut rng = rng_from_seed(derive_tagged(seed, "dfpu_split", 0));
    let (subsets, diag) = split_unlabelled(&unlabelled, iteration_count, &mut rng);
    diagnostics.extend(diag);
    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(unlabelled.len());
    for (i, subset) in subsets.iter().enumerate() {
        let (xt, yt) = rows_of(&x, &positives, subset);
        let model = match fit_deep_forest(xt.view(), &yt, forest, derive_tagged(seed, "dfpu_fit1", i as u64)) {
            Ok(m) => m,
            Err(e) => {
                diagnostics.push(Diagnostic::ClassifierFailed { phase: "1a".into(), message: e.to_string() });
                return PuModel::failed(description, ReliableNegativeSet::default(), positives.len(), diagnostics);
            }
        };
        let probs = model.predict_proba(x.select(Axis(0), subset).view()).unwrap_or_else(|_| vec![1.0; subset.len()]);
        scored.extend(probs.into_iter().zip(subset.iter().copied()));
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut rn: Vec<usize> = scored[..n_rn].iter().map(|&(_, i)| i).collect();
    rn.sort_unstable();
    let rn_set = ReliableNegativeSet::from_indices(rn.clone(), Phase::OneA);
    let (xt, yt) = rows_of(&x, &positives, &rn);
    match fit_deep_forest(xt.view(), &yt, forest, derive_tagged(seed, "dfpu_fit2", 0)) {
        Ok(m) => {
            let mut model = PuModel::new(m, description, rn_set, positives.len());
            model.diagnostics = diagnostics;
            model
        }
        Err(e) => {
            diagnostics.push(Diagnostic::ClassifierFailed { phase: "2".into(), message: e.to_string() });
            PuModel::failed(description, rn_set, positives.len(), diagnostics)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemLearner {
    pub spy_rate: f64,
    pub spy_tolerance: f64,
}

impl PuLearner for SemLearner {
    fn learn(&self, pu: &PuDataset, seed: u64) -> PuModel {
        run_sem(pu, self.spy_rate, self.spy_tolerance, seed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DfPuLearner {
    pub rn_rate: f64,
    pub iteration_count: usize,
    pub forest: DeepForestParams,
}

impl PuLearner for DfPuLearner {
    fn learn(&self, pu: &PuDataset, seed: u64) -> PuModel {
        run_dfpu(pu, self.rn_rate, self.iteration_count, &self.forest, seed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineMethod {
    Sem,
    DfPu,
}

impl BaselineMethod {
    pub fn id(self) -> &'static str {
        match self {
            BaselineMethod::Sem => "sem",
            BaselineMethod::DfPu => "dfpu",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        match id {
            "sem" => Some(BaselineMethod::Sem),
            "dfpu" => Some(BaselineMethod::DfPu),
            _ => None,
        }
    }
}

/// Hyperparameter grid of a baseline. Cells enumerate the cartesian
/// product with the first hyperparameter varying slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineGrid {
    pub method: BaselineMethod,
    pub hyperparameters: Vec<(String, Vec<f64>)>,
}

fn hundredths(hs: &[u32]) -> Vec<f64> {
    hs.iter().map(|&h| h as f64 / 100.0).collect()
}

impl BaselineGrid {
    pub fn sem() -> Self {
        BaselineGrid {
            method: BaselineMethod::Sem,
            hyperparameters: vec![
                ("spy_rate".into(), hundredths(&[5, 10, 15, 20, 25, 30, 35])),
                ("spy_tolerance".into(), hundredths(&[0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10])),
            ],
        }
    }

    pub fn dfpu() -> Self {
        BaselineGrid {
            method: BaselineMethod::DfPu,
            hyperparameters: vec![
                ("rn_rate".into(), hundredths(&[1, 3, 5, 7, 9, 11, 13, 15, 17, 20])),
                ("iteration_count".into(), (1..=10).map(f64::from).collect()),
            ],
        }
    }

    pub fn for_method(method: BaselineMethod) -> Self {
        match method {
            BaselineMethod::Sem => Self::sem(),
            BaselineMethod::DfPu => Self::dfpu(),
        }
    }

    pub fn len(&self) -> usize {
        self.hyperparameters.iter().map(|(_, v)| v.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn check(&self) -> Result<(), String> {
        let expected: &[&str] = match self.method {
            BaselineMethod::Sem => &["spy_rate", "spy_tolerance"],
            BaselineMethod::DfPu => &["rn_rate", "iteration_count"],
        };
        let names: Vec<&str> = self.hyperparameters.iter().map(|(n, _)| n.as_str()).collect();
        if names != expected {
            return Err(format!("{} grid needs hyperparameters {expected:?}, got {names:?}", self.method.id()));
        }
        if self.is_empty() {
            return Err(format!("{} grid is empty", self.method.id()));
        }
        Ok(())
    }

    /// Cell `index` as name -> value.
    pub fn cell(&self, index: usize) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        let mut rem = index;
        for (name, values) in self.hyperparameters.iter().rev() {
            out.insert(name.clone(), values[rem % values.len()]);
            rem /= values.len();
        }
        out
    }

    pub fn learner(&self, cell: &BTreeMap<String, f64>, forest: &DeepForestParams) -> Box<dyn PuLearner> {
        match self.method {
            BaselineMethod::Sem => Box::new(SemLearner { spy_rate: cell["spy_rate"], spy_tolerance: cell["spy_tolerance"] }),
            BaselineMethod::DfPu => Box::new(DfPuLearner {
                rn_rate: cell["rn_rate"],
                iteration_count: cell["iteration_count"].round() as usize,
                forest: forest.clone(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridOutcome {
    pub best_index: usize,
    pub best_score: f64,
    pub scores: Vec<f64>,
}

/// Evaluates every cell once (concurrently) and returns the argmax; ties go
/// to the earliest cell.
pub fn grid_argmax(n_cells: usize, score: impl Fn(usize) -> f64 + Sync) -> GridOutcome {
    let scores: Vec<f64> = (0..n_cells).into_par_iter().map(|i| score(i)).collect();
    let mut best_index = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best_index] {
            best_index = i;
        }
    }
    GridOutcome { best_index, best_score: scores.get(best_index).copied().unwrap_or(0.0), scores }
}

/// Grid search with the internal-CV objective; failed cells score 0.
pub fn grid_search(grid: &BaselineGrid, pu: &PuDataset, forest: &DeepForestParams, seed: u64) -> GridOutcome {
    let inner_seed = derive_tagged(seed, "objective", 0);
    grid_argmax(grid.len(), |i| objective(grid.learner(&grid.cell(i), forest).as_ref(), pu, inner_seed).unwrap_or(0.0))
}

/// A baseline tuned by [`grid_search`] inside each outer fold.
#[derive(Clone, Debug)]
pub struct BaselineSystem {
    pub grid: BaselineGrid,
    pub forest: DeepForestParams,
}

impl BaselineSystem {
    pub fn new(grid: BaselineGrid) -> Self {
        BaselineSystem { grid, forest: DeepForestParams::default() }
    }
}

impl System for BaselineSystem {
    fn id(&self) -> String {
        self.grid.method.id().to_string()
    }

    fn select(&self, pu_train: &PuDataset, seed: u64) -> Result<Selection, String> {
        self.grid.check()?;
        let outcome = grid_search(&self.grid, pu_train, &self.forest, seed);
        let cell = self.grid.cell(outcome.best_index);
        Ok(Selection {
            learner: self.grid.learner(&cell, &self.forest),
            config: None,
            hyperparameters: cell.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
            best_objective: outcome.best_score,
            evaluations: outcome.scores.len(),
            cache_hits: 0,
            trace: None,
        })
    }
}
