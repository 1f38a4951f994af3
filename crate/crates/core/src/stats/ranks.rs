use std::collections::BTreeMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::wilcoxon::PairedSample;
use super::StatsError;
use crate::evaluation::nested::RunResult;

/// Metrics closer than this are ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Precision,
    Recall,
    FMeasure,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::FMeasure, Metric::Recall, Metric::Precision];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::FMeasure => "f_measure",
        }
    }

    pub fn of(self, r: &RunResult) -> f64 {
        match self {
            Metric::Precision => r.mean.precision,
            Metric::Recall => r.mean.recall,
            Metric::FMeasure => r.mean.f_measure,
        }
    }
}

impl FromStr for Metric {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "precision" => Ok(Metric::Precision),
            "recall" => Ok(Metric::Recall),
            "f_measure" | "f-measure" | "f1" | "f" => Ok(Metric::FMeasure),
            other => Err(StatsError::UnknownMetric(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankPair {
    pub a: f64,
    pub b: f64,
}

/// Mean rank of each system over paired values: 1 for the better, 2 for the
/// worse, 1.5 each on ties.
pub fn average_ranks_of(a: &[f64], b: &[f64]) -> Result<RankPair, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch { a: a.len(), b: b.len() });
    }
    if a.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut ra = 0.0;
    for (x, y) in a.iter().zip(b) {
        ra += if (x - y).abs() <= TIE_TOLERANCE {
            1.5
        } else if x > y {
            1.0
        } else {
            2.0
        };
    }
    let n = a.len() as f64;
    Ok(RankPair { a: ra / n, b: 3.0 - ra / n })
}

/// Per-dataset metric values of systems `a` and `b` (matched by
/// [`RunResult::label`]) at one δ, aligned by dataset id.
pub fn paired_sample(results: &[RunResult], metric: Metric, a: &str, b: &str, delta: f64) -> Result<PairedSample, StatsError> {
    let collect = |system: &str| -> BTreeMap<String, f64> {
        results
            .iter()
            .filter(|r| r.label() == system && (r.delta - delta).abs() < 1e-9)
            .map(|r| (r.dataset.clone(), metric.of(r)))
            .collect()
    };
    let (ma, mb) = (collect(a), collect(b));
    for d in ma.keys() {
        if !mb.contains_key(d) {
            return Err(StatsError::MissingDataset { system: b.to_string(), dataset: d.clone() });
        }
    }
    for d in mb.keys() {
        if !ma.contains_key(d) {
            return Err(StatsError::MissingDataset { system: a.to_string(), dataset: d.clone() });
        }
    }
    if ma.is_empty() {
        return Err(StatsError::NoResults { system: format!("{a} / {b}"), delta });
    }
    let ids: Vec<String> = ma.keys().cloned().collect();
    PairedSample::new(ids.clone(), ids.iter().map(|d| ma[d]).collect(), ids.iter().map(|d| mb[d]).collect())
}

/// Average ranks of two systems over the datasets they share at one δ.
pub fn average_ranks(results: &[RunResult], metric: Metric, a: &str, b: &str, delta: f64) -> Result<RankPair, StatsError> {
    let s = paired_sample(results, metric, a, b, delta)?;
    average_ranks_of(&s.a, &s.b)
}
