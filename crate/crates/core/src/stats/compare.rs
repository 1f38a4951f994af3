use serde::{Deserialize, Serialize};

use super::holm::holm;
use super::ranks::{average_ranks_of, paired_sample, Metric};
use super::wilcoxon::wilcoxon;
use super::StatsError;
use crate::evaluation::nested::RunResult;

/// One pairwise comparison, as written to comparison CSVs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub metric: Metric,
    pub delta: f64,
    pub system_a: String,
    pub system_b: String,
    pub n_datasets: usize,
    pub rank_a: f64,
    pub rank_b: f64,
    pub p_value: f64,
    pub adjusted_alpha: f64,
    pub significant: bool,
}

/// Every pair of systems at every δ: average ranks, Wilcoxon p-values and
/// Holm decisions over the pairs sharing a (metric, δ).
pub fn compare(results: &[RunResult], metric: Metric, alpha: f64) -> Result<Vec<ComparisonRow>, StatsError> {
    let mut deltas: Vec<f64> = results.iter().map(|r| r.delta).collect();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let mut out = Vec::new();
    for delta in deltas {
        let mut systems: Vec<String> =
            results.iter().filter(|r| (r.delta - delta).abs() < 1e-9).map(|r| r.label()).collect();
        systems.sort();
        systems.dedup();
        let mut rows = Vec::new();
        for i in 0..systems.len() {
            for j in i + 1..systems.len() {
                let (a, b) = (&systems[i], &systems[j]);
                let sample = paired_sample(results, metric, a, b, delta)?;
                let ranks = average_ranks_of(&sample.a, &sample.b)?;
                rows.push(ComparisonRow {
                    metric,
                    delta,
                    system_a: a.clone(),
                    system_b: b.clone(),
                    n_datasets: sample.ids.len(),
                    rank_a: ranks.a,
                    rank_b: ranks.b,
                    p_value: wilcoxon(&sample).p_value,
                    adjusted_alpha: 0.0,
                    significant: false,
                });
            }
        }
        if rows.is_empty() {
            continue;
        }
        let report = holm(&rows.iter().map(|r| r.p_value).collect::<Vec<_>>(), alpha)?;
        for e in &report.entries {
            rows[e.input_index].adjusted_alpha = e.adjusted_alpha;
            rows[e.input_index].significant = e.significant;
        }
        out.extend(rows);
    }
    Ok(out)
}
