use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolmEntry {
    /// Position of the hypothesis in the caller's input.
    pub input_index: usize,
    pub p_value: f64,
    pub adjusted_alpha: f64,
    pub significant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolmReport {
    pub alpha: f64,
    /// Hypotheses in ascending p order.
    pub entries: Vec<HolmEntry>,
    /// Sorted position of the first non-significant hypothesis, if any.
    pub stop_index: Option<usize>,
}

impl HolmReport {
    /// The entry for input hypothesis `i`.
    pub fn for_input(&self, i: usize) -> Option<&HolmEntry> {
        self.entries.iter().find(|e| e.input_index == i)
    }

    /// Significance decisions in input order.
    pub fn decisions(&self) -> Vec<bool> {
        let mut out = vec![false; self.entries.len()];
        for e in &self.entries {
            out[e.input_index] = e.significant;
        }
        out
    }
}

/// Holm step-down: the i-th smallest p-value (0-based) is compared with
/// `alpha / (n - i)`; the first failure makes it and every later hypothesis
/// non-significant.
pub fn holm(pvalues: &[f64], alpha: f64) -> Result<HolmReport, StatsError> {
    if pvalues.is_empty() {
        return Err(StatsError::Empty);
    }
    if let Some(&p) = pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(StatsError::PValueRange(p));
    }
    let n = pvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]).then(a.cmp(&b)));
    let mut stop_index = None;
    let entries = order
        .iter()
        .enumerate()
        .map(|(rank, &i)| {
            let adjusted_alpha = alpha / (n - rank) as f64;
            let significant = stop_index.is_none() && pvalues[i] < adjusted_alpha;
            if !significant && stop_index.is_none() {
                stop_index = Some(rank);
            }
            HolmEntry { input_index: i, p_value: pvalues[i], adjusted_alpha, significant }
        })
        .collect();
    Ok(HolmReport { alpha, entries, stop_index })
}
