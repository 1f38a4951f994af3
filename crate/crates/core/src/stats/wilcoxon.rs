use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::StatsError;

/// Above this many non-zero differences the normal approximation is used.
pub const EXACT_LIMIT: usize = 12;

/// Per-dataset metric values of two systems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pub ids: Vec<String>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl PairedSample {
    pub fn new(ids: Vec<String>, a: Vec<f64>, b: Vec<f64>) -> Result<Self, StatsError> {
        if a.len() != b.len() || ids.len() != a.len() {
            return Err(StatsError::LengthMismatch { a: a.len(), b: b.len() });
        }
        Ok(PairedSample { ids, a, b })
    }

    /// Unnamed pairs, ids `0..n`.
    pub fn unnamed(a: Vec<f64>, b: Vec<f64>) -> Result<Self, StatsError> {
        let ids = (0..a.len()).map(|i| i.to_string()).collect();
        Self::new(ids, a, b)
    }

    pub fn differences(&self) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(x, y)| x - y).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WilcoxonMethod {
    Exact,
    Normal,
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub p_value: f64,
    /// Sum of ranks of positive differences.
    pub w_plus: f64,
    pub n_nonzero: usize,
    pub method: WilcoxonMethod,
}

impl WilcoxonResult {
    pub fn degenerate(&self) -> bool {
        self.method == WilcoxonMethod::Degenerate
    }
}

/// Mean ranks of `|d|` (1-based) and the tie-group sizes.
fn signed_ranks(nonzero: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..nonzero.len()).collect();
    order.sort_by(|&i, &j| nonzero[i].abs().total_cmp(&nonzero[j].abs()));
    let mut ranks = vec![0.0; nonzero.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && nonzero[order[j + 1]].abs() == nonzero[order[i]].abs() {
            j += 1;
        }
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = mean;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    (ranks, ties)
}

fn nonzero(diffs: &[f64]) -> Vec<f64> {
    diffs.iter().copied().filter(|d| *d != 0.0).collect()
}

fn w_plus(d: &[f64], ranks: &[f64]) -> f64 {
    d.iter().zip(ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum()
}

fn degenerate() -> WilcoxonResult {
    WilcoxonResult { p_value: 1.0, w_plus: 0.0, n_nonzero: 0, method: WilcoxonMethod::Degenerate }
}

/// Exact two-sided p-value from the permutation distribution of `W+`.
///
/// Mean ranks are doubled so that the distribution lives on integers.
pub fn wilcoxon_exact(diffs: &[f64]) -> WilcoxonResult {
    let d = nonzero(diffs);
    if d.is_empty() {
        return degenerate();
    }
    let (ranks, _) = signed_ranks(&d);
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let all: f64 = counts.iter().sum();
    let w = w_plus(&d, &ranks);
    let w2 = (w * 2.0).round() as usize;
    let lower: f64 = counts[..=w2].iter().sum::<f64>() / all;
    let upper: f64 = counts[w2..].iter().sum::<f64>() / all;
    WilcoxonResult {
        p_value: (2.0 * lower.min(upper)).min(1.0),
        w_plus: w,
        n_nonzero: d.len(),
        method: WilcoxonMethod::Exact,
    }
}

/// Normal approximation with tie and continuity corrections.
pub fn wilcoxon_normal(diffs: &[f64]) -> WilcoxonResult {
    let d = nonzero(diffs);
    if d.is_empty() {
        return degenerate();
    }
    let (ranks, ties) = signed_ranks(&d);
    let n = d.len() as f64;
    let w = w_plus(&d, &ranks);
    let mean = n * (n + 1.0) / 4.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term;
    let p_value = if var <= 0.0 {
        1.0
    } else {
        let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
        let normal = Normal::standard();
        (2.0 * (1.0 - normal.cdf(z))).min(1.0)
    };
    WilcoxonResult { p_value, w_plus: w, n_nonzero: d.len(), method: WilcoxonMethod::Normal }
}

/// Two-sided signed-rank test; exact up to [`EXACT_LIMIT`] non-zero
/// differences, normal approximation above.
pub fn wilcoxon(sample: &PairedSample) -> WilcoxonResult {
    let d = sample.differences();
    if nonzero(&d).len() <= EXACT_LIMIT {
        wilcoxon_exact(&d)
    } else {
        wilcoxon_normal(&d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_are_degenerate() {
        let s = PairedSample::unnamed(vec![0.3, 0.5], vec![0.3, 0.5]).unwrap();
        let r = wilcoxon(&s);
        assert_eq!(r.p_value, 1.0);
        assert!(r.degenerate());
    }

    #[test]
    fn five_positive_differences() {
        let r = wilcoxon_exact(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!((r.p_value - 2.0 / 32.0).abs() < 1e-15);
        assert_eq!(r.w_plus, 15.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(PairedSample::unnamed(vec![1.0], vec![]).is_err());
    }
}
