//! Significance tests and summaries over [`RunResult`](crate::evaluation::RunResult) collections.

pub mod compare;
pub mod correlation;
pub mod frequency;
pub mod holm;
pub mod ranks;
pub mod wilcoxon;

pub use compare::{compare, ComparisonRow};
pub use correlation::{pearson, CorrelationStrength};
pub use frequency::{selected_configs, selection_frequency, GeneFrequency};
pub use holm::{holm, HolmEntry, HolmReport};
pub use ranks::{average_ranks, average_ranks_of, paired_sample, Metric, RankPair};
pub use wilcoxon::{wilcoxon, wilcoxon_exact, wilcoxon_normal, PairedSample, WilcoxonMethod, WilcoxonResult};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("paired samples differ in length ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("not enough values")]
    Empty,
    #[error("p-value {0} outside [0, 1]")]
    PValueRange(f64),
    #[error("zero variance")]
    ZeroVariance,
    #[error("system `{system}` has no result for dataset `{dataset}`")]
    MissingDataset { system: String, dataset: String },
    #[error("no results for {system} at delta {delta}")]
    NoResults { system: String, delta: f64 },
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
}
