//! Metrics, folds, the internal-CV objective and the nested-CV driver.

pub mod engineer;
pub mod folds;
pub mod metrics;
pub mod nested;
pub mod objective;

pub use engineer::{engineer_pu, hidden_count, EngineerError};
pub use folds::{stratified_kfold, FoldError, FoldPlan};
pub use metrics::{f_measure, metrics, ConfusionCounts, Metrics};
pub use nested::{nested_cv, outer_fold_plan, FoldResult, RunResult, Selection, System, OUTER_FOLDS};
pub use objective::{objective, ObjectiveError, INTERNAL_FOLDS};
