use std::path::{Path, PathBuf};

use autopu::baselines::{BaselineGrid, BaselineMethod, BaselineSystem};
use autopu::classifiers::deep_forest::DeepForestParams;
use autopu::classifiers::{is_available, registry};
use autopu::evaluation::System;
use autopu::search::{AutoPuSystem, BoParams, EboParams, GaParams, Optimiser};
use autopu::{ClassifierKey, SearchSpace, SpaceVariant};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::ingest::MissingPolicy;

pub const SEED_ENV: &str = "PU_AUTOML_SEED";
pub const SYSTEM_IDS: [&str; 5] = ["ga", "bo", "ebo", "sem", "dfpu"];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemSpec {
    pub spy_rates: Option<Vec<f64>>,
    pub spy_tolerances: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DfPuSpec {
    pub rn_rates: Option<Vec<f64>>,
    pub iteration_counts: Option<Vec<usize>>,
    pub n_trees: usize,
    pub max_layers: usize,
}

impl Default for DfPuSpec {
    fn default() -> Self {
        let d = DeepForestParams::default();
        DfPuSpec { rn_rates: None, iteration_counts: None, n_trees: d.n_trees, max_layers: d.max_layers }
    }
}

/// An experiment: one dataset, several δ values and systems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub dataset: PathBuf,
    pub label_column: String,
    #[serde(default)]
    pub dataset_id: Option<String>,
    #[serde(default)]
    pub missing: MissingPolicy,
    pub deltas: Vec<f64>,
    pub systems: Vec<String>,
    #[serde(default = "default_variant")]
    pub variant: SpaceVariant,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default = "default_outer_folds")]
    pub outer_folds: usize,
    /// Classifier keys to search over; defaults to the whole registry.
    #[serde(default)]
    pub classifiers: Option<Vec<String>>,
    #[serde(default)]
    pub ga: GaParams,
    #[serde(default)]
    pub bo: BoParams,
    #[serde(default)]
    pub ebo: EboParams,
    #[serde(default)]
    pub sem: SemSpec,
    #[serde(default)]
    pub dfpu: DfPuSpec,
}

fn default_variant() -> SpaceVariant {
    SpaceVariant::Base
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

fn default_outer_folds() -> usize {
    autopu::evaluation::OUTER_FOLDS
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("spec: {e}")))
    }

    /// Parses a spec file; relative paths are taken from the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let mut spec = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if spec.dataset.is_relative() {
            spec.dataset = base.join(&spec.dataset);
        }
        if spec.output_dir.is_relative() {
            spec.output_dir = base.join(&spec.output_dir);
        }
        Ok(spec)
    }

    pub fn dataset_id(&self) -> String {
        self.dataset_id.clone().unwrap_or_else(|| {
            self.dataset.file_stem().map_or("dataset".into(), |s| s.to_string_lossy().into_owned())
        })
    }

    /// Seed from the spec, else from `PU_AUTOML_SEED`, else 0.
    pub fn resolve_seed(&self, flag: Option<u64>) -> Result<u64, CliError> {
        if let Some(s) = flag.or(self.seed) {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| CliError::Validation(format!("{SEED_ENV}=`{v}` is not an integer"))),
            Err(_) => Ok(0),
        }
    }

    pub fn classifier_keys(&self) -> Vec<ClassifierKey> {
        match &self.classifiers {
            Some(keys) => keys.iter().map(|k| ClassifierKey::new(k.as_str())).collect(),
            None => registry(),
        }
    }

    pub fn space(&self) -> SearchSpace {
        SearchSpace::new(self.variant, self.classifier_keys())
    }

    pub fn deep_forest(&self) -> DeepForestParams {
        DeepForestParams { n_trees: self.dfpu.n_trees, max_layers: self.dfpu.max_layers, ..DeepForestParams::default() }
    }

    pub fn grid(&self, method: BaselineMethod) -> BaselineGrid {
        let mut grid = BaselineGrid::for_method(method);
        let overrides: [Option<Vec<f64>>; 2] = match method {
            BaselineMethod::Sem => [self.sem.spy_rates.clone(), self.sem.spy_tolerances.clone()],
            BaselineMethod::DfPu => [
                self.dfpu.rn_rates.clone(),
                self.dfpu.iteration_counts.as_ref().map(|v| v.iter().map(|&c| c as f64).collect()),
            ],
        };
        for (slot, o) in grid.hyperparameters.iter_mut().zip(overrides) {
            if let Some(values) = o {
                slot.1 = values;
            }
        }
        grid
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Validation(m));
        if !self.dataset.is_file() {
            return bad(format!("dataset {} does not exist", self.dataset.display()));
        }
        if self.deltas.is_empty() {
            return bad("deltas must not be empty".into());
        }
        if let Some(d) = self.deltas.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
            return bad(format!("delta {d} must lie in (0, 1)"));
        }
        if self.systems.is_empty() {
            return bad("systems must not be empty".into());
        }
        for (i, s) in self.systems.iter().enumerate() {
            if !SYSTEM_IDS.contains(&s.as_str()) {
                return bad(format!("unknown system `{s}` (expected one of {SYSTEM_IDS:?})"));
            }
            if self.systems[..i].contains(s) {
                return bad(format!("system `{s}` listed twice"));
            }
        }
        if self.outer_folds < 2 {
            return bad("outer_folds must be at least 2".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        let keys = self.classifier_keys();
        if let Some(k) = keys.iter().find(|k| !is_available(k)) {
            return bad(format!("classifier `{k}` is not available"));
        }
        self.space().check().map_err(|e| CliError::Validation(e.to_string()))?;
        self.ga.check().map_err(|e| CliError::Validation(format!("ga: {e}")))?;
        self.bo.check().map_err(|e| CliError::Validation(format!("bo: {e}")))?;
        self.ebo.check().map_err(|e| CliError::Validation(format!("ebo: {e}")))?;
        for m in [BaselineMethod::Sem, BaselineMethod::DfPu] {
            let g = self.grid(m);
            g.check().map_err(CliError::Validation)?;
            for (name, values) in &g.hyperparameters {
                let ok = match name.as_str() {
                    "iteration_count" => values.iter().all(|v| *v >= 1.0 && v.fract() == 0.0),
                    _ => values.iter().all(|v| (0.0..=1.0).contains(v)),
                };
                if !ok {
                    return bad(format!("{}: invalid values for {name}: {values:?}", m.id()));
                }
            }
        }
        if self.dfpu.n_trees == 0 || self.dfpu.max_layers == 0 {
            return bad("dfpu: n_trees and max_layers must be at least 1".into());
        }
        Ok(())
    }

    pub fn system(&self, id: &str) -> Box<dyn System> {
        let space = self.space();
        match id {
            "ga" => Box::new(AutoPuSystem::new(Optimiser::Ga(self.ga.clone()), space)),
            "bo" => Box::new(AutoPuSystem::new(Optimiser::Bo(self.bo.clone()), space)),
            "ebo" => Box::new(AutoPuSystem::new(Optimiser::Ebo(self.ebo.clone()), space)),
            other => {
                let method = BaselineMethod::from_id(other).expect("validated system id");
                Box::new(BaselineSystem { grid: self.grid(method), forest: self.deep_forest() })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_spec_with_overrides() {
        let s = ExperimentSpec::from_toml(
            r#"
            dataset = "d.csv"
            label_column = "y"
            deltas = [0.2, 0.4]
            systems = ["ga", "sem"]
            variant = "extended"
            [ga]
            population_size = 10
            generations = 5
            [sem]
            spy_rates = [0.1]
            "#,
        )
        .unwrap();
        assert_eq!(s.ga.population_size, 10);
        assert_eq!(s.bo, BoParams::default());
        assert_eq!(s.grid(BaselineMethod::Sem).len(), 11);
        assert_eq!(s.dataset_id(), "d");
        assert_eq!(s.variant, SpaceVariant::Extended);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(ExperimentSpec::from_toml("dataset='a'\nlabel_column='y'\ndeltas=[0.2]\nsystems=['ga']\ncolour=1").is_err());
    }
}
