use std::io::Write;
use std::path::{Path, PathBuf};

use autopu::classifiers::{full_registry, registry};
use autopu::evaluation::RunResult;
use autopu::stats::{compare, selected_configs, selection_frequency, ComparisonRow, Metric};
use autopu::{search_space_size, SearchSpace, SpaceVariant};
use serde::Serialize;

use crate::error::CliError;

/// Result files named on the command line; directories contribute their `*.json` files.
pub fn expand_paths(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

pub fn load_results(paths: &[PathBuf]) -> Result<Vec<RunResult>, CliError> {
    expand_paths(paths)?
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))
        })
        .collect()
}

fn writer(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?),
        None => Box::new(std::io::stdout()),
    })
}

fn write_rows<T: Serialize>(rows: &[T], out: Option<&Path>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(writer(out)?);
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn comparison_rows(results: &[RunResult], metrics: &[Metric], alpha: f64) -> Result<Vec<ComparisonRow>, CliError> {
    let mut rows = Vec::new();
    for &m in metrics {
        rows.extend(compare(results, m, alpha).map_err(|e| CliError::Validation(e.to_string()))?);
    }
    Ok(rows)
}

pub fn read_comparison_csv(text: &str) -> Result<Vec<ComparisonRow>, CliError> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Validation(e.to_string()))
}

pub fn cmd_compare(paths: &[PathBuf], metrics: &[Metric], alpha: f64, out: Option<&Path>) -> Result<Vec<ComparisonRow>, CliError> {
    let results = load_results(paths)?;
    let rows = comparison_rows(&results, metrics, alpha)?;
    write_rows(&rows, out)?;
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyRow {
    pub variant: String,
    pub hyperparameter: String,
    pub most_selected: String,
    pub n_selected: usize,
    pub frequency_percent: f64,
    pub baseline_percent: f64,
    pub difference_percent: f64,
}

pub fn frequency_rows(results: &[RunResult]) -> Vec<FrequencyRow> {
    let mut rows = Vec::new();
    for variant in [SpaceVariant::Base, SpaceVariant::Extended] {
        let same: Vec<RunResult> =
            results.iter().filter(|r| r.variant.as_deref() == Some(variant.as_str())).cloned().collect();
        let configs = selected_configs(&same);
        if configs.is_empty() {
            continue;
        }
        let space = SearchSpace::new(variant, registry());
        for g in selection_frequency(&configs, &space) {
            rows.push(FrequencyRow {
                variant: variant.as_str().to_string(),
                hyperparameter: g.hyperparameter,
                most_selected: g.most_selected,
                n_selected: g.n_selected,
                frequency_percent: 100.0 * g.frequency,
                baseline_percent: 100.0 * g.baseline,
                difference_percent: 100.0 * g.difference,
            });
        }
    }
    rows
}

pub fn cmd_freq(paths: &[PathBuf], out: Option<&Path>) -> Result<Vec<FrequencyRow>, CliError> {
    let results = load_results(paths)?;
    let rows = frequency_rows(&results);
    if rows.is_empty() {
        return Err(CliError::Validation("no selected configurations in the given results".into()));
    }
    write_rows(&rows, out)?;
    Ok(rows)
}

/// Search-space size for a variant, with the full 18-slot list or only the
/// implemented classifiers.
pub fn space_size(variant: SpaceVariant, available_only: bool) -> Result<u64, CliError> {
    let keys = if available_only { registry() } else { full_registry() };
    search_space_size(&SearchSpace::new(variant, keys)).map_err(|e| CliError::Validation(e.to_string()))
}
