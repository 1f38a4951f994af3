use std::path::{Path, PathBuf};

use autopu::classifiers::{registry, registry_digest};
use autopu::evaluation::{nested_cv, outer_fold_plan, RunResult};
use autopu::search::SearchTrace;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{io_err, CliError};
use crate::ingest::ingest_csv;
use crate::spec::ExperimentSpec;

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub deterministic_order: bool,
    pub output_dir: Option<PathBuf>,
    pub quiet: bool,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub manifest: PathBuf,
    pub result_files: Vec<PathBuf>,
    pub fold_plan_files: Vec<PathBuf>,
    pub results: Vec<RunResult>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    spec: &'a ExperimentSpec,
    seed: u64,
    workers: usize,
    deterministic_order: bool,
    dataset_sha256: String,
    registry: Vec<String>,
    registry_sha256: String,
    fold_plans: Vec<String>,
    results: Vec<String>,
    summary: String,
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    dataset: &'a str,
    delta: f64,
    system: String,
    precision: f64,
    recall: f64,
    f_measure: f64,
    mean_evaluations: f64,
    failed_folds: usize,
    seconds: f64,
}

/// File tag for a δ value, e.g. `d20` for 0.2.
pub fn delta_tag(delta: f64) -> String {
    format!("d{:02}", (delta * 100.0).round() as u64)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(io_err(path))
}

fn relative(path: &Path, base: &Path) -> String {
    path.strip_prefix(base).unwrap_or(path).display().to_string()
}

/// Runs every (system, δ) of `spec` under nested cross-validation.
pub fn cmd_run(spec: &ExperimentSpec, opts: &RunOptions) -> Result<RunOutcome, CliError> {
    let mut spec = spec.clone();
    if let Some(dir) = &opts.output_dir {
        spec.output_dir = dir.clone();
    }
    if let Some(w) = opts.workers {
        spec.workers = Some(w);
    }
    spec.validate()?;
    let seed = spec.resolve_seed(opts.seed)?;
    spec.seed = Some(seed);
    let workers = if opts.deterministic_order {
        1
    } else {
        spec.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    };
    let dataset = ingest_csv(&spec.dataset, &spec.label_column, spec.missing)?;
    let dataset_bytes = std::fs::read(&spec.dataset).map_err(io_err(&spec.dataset))?;
    let id = spec.dataset_id();
    let out = spec.output_dir.clone();
    for sub in ["folds", "results", "traces"] {
        std::fs::create_dir_all(out.join(sub)).map_err(io_err(&out))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let plan = outer_fold_plan(&dataset, spec.outer_folds, seed).map_err(|e| CliError::Validation(e.to_string()))?;
    let mut outcome = RunOutcome { manifest: out.join("manifest.json"), result_files: vec![], fold_plan_files: vec![], results: vec![] };
    let mut summary = Vec::new();
    for &delta in &spec.deltas {
        let tag = delta_tag(delta);
        let plan_file = out.join("folds").join(format!("{id}__{tag}__seed{seed}.json"));
        write_json(&plan_file, &plan)?;
        outcome.fold_plan_files.push(plan_file);
        for system_id in &spec.systems {
            let system = spec.system(system_id);
            let label = match system.variant() {
                Some(v) => format!("{}-{v}", system.id()),
                None => system.id(),
            };
            if !opts.quiet {
                eprintln!("[{id} {label} delta={delta}] running {} outer folds", plan.k);
            }
            let mut result = pool.install(|| nested_cv(system.as_ref(), &dataset, &id, &plan, delta, seed));
            let traces: Vec<Option<SearchTrace>> = result.folds.iter_mut().map(|f| f.trace.take()).collect();
            if !opts.quiet {
                for f in &result.folds {
                    match &f.error {
                        Some(e) => eprintln!("  fold {}: failed: {e}", f.fold + 1),
                        None => eprintln!(
                            "  fold {}: best objective {:.4}, {} evaluations, test F {:.4}",
                            f.fold + 1,
                            f.best_objective,
                            f.evaluations,
                            f.test.f_measure
                        ),
                    }
                }
            }
            let stem = format!("{id}__{label}__{tag}");
            let result_file = out.join("results").join(format!("{stem}.json"));
            std::fs::write(&result_file, result.payload_json() + "\n").map_err(io_err(&result_file))?;
            if traces.iter().any(Option::is_some) {
                write_json(&out.join("traces").join(format!("{stem}.json")), &traces)?;
            }
            summary.push((result.clone(), label));
            outcome.result_files.push(result_file);
            outcome.results.push(result);
        }
    }

    let summary_file = out.join("summary.csv");
    let mut w = csv::Writer::from_path(&summary_file).map_err(|e| CliError::Runtime(e.to_string()))?;
    for (r, label) in &summary {
        w.serialize(SummaryRow {
            dataset: &r.dataset,
            delta: r.delta,
            system: label.clone(),
            precision: r.mean.precision,
            recall: r.mean.recall,
            f_measure: r.mean.f_measure,
            mean_evaluations: r.mean_evaluations,
            failed_folds: r.folds.iter().filter(|f| f.failed).count(),
            seconds: r.timing.as_ref().map_or(0.0, |t| t.total_seconds),
        })
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    w.flush().map_err(io_err(&summary_file))?;

    let manifest = Manifest {
        tool: "autopu",
        version: env!("CARGO_PKG_VERSION"),
        spec: &spec,
        seed,
        workers,
        deterministic_order: opts.deterministic_order,
        dataset_sha256: hex::encode(Sha256::digest(&dataset_bytes)),
        registry: registry().iter().map(|k| k.to_string()).collect(),
        registry_sha256: registry_digest(),
        fold_plans: outcome.fold_plan_files.iter().map(|p| relative(p, &out)).collect(),
        results: outcome.result_files.iter().map(|p| relative(p, &out)).collect(),
        summary: relative(&summary_file, &out),
    };
    write_json(&outcome.manifest, &manifest)?;
    Ok(outcome)
}
