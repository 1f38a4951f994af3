use std::path::PathBuf;
use std::process::ExitCode;

use autopu::evaluation::engineer_pu;
use autopu::stats::Metric;
use autopu::SpaceVariant;
use autopu_cli::ingest::write_pu_csv;
use autopu_cli::{cmd_compare, cmd_freq, cmd_run, ingest_csv, report, space_size, CliError, ExperimentSpec, MissingPolicy, RunOptions};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "autopu", version, about = "Auto-ML search over two-step positive-unlabelled learning pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Base,
    Extended,
}

impl From<VariantArg> for SpaceVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Base => SpaceVariant::Base,
            VariantArg::Extended => SpaceVariant::Extended,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load a labelled CSV and print its size and positive share.
    Ingest {
        csv: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(long, value_enum, default_value = "error")]
        missing: MissingPolicy,
        #[arg(long)]
        json: bool,
    },
    /// Hide a fraction of the positives and write the PU dataset.
    Engineer {
        csv: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "error")]
        missing: MissingPolicy,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment spec under nested cross-validation.
    Run {
        spec: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Single worker, so evaluation order is fixed as well as results.
        #[arg(long)]
        deterministic_order: bool,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long, short)]
        quiet: bool,
    },
    /// Ranks, Wilcoxon tests and Holm decisions between systems.
    Compare {
        #[arg(required = true)]
        results: Vec<PathBuf>,
        #[arg(long = "metric", default_values = ["precision", "recall", "f_measure"])]
        metrics: Vec<String>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Selection frequency of each hyperparameter value.
    Freq {
        #[arg(required = true)]
        results: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the number of configurations in a search space.
    Space {
        #[arg(long, value_enum, default_value = "base")]
        variant: VariantArg,
        /// Count only the classifiers this build implements.
        #[arg(long)]
        available_only: bool,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest { csv, label, missing, json } => {
            let r = report(&ingest_csv(&csv, &label, missing)?);
            if json {
                println!("{}", serde_json::to_string(&r).map_err(|e| CliError::Runtime(e.to_string()))?);
            } else {
                println!("{r}");
            }
        }
        Command::Engineer { csv, label, delta, seed, missing, out } => {
            let d = ingest_csv(&csv, &label, missing)?;
            let pu = engineer_pu(&d, delta, seed).map_err(|e| CliError::Validation(e.to_string()))?;
            let names: Vec<String> = match d.names() {
                Some(n) => n.to_vec(),
                None => (0..d.n_features()).map(|i| format!("x{i}")).collect(),
            };
            write_pu_csv(&pu, &names, &out)?;
        }
        Command::Run { spec, seed, workers, deterministic_order, output_dir, quiet } => {
            let spec = ExperimentSpec::load(&spec)?;
            let opts = RunOptions { seed, workers, deterministic_order, output_dir, quiet };
            let outcome = cmd_run(&spec, &opts)?;
            println!("{}", outcome.manifest.display());
        }
        Command::Compare { results, metrics, alpha, out } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(CliError::Validation(format!("alpha {alpha} outside (0, 1)")));
            }
            let metrics = metrics
                .iter()
                .map(|m| m.parse::<Metric>().map_err(|e| CliError::Validation(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            cmd_compare(&results, &metrics, alpha, out.as_deref())?;
        }
        Command::Freq { results, out } => {
            cmd_freq(&results, out.as_deref())?;
        }
        Command::Space { variant, available_only } => {
            println!("{}", space_size(variant.into(), available_only)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
