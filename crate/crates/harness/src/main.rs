use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use gmote_harness::dataset::{toy_example1, toy_example2, write_csv};
use gmote_harness::report::{compare, summarize, Pairing};
use gmote_harness::results::{read_results, write_results};
use gmote_harness::{run_experiment, ExperimentSpec, Metric, Result};

#[derive(Parser)]
#[command(
    name = "gmote-lab",
    version,
    about = "Oversampling benchmark for imbalanced binary classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PairingArg {
    Dataset,
    Fold,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for the results file (the config's file name is kept).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the per-dataset mean table of one metric.
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long, default_value = "accuracy")]
        metric: String,
        /// Print the long-format CSV instead of the aligned table.
        #[arg(long)]
        csv: bool,
    },
    /// Paired Wilcoxon tests of a baseline against every other method.
    Compare {
        #[arg(long)]
        results: PathBuf,
        #[arg(long, default_value = "GMOTE")]
        baseline: String,
        /// Metrics to test, comma separated.
        #[arg(long, default_value = "accuracy,f1", value_delimiter = ',')]
        metrics: Vec<String>,
        #[arg(long, value_enum, default_value = "dataset")]
        pairing: PairingArg,
    },
    /// Write one of the two toy datasets as CSV.
    Toy {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        which: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, seed, out } => {
            let mut spec = ExperimentSpec::from_file(&config)?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            let base = config.parent().unwrap_or(Path::new("."));
            let output = match out {
                Some(dir) => dir.join(spec.output.file_name().unwrap_or("results.csv".as_ref())),
                None => base.join(&spec.output),
            };
            let rows = run_experiment(&spec, base)?;
            write_results(&output, &rows)?;
            let failed = rows
                .iter()
                .filter(|r| {
                    r.fallback
                        .as_deref()
                        .is_some_and(|f| f.starts_with("error"))
                })
                .count();
            eprintln!(
                "wrote {} rows to {} ({failed} failed cells)",
                rows.len(),
                output.display()
            );
        }
        Command::Report {
            results,
            metric,
            csv,
        } => {
            let metric: Metric = metric.parse()?;
            let tables = summarize(&read_results(results)?);
            let table = tables.table(metric).expect("every metric has a table");
            print!("{}", if csv { table.to_csv() } else { table.to_text() });
        }
        Command::Compare {
            results,
            baseline,
            metrics,
            pairing,
        } => {
            let metrics = metrics
                .iter()
                .map(|m| m.parse())
                .collect::<Result<Vec<Metric>>>()?;
            let pairing = match pairing {
                PairingArg::Dataset => Pairing::Dataset,
                PairingArg::Fold => Pairing::Fold,
            };
            print!(
                "{}",
                compare(&read_results(results)?, &baseline, &metrics, pairing).to_text()
            );
        }
        Command::Toy { which, seed, out } => {
            let data = if which == 1 {
                toy_example1(seed)
            } else {
                toy_example2(seed)
            };
            write_csv(&data, &out, "class")?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
