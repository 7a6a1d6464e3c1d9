//! `emoharness` — prompt-based multi-label emotion detection from the
//! command line.
//!
//! Subcommands mirror the pipeline stages: `ingest` validates a dataset,
//! `run` executes a configured experiment, `score` evaluates a predictions
//! file, `report` renders a stored run, and `compare` diffs two runs.
//!
//! Exit codes: 0 on success, 1 for validation problems (bad arguments,
//! config, dataset or artifact contents), 2 for runtime failures (provider,
//! cache or file-system errors mid-run).

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use emoharness::{
    compare_artifacts, dataset_stats, emit_report, load_dataset, render_comparison_markdown,
    render_markdown, run_experiment, score_predictions, ExperimentConfig, ReportFormat,
    RunArtifact, RunError,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "emoharness",
    version,
    about = "Prompting and evaluation harness for multi-label emotion detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a dataset CSV and summarize its labels.
    Ingest {
        /// Dataset file with `id,text` and one 0/1 column per label.
        csv: PathBuf,
        /// Also print a token-length histogram as CSV.
        #[arg(long)]
        stats: bool,
        /// Histogram bucket width in whitespace tokens.
        #[arg(long, default_value_t = 5)]
        bucket_width: usize,
    },
    /// Run the experiment described by a TOML config file.
    Run {
        /// Experiment configuration (see README for the schema).
        config: PathBuf,
    },
    /// Score a predictions CSV against a gold dataset CSV.
    Score {
        /// Gold dataset (`id,text,label...` columns).
        #[arg(long)]
        gold: PathBuf,
        /// Predictions (`id` plus the same label columns).
        #[arg(long)]
        pred: PathBuf,
    },
    /// Render a stored run directory as markdown or CSV files.
    Report {
        /// A run directory produced by `run`.
        run_dir: PathBuf,
        /// Output format: `markdown` or `csv`.
        #[arg(long, default_value = "markdown")]
        format: String,
    },
    /// Compare the metrics of two stored runs.
    Compare {
        run_dir_a: PathBuf,
        run_dir_b: PathBuf,
    },
}

/// A failure with the exit code it should map to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn from_run_error(err: RunError) -> Self {
        if err.is_validation() {
            Failure::validation(err.to_string())
        } else {
            Failure::runtime(err.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are successes; usage mistakes are validation.
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Ingest {
            csv,
            stats,
            bucket_width,
        } => ingest(&csv, stats, bucket_width),
        Command::Run { config } => run(&config),
        Command::Score { gold, pred } => score(&gold, &pred),
        Command::Report { run_dir, format } => report(&run_dir, &format),
        Command::Compare {
            run_dir_a,
            run_dir_b,
        } => compare(&run_dir_a, &run_dir_b),
    }
}

fn ingest(csv: &Path, stats: bool, bucket_width: usize) -> Result<(), Failure> {
    if bucket_width == 0 {
        return Err(Failure::validation("--bucket-width must be at least 1"));
    }
    let split = load_dataset(csv, None).map_err(|e| Failure::validation(e.to_string()))?;

    println!(
        "{}: {} examples, schema [{}]",
        csv.display(),
        split.len(),
        split.schema.labels().join(", ")
    );
    for (idx, label) in split.schema.labels().iter().enumerate() {
        let positives = split.examples.iter().filter(|e| e.gold.get(idx)).count();
        println!("  {label}: {positives} positive");
    }
    let neutral = split.examples.iter().filter(|e| e.gold.is_none()).count();
    println!("  (no label): {neutral}");

    if stats {
        let histogram = dataset_stats(&split, bucket_width)
            .map_err(|e| Failure::validation(e.to_string()))?;
        println!("token-length histogram (bucket width {bucket_width}):");
        print!("{}", histogram.to_csv());
    }
    Ok(())
}

fn run(config_path: &Path) -> Result<(), Failure> {
    let config =
        ExperimentConfig::load(config_path).map_err(|e| Failure::validation(e.to_string()))?;
    let runtime = tokio::runtime::Runtime::new()
        .map_err(|e| Failure::runtime(format!("starting async runtime: {e}")))?;
    let artifact = runtime
        .block_on(run_experiment(config))
        .map_err(Failure::from_run_error)?;

    let metrics = &artifact.metrics;
    println!(
        "run `{}`: {} examples, macro-F1 {:.4}, micro-F1 {:.4}, {} parse failures",
        artifact.config.run_id,
        metrics.n_examples,
        metrics.f1_macro,
        metrics.f1_micro,
        metrics.parse_failure_count
    );
    println!(
        "provider calls {}, cache hits {}, wall time {} ms",
        artifact.timing.provider_calls, artifact.timing.cache_hits, artifact.timing.wall_ms
    );
    println!("artifact: {}", artifact.dir.display());
    Ok(())
}

fn score(gold_path: &Path, pred_path: &Path) -> Result<(), Failure> {
    let gold = load_dataset(gold_path, None).map_err(|e| Failure::validation(e.to_string()))?;
    let metrics =
        score_predictions(&gold, pred_path).map_err(|e| Failure::validation(e.to_string()))?;
    print!("{}", metrics.per_label_csv());
    print!("{}", metrics.summary_csv());
    Ok(())
}

fn report(run_dir: &Path, format: &str) -> Result<(), Failure> {
    let format: ReportFormat = format
        .parse()
        .map_err(|e: String| Failure::validation(e))?;
    let artifact = RunArtifact::load(run_dir).map_err(Failure::from_run_error)?;
    let written = emit_report(&artifact, format).map_err(Failure::from_run_error)?;
    match format {
        ReportFormat::Markdown => print!("{}", render_markdown(&artifact)),
        ReportFormat::Csv => {
            for path in written {
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn compare(dir_a: &Path, dir_b: &Path) -> Result<(), Failure> {
    let a = RunArtifact::load(dir_a).map_err(Failure::from_run_error)?;
    let b = RunArtifact::load(dir_b).map_err(Failure::from_run_error)?;
    let comparison =
        compare_artifacts(&a, &b).map_err(|e| Failure::validation(e.to_string()))?;
    print!(
        "{}",
        render_comparison_markdown(&comparison, &a.config.run_id, &b.config.run_id)
    );
    Ok(())
}
