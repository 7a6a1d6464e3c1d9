//! Experiment orchestration: config in, run artifact out.
//!
//! A run renders one prompt per eval example, dispatches them with bounded
//! concurrency, parses and scores every response, and persists a
//! self-describing artifact directory:
//!
//! ```text
//! <output_dir>/<run_id>/
//!   config.toml       resolved config snapshot (defaults materialized)
//!   records.jsonl     one record per eval example, in split order
//!   predictions.csv   id + per-label 0/1 columns
//!   metrics.json      the full metrics report
//!   run.json          timing and dispatch counters
//! ```
//!
//! Artifacts appear atomically: everything is written to a temp directory
//! that is renamed into place on completion, so an interrupted run leaves
//! nothing at the final path. A lock file serializes runs per output
//! directory.

mod config;
mod records;
mod report;
mod score;

pub use config::{
    ConfigError, DatasetSection, DispatchSection, ExperimentConfig, PromptSection,
};
pub use records::{read_records, RecordError, RecordWriter, RunRecord};
pub use report::{
    compare_artifacts, emit_report, render_comparison_markdown, render_markdown, ReportFormat,
};
pub use score::{export_predictions, load_predictions, score_predictions, ScoreError};

use crate::client::{CacheError, Client, CompletionError, ResponseCache};
use crate::dataset::{load_dataset, DatasetError, DatasetSplit};
use crate::metrics::{MetricsError, MetricsReport};
use crate::parse::{parse_emotions, ParseStatus};
use crate::prompt::{render_prompt_for, select_examples, PromptError, RenderedPrompt};
use crate::schema::{LabelSchema, LabelSet, SchemaError};
use futures::StreamExt;
use serde::{Deserialize, Serialize};
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("prompting: {0}")]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("provider: {0}")]
    Completion(#[from] CompletionError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("run `{0}` already exists in the output directory")]
    RunExists(String),
    #[error("output directory is locked by another run (lock file {0})")]
    Locked(PathBuf),
    #[error("artifact at {path} is incomplete: missing {missing}")]
    IncompleteArtifact { path: PathBuf, missing: String },
    #[error("io at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// Distinguishes bad inputs (CLI exit code 1) from runtime and provider
    /// failures (exit code 2).
    pub fn is_validation(&self) -> bool {
        match self {
            RunError::Config(_)
            | RunError::Schema(_)
            | RunError::Dataset(_)
            | RunError::Prompt(_)
            | RunError::Metrics(_)
            | RunError::Score(_)
            | RunError::RunExists(_)
            | RunError::IncompleteArtifact { .. } => true,
            RunError::Completion(CompletionError::Setup(_)) => true,
            RunError::Completion(_)
            | RunError::Cache(_)
            | RunError::Record(_)
            | RunError::Locked(_)
            | RunError::Io { .. } => false,
        }
    }
}

/// Timing and dispatch counters of one completed run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub started_at: String,
    pub finished_at: String,
    pub wall_ms: u64,
    pub provider_calls: u64,
    pub cache_hits: u64,
}

/// A completed run's on-disk artifact.
#[derive(Debug, Clone)]
pub struct RunArtifact {
    pub dir: PathBuf,
    pub config: ExperimentConfig,
    pub metrics: MetricsReport,
    pub timing: TimingSummary,
}

const ARTIFACT_FILES: [&str; 5] = [
    "config.toml",
    "records.jsonl",
    "predictions.csv",
    "metrics.json",
    "run.json",
];

impl RunArtifact {
    pub fn records_path(&self) -> PathBuf {
        self.dir.join("records.jsonl")
    }

    pub fn predictions_path(&self) -> PathBuf {
        self.dir.join("predictions.csv")
    }

    pub fn records(&self) -> Result<Vec<RunRecord>, RecordError> {
        read_records(&self.records_path())
    }

    /// Loads a finished artifact, failing if any constituent file is absent.
    pub fn load(dir: &Path) -> Result<Self, RunError> {
        for name in ARTIFACT_FILES {
            if !dir.join(name).exists() {
                return Err(RunError::IncompleteArtifact {
                    path: dir.to_path_buf(),
                    missing: name.to_string(),
                });
            }
        }
        let read = |name: &str| -> Result<String, RunError> {
            let path = dir.join(name);
            fs::read_to_string(&path).map_err(|source| RunError::Io { path, source })
        };
        let config = ExperimentConfig::from_snapshot_str(&read("config.toml")?)?;
        let metrics: MetricsReport =
            serde_json::from_str(&read("metrics.json")?).map_err(|e| RunError::IncompleteArtifact {
                path: dir.to_path_buf(),
                missing: format!("valid metrics.json ({e})"),
            })?;
        let timing: TimingSummary =
            serde_json::from_str(&read("run.json")?).map_err(|e| RunError::IncompleteArtifact {
                path: dir.to_path_buf(),
                missing: format!("valid run.json ({e})"),
            })?;
        Ok(RunArtifact {
            dir: dir.to_path_buf(),
            config,
            metrics,
            timing,
        })
    }
}

/// Held for the duration of a run; created exclusively, removed on drop.
struct DirLock {
    path: PathBuf,
}

impl DirLock {
    fn acquire(dir: &Path) -> Result<Self, RunError> {
        let path = dir.join(".lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut file) => {
                let _ = writeln!(file, "{}", std::process::id());
                Ok(DirLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(RunError::Locked(path)),
            Err(source) => Err(RunError::Io { path, source }),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Loads the splits a run needs, applying the schema override if present and
/// forcing the train split onto the eval schema.
fn load_splits(
    config: &ExperimentConfig,
) -> Result<(DatasetSplit, Option<DatasetSplit>), RunError> {
    let override_schema = config
        .dataset
        .schema
        .as_ref()
        .map(|labels| LabelSchema::new(labels.iter().map(String::as_str)))
        .transpose()?;
    let eval = load_dataset(&config.dataset.eval, override_schema.as_ref())?;
    if eval.examples.is_empty() {
        return Err(RunError::Dataset(DatasetError::EmptySplit));
    }
    let train = match &config.dataset.train {
        Some(path) if config.prompt.strategy.is_few_shot() => {
            Some(load_dataset(path, Some(&eval.schema))?)
        }
        _ => None,
    };
    Ok((eval, train))
}

/// Executes one experiment end to end. See the module docs for the artifact
/// layout. Per-slot provider failures do not abort the run: the slot records
/// the error and scores as an empty-set prediction.
pub async fn run_experiment(config: ExperimentConfig) -> Result<RunArtifact, RunError> {
    config.validate()?;
    let (eval, train) = load_splits(&config)?;
    let schema = eval.schema.clone();

    let examples = match (&train, config.resolved_selection()?) {
        (Some(train), Some(selection)) => select_examples(train, &selection)?,
        _ => Vec::new(),
    };
    let prompts: Vec<RenderedPrompt> = eval
        .examples
        .iter()
        .map(|ex| {
            render_prompt_for(
                config.prompt.strategy,
                &examples,
                &ex.text,
                &schema,
                Some(&ex.id),
            )
        })
        .collect::<Result<_, _>>()?;

    let cache = ResponseCache::open(
        &config.cache_dir,
        config.provider.kind_name(),
        config.provider.cache_model_name(),
    )?;
    let client = Client::from_config(&config.provider, Some(cache))?;

    fs::create_dir_all(&config.output_dir).map_err(io_err(&config.output_dir))?;
    let lock = DirLock::acquire(&config.output_dir)?;
    let final_dir = config.output_dir.join(&config.run_id);
    if final_dir.exists() {
        return Err(RunError::RunExists(config.run_id.clone()));
    }
    let tmp_dir = config.output_dir.join(format!(".tmp-{}", config.run_id));
    if tmp_dir.exists() {
        // Leftover from an interrupted run; safe to clear under the lock.
        fs::remove_dir_all(&tmp_dir).map_err(io_err(&tmp_dir))?;
    }
    fs::create_dir_all(&tmp_dir).map_err(io_err(&tmp_dir))?;

    let snapshot_path = tmp_dir.join("config.toml");
    fs::write(&snapshot_path, config.snapshot_toml()).map_err(io_err(&snapshot_path))?;

    let started_at = chrono::Utc::now().to_rfc3339();
    let clock = Instant::now();

    let mut writer = RecordWriter::create(&tmp_dir.join("records.jsonl"))?;
    let mut records: Vec<RunRecord> = Vec::with_capacity(eval.examples.len());
    {
        let mut outcomes = futures::stream::iter(prompts.iter().map(|p| client.complete(p)))
            .buffered(config.dispatch.concurrency_limit);
        let mut slot = 0usize;
        while let Some(outcome) = outcomes.next().await {
            let example = &eval.examples[slot];
            let prompt = &prompts[slot];
            slot += 1;
            let record = match outcome {
                Ok(result) => {
                    let parsed =
                        parse_emotions(&result.raw_text, &schema, config.prompt.parse_policy);
                    RunRecord {
                        example_id: example.id.clone(),
                        prompt_hash: prompt.content_hash.clone(),
                        raw_response: result.raw_text,
                        parse_status: parsed.status,
                        predicted: parsed.labels,
                        gold: example.gold.clone(),
                        latency_ms: result.latency_ms,
                        from_cache: result.from_cache,
                        attempt_count: result.attempt_count,
                        error: None,
                    }
                }
                // Cache write failures poison replayability; stop the run.
                Err(CompletionError::Cache(e)) => return Err(e.into()),
                Err(e) => RunRecord {
                    example_id: example.id.clone(),
                    prompt_hash: prompt.content_hash.clone(),
                    raw_response: String::new(),
                    parse_status: ParseStatus::Failed,
                    predicted: LabelSet::empty(schema.len()),
                    gold: example.gold.clone(),
                    latency_ms: 0,
                    from_cache: false,
                    attempt_count: 0,
                    error: Some(e.to_string()),
                },
            };
            writer.append(&record)?;
            records.push(record);
        }
    }
    drop(writer);

    let gold: Vec<LabelSet> = records.iter().map(|r| r.gold.clone()).collect();
    let predicted: Vec<LabelSet> = records.iter().map(|r| r.predicted.clone()).collect();
    let parse_failure_count = records
        .iter()
        .filter(|r| r.parse_status == ParseStatus::Failed)
        .count();
    let metrics = MetricsReport::compute(&gold, &predicted, &schema, parse_failure_count)?;

    let prediction_rows: Vec<(String, LabelSet)> = records
        .iter()
        .map(|r| (r.example_id.clone(), r.predicted.clone()))
        .collect();
    export_predictions(&tmp_dir.join("predictions.csv"), &schema, &prediction_rows)?;

    let metrics_path = tmp_dir.join("metrics.json");
    fs::write(
        &metrics_path,
        serde_json::to_string_pretty(&metrics).expect("metrics serialize"),
    )
    .map_err(io_err(&metrics_path))?;

    let timing = TimingSummary {
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        wall_ms: clock.elapsed().as_millis() as u64,
        provider_calls: client.stats().provider_calls(),
        cache_hits: client.stats().cache_hits(),
    };
    let run_path = tmp_dir.join("run.json");
    fs::write(
        &run_path,
        serde_json::to_string_pretty(&timing).expect("timing serializes"),
    )
    .map_err(io_err(&run_path))?;

    fs::rename(&tmp_dir, &final_dir).map_err(io_err(&final_dir))?;
    drop(lock);

    Ok(RunArtifact {
        dir: final_dir,
        config,
        metrics,
        timing,
    })
}
