//! Declarative experiment configuration.
//!
//! A config file fully determines a run. Loading resolves relative paths
//! against the config file's directory and materializes every default, so the
//! snapshot written into the run artifact is self-describing and replayable.

use crate::client::ProviderConfig;
use crate::parse::ParsePolicy;
use crate::prompt::{ExampleSelection, PromptStrategy};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing config {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: Box<toml::de::Error>,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    /// Training split; required for few-shot strategies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<PathBuf>,
    /// Split the run is scored on.
    pub eval: PathBuf,
    /// Explicit label schema; inferred from the eval header when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptSection {
    pub strategy: PromptStrategy,
    /// `method:count[:seed]`; required for few-shot strategies, forbidden for
    /// zero-shot ones. An omitted seed part falls back to the run seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<String>,
    #[serde(default = "default_parse_policy")]
    pub parse_policy: ParsePolicy,
}

fn default_parse_policy() -> ParsePolicy {
    ParsePolicy::Lenient
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispatchSection {
    pub concurrency_limit: usize,
}

impl Default for DispatchSection {
    fn default() -> Self {
        DispatchSection {
            concurrency_limit: 4,
        }
    }
}

/// Everything one run needs, as read from a single TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Directory name of the artifact under `output_dir`; must be unique.
    pub run_id: String,
    /// Default seed for seeded example selection.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_cache_dir")]
    pub cache_dir: PathBuf,
    pub dataset: DatasetSection,
    pub prompt: PromptSection,
    pub provider: ProviderConfig,
    #[serde(default)]
    pub dispatch: DispatchSection,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn default_cache_dir() -> PathBuf {
    PathBuf::from("cache")
}

impl ExperimentConfig {
    /// Reads, path-resolves and validates a config file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config: ExperimentConfig =
            toml::from_str(&text).map_err(|source| ConfigError::Parse {
                path: path.to_path_buf(),
                source: Box::new(source),
            })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        config.resolve_paths(base);
        config.validate()?;
        Ok(config)
    }

    /// Parses config text without path resolution (used for snapshots, whose
    /// paths were resolved when the original file was loaded).
    pub fn from_snapshot_str(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|source| ConfigError::Parse {
                path: PathBuf::from("<snapshot>"),
                source: Box::new(source),
            })?;
        config.validate()?;
        Ok(config)
    }

    /// Rebases every relative path onto `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        for path in [&mut self.output_dir, &mut self.cache_dir]
            .into_iter()
            .chain(self.dataset.train.as_mut())
            .chain(std::iter::once(&mut self.dataset.eval))
        {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        if self.run_id.is_empty() {
            return invalid("run_id must not be empty".to_string());
        }
        if !self
            .run_id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
            || self.run_id.starts_with('.')
        {
            return invalid(format!(
                "run_id `{}` may only contain letters, digits, `-`, `_`, `.` and must not start with `.`",
                self.run_id
            ));
        }
        if self.prompt.strategy.is_few_shot() {
            if self.prompt.selection.is_none() {
                return invalid(format!(
                    "strategy {} requires a prompt.selection",
                    self.prompt.strategy
                ));
            }
            if self.dataset.train.is_none() {
                return invalid(format!(
                    "strategy {} requires dataset.train",
                    self.prompt.strategy
                ));
            }
        } else if self.prompt.selection.is_some() {
            return invalid(format!(
                "strategy {} takes no prompt.selection",
                self.prompt.strategy
            ));
        }
        // Selection strings must parse even before the train split is read.
        self.resolved_selection()?;
        if self.dispatch.concurrency_limit == 0 {
            return invalid("dispatch.concurrency_limit must be ≥ 1".to_string());
        }
        self.provider.validate().map_err(ConfigError::Invalid)?;
        Ok(())
    }

    /// The parsed selection, with the run seed applied when the spec omits one.
    pub fn resolved_selection(&self) -> Result<Option<ExampleSelection>, ConfigError> {
        match &self.prompt.selection {
            None => Ok(None),
            Some(spec) => ExampleSelection::parse(spec, self.seed)
                .map(Some)
                .map_err(|e| ConfigError::Invalid(format!("prompt.selection: {e}"))),
        }
    }

    /// TOML snapshot with every default materialized.
    pub fn snapshot_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
