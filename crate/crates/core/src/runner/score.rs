//! Prediction CSV export and scoring of externally produced predictions.
//!
//! The exported file and the ingested file share one shape — `id` plus one
//! 0/1 column per schema label — so any run's own predictions can be
//! re-scored, and predictions from models trained elsewhere can be evaluated
//! against a gold split.

use crate::dataset::DatasetSplit;
use crate::metrics::{MetricsError, MetricsReport};
use crate::schema::{LabelSchema, LabelSet};
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

const MAX_LISTED_IDS: usize = 5;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("predictions io at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("predictions csv at {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("predictions file has no `id` column")]
    MissingIdColumn,
    #[error("predictions file lacks a column for label `{0}`")]
    MissingLabelColumn(String),
    #[error("predictions file has unexpected column `{0}`")]
    UnexpectedColumn(String),
    #[error("duplicate prediction id `{0}`")]
    DuplicateId(String),
    #[error("prediction value `{value}` in column `{column}` at data row {row} is not 0 or 1")]
    BadValue {
        row: usize,
        column: String,
        value: String,
    },
    #[error("predictions missing {missing} id(s), e.g. {listed}")]
    MissingIds { missing: usize, listed: String },
    #[error("predictions contain {extra} id(s) not in the gold split, e.g. {listed}")]
    ExtraIds { extra: usize, listed: String },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Writes `id` + per-label 0/1 rows, labels in schema order.
pub fn export_predictions(
    path: &Path,
    schema: &LabelSchema,
    rows: &[(String, LabelSet)],
) -> Result<(), ScoreError> {
    let mut writer = csv::Writer::from_path(path).map_err(|source| ScoreError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let csv_err = |source| ScoreError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut header = vec!["id".to_string()];
    header.extend(schema.labels().iter().cloned());
    writer.write_record(&header).map_err(csv_err)?;
    for (id, set) in rows {
        let mut record = vec![id.clone()];
        record.extend(set.iter().map(|bit| if bit { "1" } else { "0" }.to_string()));
        writer.write_record(&record).map_err(csv_err)?;
    }
    writer.flush().map_err(|source| ScoreError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

/// Reads a predictions file for `schema`. Columns may appear in any order but
/// must be exactly `id` plus one column per schema label.
pub fn load_predictions(
    path: &Path,
    schema: &LabelSchema,
) -> Result<HashMap<String, LabelSet>, ScoreError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| ScoreError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
    let headers = reader
        .headers()
        .map_err(|source| ScoreError::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .clone();

    let mut id_column = None;
    // label_columns[i] = csv column index for schema label i.
    let mut label_columns: Vec<Option<usize>> = vec![None; schema.len()];
    for (i, name) in headers.iter().enumerate() {
        let folded = name.trim().to_lowercase();
        if folded == "id" {
            id_column = Some(i);
        } else if let Some(idx) = schema.index_of(&folded) {
            label_columns[idx] = Some(i);
        } else {
            return Err(ScoreError::UnexpectedColumn(name.trim().to_string()));
        }
    }
    let id_column = id_column.ok_or(ScoreError::MissingIdColumn)?;
    let label_columns: Vec<usize> = label_columns
        .into_iter()
        .enumerate()
        .map(|(idx, col)| col.ok_or_else(|| ScoreError::MissingLabelColumn(schema.labels()[idx].clone())))
        .collect::<Result<_, _>>()?;

    let mut predictions = HashMap::new();
    for (row_idx, row) in reader.records().enumerate() {
        let row = row.map_err(|source| ScoreError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let id = row.get(id_column).unwrap_or_default().to_string();
        let mut bits = Vec::with_capacity(schema.len());
        for (label_idx, &col) in label_columns.iter().enumerate() {
            let value = row.get(col).unwrap_or_default();
            match value {
                "0" => bits.push(false),
                "1" => bits.push(true),
                other => {
                    return Err(ScoreError::BadValue {
                        row: row_idx + 1,
                        column: schema.labels()[label_idx].clone(),
                        value: other.to_string(),
                    })
                }
            }
        }
        let set = LabelSet::from_bits(bits);
        if predictions.insert(id.clone(), set).is_some() {
            return Err(ScoreError::DuplicateId(id));
        }
    }
    Ok(predictions)
}

fn list_ids(ids: &[&String]) -> String {
    ids.iter()
        .take(MAX_LISTED_IDS)
        .map(|s| format!("`{s}`"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Scores a predictions file against a gold split. The file's ids must cover
/// the split exactly — no missing, no extra.
pub fn score_predictions(
    gold: &DatasetSplit,
    predictions_path: &Path,
) -> Result<MetricsReport, ScoreError> {
    let predictions = load_predictions(predictions_path, &gold.schema)?;

    let missing: Vec<&String> = gold
        .examples
        .iter()
        .map(|e| &e.id)
        .filter(|id| !predictions.contains_key(*id))
        .collect();
    if !missing.is_empty() {
        return Err(ScoreError::MissingIds {
            missing: missing.len(),
            listed: list_ids(&missing),
        });
    }
    let known: std::collections::HashSet<&str> =
        gold.examples.iter().map(|e| e.id.as_str()).collect();
    let mut extra: Vec<&String> = predictions
        .keys()
        .filter(|id| !known.contains(id.as_str()))
        .collect();
    if !extra.is_empty() {
        extra.sort();
        return Err(ScoreError::ExtraIds {
            extra: extra.len(),
            listed: list_ids(&extra),
        });
    }

    let gold_sets = gold.gold_sets();
    let pred_sets: Vec<LabelSet> = gold
        .examples
        .iter()
        .map(|e| predictions[&e.id].clone())
        .collect();
    Ok(MetricsReport::compute(
        &gold_sets,
        &pred_sets,
        &gold.schema,
        0,
    )?)
}
