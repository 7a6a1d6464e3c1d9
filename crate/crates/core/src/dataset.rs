//! Dataset ingestion, validation and descriptive statistics.
//!
//! Splits are loaded from CSV files with a mandatory header row of
//! `id`, `text`, then one column per label holding `0`/`1` values
//! (RFC 4180 quoting, UTF-8 only). When no schema is supplied the label
//! columns themselves define it, in file order, case-folded.

use crate::schema::{LabelSchema, LabelSet, SchemaError};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: missing required column `{column}`")]
    MissingColumn { path: String, column: String },
    #[error("{path}: file has no header row")]
    MissingHeader { path: String },
    #[error("{path} row {row}: label column `{column}` holds `{value}`, expected 0 or 1")]
    BadLabelValue {
        path: String,
        row: usize,
        column: String,
        value: String,
    },
    #[error("{path} row {row}: duplicate id `{id}`")]
    DuplicateId { path: String, row: usize, id: String },
    #[error("{path} row {row}: empty text for id `{id}`")]
    EmptyText { path: String, row: usize, id: String },
    #[error("{path} row {row}: not valid UTF-8")]
    InvalidUtf8 { path: String, row: usize },
    #[error("{path} row {row}: {message}")]
    Malformed {
        path: String,
        row: usize,
        message: String,
    },
    #[error("split is empty")]
    EmptySplit,
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error("write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

/// Which split a file represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Dev,
    Test,
}

impl SplitName {
    /// Guesses the split from a file name (`eng_train.csv` -> Train).
    /// Falls back to `Dev` when the name carries no hint.
    pub fn infer(path: &Path) -> Self {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().to_lowercase())
            .unwrap_or_default();
        if stem.contains("train") {
            SplitName::Train
        } else if stem.contains("test") {
            SplitName::Test
        } else {
            SplitName::Dev
        }
    }
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitName::Train => f.write_str("train"),
            SplitName::Dev => f.write_str("dev"),
            SplitName::Test => f.write_str("test"),
        }
    }
}

/// One sentence with its gold label set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub id: String,
    pub text: String,
    pub gold: LabelSet,
}

/// An ordered, immutable collection of labeled examples sharing one schema.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub name: SplitName,
    pub schema: LabelSchema,
    pub examples: Vec<LabeledExample>,
}

impl DatasetSplit {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Gold label sets in split order.
    pub fn gold_sets(&self) -> Vec<LabelSet> {
        self.examples.iter().map(|e| e.gold.clone()).collect()
    }

    /// Writes the split back out in the same CSV shape it is loaded from.
    pub fn write_csv(&self, path: &Path) -> Result<(), DatasetError> {
        let wrap = |source| DatasetError::Write {
            path: path.display().to_string(),
            source,
        };
        let file = std::fs::File::create(path).map_err(wrap)?;
        let mut writer = csv::Writer::from_writer(file);
        let mut header = vec!["id".to_string(), "text".to_string()];
        header.extend(self.schema.labels().iter().cloned());
        writer
            .write_record(&header)
            .map_err(|e| io_from_csv(path, e))?;
        for example in &self.examples {
            let mut record = vec![example.id.clone(), example.text.clone()];
            record.extend(example.gold.iter().map(|b| u8::from(b).to_string()));
            writer
                .write_record(&record)
                .map_err(|e| io_from_csv(path, e))?;
        }
        writer.flush().map_err(wrap)?;
        Ok(())
    }
}

fn io_from_csv(path: &Path, err: csv::Error) -> DatasetError {
    DatasetError::Write {
        path: path.display().to_string(),
        source: std::io::Error::other(err),
    }
}

/// Loads a split, inferring the schema from the header when none is given
/// and the split name from the file name.
pub fn load_dataset(
    path: &Path,
    schema: Option<&LabelSchema>,
) -> Result<DatasetSplit, DatasetError> {
    load_dataset_as(path, schema, SplitName::infer(path))
}

/// Loads a split under an explicit name.
pub fn load_dataset_as(
    path: &Path,
    schema: Option<&LabelSchema>,
    name: SplitName,
) -> Result<DatasetSplit, DatasetError> {
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|source| DatasetError::Open {
        path: display.clone(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(file);

    let headers = reader
        .headers()
        .map_err(|_| DatasetError::MissingHeader {
            path: display.clone(),
        })?
        .clone();
    let header_names: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();

    let id_col = find_column(&header_names, "id").ok_or_else(|| DatasetError::MissingColumn {
        path: display.clone(),
        column: "id".into(),
    })?;
    let text_col =
        find_column(&header_names, "text").ok_or_else(|| DatasetError::MissingColumn {
            path: display.clone(),
            column: "text".into(),
        })?;

    // Label columns are everything that is not id/text, preserved in file order.
    let label_cols: Vec<(usize, String)> = header_names
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != id_col && *i != text_col)
        .map(|(i, h)| (i, h.to_lowercase()))
        .collect();

    let schema = match schema {
        Some(s) => {
            for label in s.labels() {
                if !label_cols.iter().any(|(_, h)| h == label) {
                    return Err(DatasetError::MissingColumn {
                        path: display.clone(),
                        column: label.clone(),
                    });
                }
            }
            s.clone()
        }
        None => LabelSchema::new(label_cols.iter().map(|(_, h)| h.clone()))?,
    };
    // Column index for each schema label, in schema order.
    let schema_cols: Vec<usize> = schema
        .labels()
        .iter()
        .map(|l| {
            label_cols
                .iter()
                .find(|(_, h)| h == l)
                .map(|(i, _)| *i)
                .expect("schema label resolved against header")
        })
        .collect();

    let mut examples = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    for (row_idx, record) in reader.records().enumerate() {
        let row = row_idx + 1; // 1-based data rows, header excluded
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::Utf8 { .. } => DatasetError::InvalidUtf8 {
                path: display.clone(),
                row,
            },
            _ => DatasetError::Malformed {
                path: display.clone(),
                row,
                message: e.to_string(),
            },
        })?;

        let id = record.get(id_col).unwrap_or("").trim().to_string();
        if id.is_empty() {
            return Err(DatasetError::Malformed {
                path: display.clone(),
                row,
                message: "empty id".into(),
            });
        }
        if !seen_ids.insert(id.clone()) {
            return Err(DatasetError::DuplicateId {
                path: display.clone(),
                row,
                id,
            });
        }

        let text = record.get(text_col).unwrap_or("").to_string();
        if text.trim().is_empty() {
            return Err(DatasetError::EmptyText {
                path: display.clone(),
                row,
                id,
            });
        }

        let mut gold = LabelSet::empty(schema.len());
        for (label_idx, &col) in schema_cols.iter().enumerate() {
            let raw = record.get(col).unwrap_or("").trim();
            match raw {
                "0" => {}
                "1" => gold.set(label_idx, true),
                other => {
                    return Err(DatasetError::BadLabelValue {
                        path: display.clone(),
                        row,
                        column: schema.labels()[label_idx].clone(),
                        value: other.to_string(),
                    })
                }
            }
        }
        examples.push(LabeledExample { id, text, gold });
    }

    Ok(DatasetSplit {
        name,
        schema,
        examples,
    })
}

fn find_column(headers: &[String], name: &str) -> Option<usize> {
    headers.iter().position(|h| h.eq_ignore_ascii_case(name))
}

/// Histogram of whitespace-token counts over a split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenLengthHistogram {
    pub bucket_width: usize,
    /// `(bucket_start, bucket_end, count)` rows; end is exclusive.
    pub buckets: Vec<(usize, usize, usize)>,
    pub total: usize,
}

impl TokenLengthHistogram {
    /// Renders the `bucket_start,bucket_end,count` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bucket_start,bucket_end,count\n");
        for (start, end, count) in &self.buckets {
            out.push_str(&format!("{start},{end},{count}\n"));
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        writer.write_all(self.to_csv().as_bytes())
    }
}

/// Token count used for dataset statistics: whitespace splitting.
pub fn token_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Buckets every example's whitespace-token count into `[k*w, (k+1)*w)` bins.
///
/// Buckets are contiguous from zero through the longest example; frequencies
/// always sum to the split size.
pub fn dataset_stats(
    split: &DatasetSplit,
    bucket_width: usize,
) -> Result<TokenLengthHistogram, DatasetError> {
    assert!(bucket_width > 0, "bucket_width must be positive");
    if split.is_empty() {
        return Err(DatasetError::EmptySplit);
    }
    let counts: Vec<usize> = split.examples.iter().map(|e| token_count(&e.text)).collect();
    let max = *counts.iter().max().expect("nonempty split");
    let n_buckets = max / bucket_width + 1;
    let mut freqs = vec![0usize; n_buckets];
    for c in &counts {
        freqs[c / bucket_width] += 1;
    }
    let buckets = freqs
        .iter()
        .enumerate()
        .map(|(k, &count)| (k * bucket_width, (k + 1) * bucket_width, count))
        .collect();
    Ok(TokenLengthHistogram {
        bucket_width,
        buckets,
        total: split.len(),
    })
}

/// Outcome of checking a split's size against an expected count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountCheck {
    pub split: String,
    pub expected: usize,
    pub actual: usize,
    pub pass: bool,
}

impl fmt::Display for CountCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: expected {} examples, found {} -> {}",
            self.split,
            self.expected,
            self.actual,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Compares the split size to `expected_count`; the mismatch is carried in
/// the report, never raised as an error.
pub fn validate_against_expected(split: &DatasetSplit, expected_count: usize) -> CountCheck {
    CountCheck {
        split: split.name.to_string(),
        expected: expected_count,
        actual: split.len(),
        pass: split.len() == expected_count,
    }
}

/// Published BRIGHTER track-A split sizes for the languages this harness
/// targets, usable as `validate_against_expected` inputs after ingesting a
/// release file.
pub const KNOWN_SPLIT_SIZES: &[(&str, SplitName, usize)] = &[
    ("eng", SplitName::Train, 2768),
    ("eng", SplitName::Dev, 116),
    ("eng", SplitName::Test, 2767),
    ("ptmz", SplitName::Train, 1546),
    ("ptmz", SplitName::Dev, 257),
    ("ptmz", SplitName::Test, 776),
    ("vmw", SplitName::Train, 1551),
    ("vmw", SplitName::Dev, 258),
    ("vmw", SplitName::Test, 777),
];

/// Looks up a published split size by language code.
pub fn known_split_size(language: &str, split: SplitName) -> Option<usize> {
    let lang = language.to_lowercase();
    KNOWN_SPLIT_SIZES
        .iter()
        .find(|(l, s, _)| *l == lang && *s == split)
        .map(|(_, _, n)| *n)
}
