//! Label space definitions: an ordered emotion schema and multi-hot label sets.
//!
//! The schema fixes the order of labels; every [`LabelSet`] is a multi-hot
//! vector aligned to that order. The empty set is a valid outcome (a sentence
//! carrying none of the listed emotions).

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("label schema must contain at least one label")]
    Empty,
    #[error("duplicate label `{0}` in schema (labels are case-folded)")]
    DuplicateLabel(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
}

/// Ordered set of canonical (lowercase) label names.
///
/// Order is stable and defines the positions of every multi-hot vector built
/// against this schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct LabelSchema {
    labels: Vec<String>,
}

impl LabelSchema {
    /// Builds a schema from label names, case-folding to lowercase.
    pub fn new<I, S>(labels: I) -> Result<Self, SchemaError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let labels: Vec<String> = labels
            .into_iter()
            .map(|l| l.as_ref().trim().to_lowercase())
            .collect();
        if labels.is_empty() {
            return Err(SchemaError::Empty);
        }
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(SchemaError::Empty);
            }
            if labels[..i].contains(label) {
                return Err(SchemaError::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self { labels })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Position of a label name (case-insensitive), if present.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        let folded = label.to_lowercase();
        self.labels.iter().position(|l| *l == folded)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index_of(label).is_some()
    }

    /// Title-cased display form of the label at `idx` ("anger" -> "Anger").
    pub fn display_label(&self, idx: usize) -> String {
        title_case(&self.labels[idx])
    }
}

impl TryFrom<Vec<String>> for LabelSchema {
    type Error = SchemaError;
    fn try_from(labels: Vec<String>) -> Result<Self, SchemaError> {
        Self::new(labels)
    }
}

impl From<LabelSchema> for Vec<String> {
    fn from(schema: LabelSchema) -> Self {
        schema.labels
    }
}

/// Uppercases the first character of each label word.
pub(crate) fn title_case(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    let mut at_word_start = true;
    for ch in label.chars() {
        if at_word_start {
            out.extend(ch.to_uppercase());
        } else {
            out.push(ch);
        }
        at_word_start = !ch.is_alphanumeric();
    }
    out
}

/// Multi-hot label vector aligned to a [`LabelSchema`].
///
/// Serialized as a sequence of `0`/`1` integers so run records and prediction
/// files share one convention.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelSet {
    bits: Vec<bool>,
}

impl LabelSet {
    /// All-zero set of the given width.
    pub fn empty(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Builds a set from label names resolved against `schema`.
    pub fn from_labels<I, S>(schema: &LabelSchema, labels: I) -> Result<Self, SchemaError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = Self::empty(schema.len());
        for label in labels {
            let idx = schema
                .index_of(label.as_ref())
                .ok_or_else(|| SchemaError::UnknownLabel(label.as_ref().to_string()))?;
            set.bits[idx] = true;
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, idx: usize) -> bool {
        self.bits[idx]
    }

    pub fn set(&mut self, idx: usize, value: bool) {
        self.bits[idx] = value;
    }

    /// Number of positive labels.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// True when no label is set (the "None" outcome).
    pub fn is_none(&self) -> bool {
        self.count() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    /// Indices of positive labels, in schema order.
    pub fn positive_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.then_some(i))
    }

    /// Canonical label names of positive entries, in schema order.
    pub fn label_names<'a>(&self, schema: &'a LabelSchema) -> Vec<&'a str> {
        self.positive_indices()
            .map(|i| schema.labels()[i].as_str())
            .collect()
    }
}

impl Serialize for LabelSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.bits.len()))?;
        for b in &self.bits {
            seq.serialize_element(&u8::from(*b))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for LabelSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct BitsVisitor;
        impl<'de> Visitor<'de> for BitsVisitor {
            type Value = LabelSet;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a sequence of 0/1 integers")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<LabelSet, A::Error> {
                let mut bits = Vec::new();
                while let Some(v) = seq.next_element::<u8>()? {
                    match v {
                        0 => bits.push(false),
                        1 => bits.push(true),
                        other => {
                            return Err(serde::de::Error::custom(format!(
                                "label bit must be 0 or 1, got {other}"
                            )))
                        }
                    }
                }
                Ok(LabelSet::from_bits(bits))
            }
        }
        deserializer.deserialize_seq(BitsVisitor)
    }
}
