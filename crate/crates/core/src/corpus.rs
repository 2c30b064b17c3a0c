//! Data model and JSONL ingestion for annotated potential-metonym samples.
//!
//! Each sample is one annotated instance: a token context, the potentially
//! metonymic word (PMW) inside it, one or more grammatically related words
//! (GRWs), and a gold label. The canonical on-disk form is JSONL, one object
//! per line; see [`parse_corpus`].

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

/// Coarse gold reading of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coarse {
    Literal,
    Metonymic,
    Mixed,
}

/// Metonymy subtype, present exactly when the coarse label is `metonymic`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subtype {
    #[serde(rename = "place-for-people")]
    PlaceForPeople,
    #[serde(rename = "place-for-event")]
    PlaceForEvent,
    #[serde(rename = "place-for-product")]
    PlaceForProduct,
    #[serde(rename = "object-for-name")]
    ObjectForName,
    #[serde(rename = "othermet")]
    OtherMet,
}

impl Subtype {
    pub fn as_str(&self) -> &'static str {
        match self {
            Subtype::PlaceForPeople => "place-for-people",
            Subtype::PlaceForEvent => "place-for-event",
            Subtype::PlaceForProduct => "place-for-product",
            Subtype::ObjectForName => "object-for-name",
            Subtype::OtherMet => "othermet",
        }
    }
}

/// Gold annotation: coarse reading plus an optional metonymy subtype.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub coarse: Coarse,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subtype: Option<Subtype>,
}

impl Label {
    pub fn literal() -> Self {
        Label {
            coarse: Coarse::Literal,
            subtype: None,
        }
    }

    pub fn mixed() -> Self {
        Label {
            coarse: Coarse::Mixed,
            subtype: None,
        }
    }

    pub fn metonymic(subtype: Subtype) -> Self {
        Label {
            coarse: Coarse::Metonymic,
            subtype: Some(subtype),
        }
    }
}

/// A grammatically related word: the annotated word syntactically linked to
/// the PMW. Surfaces are lowercased at ingestion; lexicon lookups are all
/// lowercase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grw {
    pub surface: String,
    pub relation: String,
    pub is_preposition: bool,
}

/// One annotated potential-metonym instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub id: String,
    pub tokens: Vec<String>,
    pub pmw_index: usize,
    pub pmw_surface: String,
    pub grws: Vec<Grw>,
    pub label: Label,
}

impl Sample {
    /// First grammatically related word. The dataset annotates at least one
    /// GRW per instance, and the first listed one drives all word-level
    /// features.
    pub fn grw(&self) -> &Grw {
        &self.grws[0]
    }

    fn validate(&self) -> Result<(), CorpusError> {
        let fail = |field: &'static str, reason: String| CorpusError::Invalid {
            id: self.id.clone(),
            field,
            reason,
        };
        if self.pmw_index >= self.tokens.len() {
            return Err(fail(
                "pmw_index",
                format!(
                    "index {} out of range for {} tokens",
                    self.pmw_index,
                    self.tokens.len()
                ),
            ));
        }
        if !self.tokens[self.pmw_index].eq_ignore_ascii_case(&self.pmw_surface) {
            return Err(fail(
                "pmw_surface",
                format!(
                    "token at pmw_index is {:?}, expected {:?}",
                    self.tokens[self.pmw_index], self.pmw_surface
                ),
            ));
        }
        if self.grws.is_empty() {
            return Err(fail(
                "grws",
                "at least one grammatically related word is required".into(),
            ));
        }
        for grw in &self.grws {
            if grw.relation.is_empty() || grw.relation.chars().any(char::is_whitespace) {
                return Err(fail(
                    "grws.relation",
                    format!(
                        "relation {:?} must be a non-empty token without whitespace",
                        grw.relation
                    ),
                ));
            }
        }
        match (self.label.coarse, self.label.subtype) {
            (Coarse::Metonymic, None) => Err(fail(
                "label.subtype",
                "metonymic label requires a subtype".into(),
            )),
            (Coarse::Literal | Coarse::Mixed, Some(_)) => Err(fail(
                "label.subtype",
                "subtype is only valid with a metonymic label".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}: {source}")]
    Malformed {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("sample {id:?}: field {field}: {reason}")]
    Invalid {
        id: String,
        field: &'static str,
        reason: String,
    },
    #[error("line {1}: {0}")]
    Io(#[source] std::io::Error, usize),
}

const SAMPLE_KEYS: &[&str] = &["id", "tokens", "pmw_index", "pmw_surface", "grws", "label"];
const GRW_KEYS: &[&str] = &["surface", "relation", "is_preposition"];
const LABEL_KEYS: &[&str] = &["coarse", "subtype"];

fn warn_unknown_keys(value: &serde_json::Value, line: usize) {
    let warn = |obj: &serde_json::Map<String, serde_json::Value>, known: &[&str], ctx: &str| {
        for key in obj.keys() {
            if !known.contains(&key.as_str()) {
                log::warn!("line {line}: ignoring unknown key {key:?} in {ctx}");
            }
        }
    };
    let Some(obj) = value.as_object() else { return };
    warn(obj, SAMPLE_KEYS, "sample");
    if let Some(grws) = obj.get("grws").and_then(|v| v.as_array()) {
        for grw in grws.iter().filter_map(|v| v.as_object()) {
            warn(grw, GRW_KEYS, "grw");
        }
    }
    if let Some(label) = obj.get("label").and_then(|v| v.as_object()) {
        warn(label, LABEL_KEYS, "label");
    }
}

/// Parse a JSONL sample stream: one JSON object per line, blank lines
/// skipped, unknown keys ignored with a warning. GRW surfaces are lowercased.
/// Returns samples in file order; every sample invariant is validated.
pub fn parse_corpus<R: BufRead>(reader: R) -> Result<Vec<Sample>, CorpusError> {
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| CorpusError::Io(e, lineno))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(trimmed).map_err(|e| CorpusError::Malformed {
                line: lineno,
                source: e,
            })?;
        warn_unknown_keys(&value, lineno);
        let mut sample: Sample =
            serde_json::from_value(value).map_err(|e| CorpusError::Malformed {
                line: lineno,
                source: e,
            })?;
        for grw in &mut sample.grws {
            grw.surface = grw.surface.to_lowercase();
        }
        sample.validate()?;
        samples.push(sample);
    }
    Ok(samples)
}

/// Serialize samples back to JSONL, one object per line, in order.
pub fn write_corpus<W: std::io::Write>(samples: &[Sample], mut writer: W) -> std::io::Result<()> {
    for sample in samples {
        serde_json::to_writer(&mut writer, sample)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Per-class and per-subtype counts over a sample list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountsReport {
    pub n: usize,
    pub literal: usize,
    pub metonymic: usize,
    pub mixed: usize,
    pub subtypes: BTreeMap<Subtype, usize>,
}

pub fn corpus_stats(samples: &[Sample]) -> CountsReport {
    let mut report = CountsReport {
        n: samples.len(),
        literal: 0,
        metonymic: 0,
        mixed: 0,
        subtypes: BTreeMap::new(),
    };
    for sample in samples {
        match sample.label.coarse {
            Coarse::Literal => report.literal += 1,
            Coarse::Mixed => report.mixed += 1,
            Coarse::Metonymic => {
                report.metonymic += 1;
                if let Some(subtype) = sample.label.subtype {
                    *report.subtypes.entry(subtype).or_default() += 1;
                }
            }
        }
    }
    report
}
