//! Loss records, datasets and the JSONL interchange format.
//!
//! One record per line:
//!
//! ```text
//! {"id":"a","label":"member","target_losses":[1.0,2.0],"ref_losses":[1.5,2.5]}
//! ```
//!
//! `label` is optional on input and defaults to `unknown`. Losses are
//! per-token negative log-likelihoods in nats, target (fine-tuned) model
//! first, reference model second, over the same token positions.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sequences shorter than this are flagged on load (never rejected).
pub const RECOMMENDED_MIN_TOKENS: usize = 512;

static NEGATIVE_LOSS_WARNED: AtomicBool = AtomicBool::new(false);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Member,
    Nonmember,
    #[default]
    Unknown,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Member => "member",
            Label::Nonmember => "nonmember",
            Label::Unknown => "unknown",
        }
    }

    pub fn is_known(self) -> bool {
        self != Label::Unknown
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "member" => Ok(Label::Member),
            "nonmember" => Ok(Label::Nonmember),
            "unknown" => Ok(Label::Unknown),
            other => Err(Error::InvalidArgument(format!(
                "unknown label `{other}` (expected member, nonmember or unknown)"
            ))),
        }
    }
}

/// Paired per-token losses for one text sample.
///
/// Construct through [`LossRecord::new`]; a record that exists always has
/// equal-length, finite sequences of at least two tokens.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossRecord {
    id: String,
    label: Label,
    target_losses: Vec<f64>,
    ref_losses: Vec<f64>,
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    #[serde(default)]
    label: Label,
    target_losses: Vec<f64>,
    ref_losses: Vec<f64>,
}

impl LossRecord {
    pub fn new(
        id: impl Into<String>,
        label: Label,
        target_losses: Vec<f64>,
        ref_losses: Vec<f64>,
    ) -> Result<Self> {
        let id = id.into();
        let invalid = |reason: String| Error::Validation {
            id: id.clone(),
            line: None,
            reason,
        };
        if target_losses.len() != ref_losses.len() {
            return Err(invalid(format!(
                "target_losses has {} values but ref_losses has {}",
                target_losses.len(),
                ref_losses.len()
            )));
        }
        if target_losses.len() < 2 {
            return Err(invalid(format!(
                "need at least 2 tokens, got {}",
                target_losses.len()
            )));
        }
        for (name, seq) in [("target_losses", &target_losses), ("ref_losses", &ref_losses)] {
            if let Some(j) = seq.iter().position(|v| !v.is_finite()) {
                return Err(invalid(format!("{name}[{j}] is not finite ({})", seq[j])));
            }
        }
        if target_losses.iter().chain(&ref_losses).any(|&v| v < 0.0)
            && !NEGATIVE_LOSS_WARNED.swap(true, Ordering::Relaxed)
        {
            log::warn!("record `{id}` carries negative loss values (further warnings suppressed)");
        }
        Ok(Self {
            id,
            label,
            target_losses,
            ref_losses,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn target_losses(&self) -> &[f64] {
        &self.target_losses
    }

    pub fn ref_losses(&self) -> &[f64] {
        &self.ref_losses
    }

    /// Number of scored tokens.
    pub fn len(&self) -> usize {
        self.target_losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target_losses.is_empty()
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = label;
        self
    }

    /// Element-wise `ref − target`; positive where the target model is more confident.
    pub fn delta(&self) -> LossDelta {
        LossDelta(
            self.ref_losses
                .iter()
                .zip(&self.target_losses)
                .map(|(r, t)| r - t)
                .collect(),
        )
    }
}

/// Per-token loss difference `ref − target`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossDelta(pub Vec<f64>);

impl LossDelta {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }
}

/// A named collection of records with unique ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub name: String,
    records: Vec<LossRecord>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, records: Vec<LossRecord>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::Validation {
                    id: r.id.clone(),
                    line: None,
                    reason: "duplicate record id".into(),
                });
            }
        }
        Ok(Self {
            name: name.into(),
            records,
        })
    }

    pub fn records(&self) -> &[LossRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<LossRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// True iff every record is labeled member or nonmember.
    pub fn is_labeled(&self) -> bool {
        self.records.iter().all(|r| r.label.is_known())
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let members = self.records.iter().filter(|r| r.label == Label::Member).count();
        let nonmembers = self.records.iter().filter(|r| r.label == Label::Nonmember).count();
        (members, nonmembers)
    }
}

/// A line that could not be turned into a record.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub line: usize,
    pub id: Option<String>,
    pub reason: String,
}

fn parse_line(line_no: usize, line: &str) -> Result<LossRecord> {
    let raw: RawRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
        line: line_no,
        message: e.to_string(),
    })?;
    LossRecord::new(raw.id, raw.label, raw.target_losses, raw.ref_losses).map_err(|e| match e {
        Error::Validation { id, reason, .. } => Error::Validation {
            id,
            line: Some(line_no),
            reason,
        },
        other => other,
    })
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

fn flag_short(records: &[LossRecord]) {
    let short = records
        .iter()
        .filter(|r| r.len() < RECOMMENDED_MIN_TOKENS)
        .count();
    if short > 0 {
        log::warn!(
            "{short} of {} records are shorter than {RECOMMENDED_MIN_TOKENS} tokens",
            records.len()
        );
    }
}

/// Strict loader: the first malformed or invalid line aborts the load.
pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let records = read_lines(path)?
        .into_iter()
        .map(|(line_no, line)| parse_line(line_no, &line))
        .collect::<Result<Vec<_>>>()?;
    flag_short(&records);
    Dataset::new(dataset_name(path), records)
}

/// Lenient loader: invalid lines (and repeated ids) are collected as
/// rejections and the rest of the file is kept.
pub fn load_jsonl_lenient(path: impl AsRef<Path>) -> Result<(Dataset, Vec<Rejection>)> {
    let path = path.as_ref();
    let mut records = Vec::new();
    let mut rejects = Vec::new();
    let mut seen = HashSet::new();
    for (line_no, line) in read_lines(path)? {
        match parse_line(line_no, &line) {
            Ok(r) if !seen.insert(r.id.clone()) => rejects.push(Rejection {
                line: line_no,
                id: Some(r.id),
                reason: "duplicate record id".into(),
            }),
            Ok(r) => records.push(r),
            Err(Error::Validation { id, reason, .. }) => rejects.push(Rejection {
                line: line_no,
                id: Some(id),
                reason,
            }),
            Err(Error::Parse { message, .. }) => rejects.push(Rejection {
                line: line_no,
                id: None,
                reason: format!("malformed record: {message}"),
            }),
            Err(e) => rejects.push(Rejection {
                line: line_no,
                id: None,
                reason: e.to_string(),
            }),
        }
    }
    flag_short(&records);
    Ok((Dataset::new(dataset_name(path), records)?, rejects))
}

pub fn write_jsonl(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for r in &dataset.records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
