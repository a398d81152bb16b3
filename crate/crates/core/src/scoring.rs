//! Apply a set of attack methods to every record of a dataset.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::attack::{wbc_score, WbcScore, WindowSchedule};
use crate::baselines::{difference_score, loss_score, min_k_score, ratio_score, ScoredRecord};
use crate::dataset::{Dataset, LossRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MethodKind {
    Wbc,
    Loss,
    Ratio,
    Difference,
    MinK,
}

impl MethodKind {
    pub const ALL: [MethodKind; 5] = [
        MethodKind::Wbc,
        MethodKind::Loss,
        MethodKind::Ratio,
        MethodKind::Difference,
        MethodKind::MinK,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MethodKind::Wbc => "wbc",
            MethodKind::Loss => "loss",
            MethodKind::Ratio => "ratio",
            MethodKind::Difference => "difference",
            MethodKind::MinK => "mink",
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wbc" => Ok(MethodKind::Wbc),
            "loss" => Ok(MethodKind::Loss),
            "ratio" => Ok(MethodKind::Ratio),
            "difference" | "diff" => Ok(MethodKind::Difference),
            "mink" | "min-k" => Ok(MethodKind::MinK),
            other => Err(Error::InvalidArgument(format!(
                "unknown method `{other}`; expected one of: wbc, loss, ratio, difference, mink"
            ))),
        }
    }
}

/// A fully configured method.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    Wbc(WindowSchedule),
    Loss,
    Ratio,
    Difference,
    MinK(f64),
}

impl Method {
    pub fn kind(&self) -> MethodKind {
        match self {
            Method::Wbc(_) => MethodKind::Wbc,
            Method::Loss => MethodKind::Loss,
            Method::Ratio => MethodKind::Ratio,
            Method::Difference => MethodKind::Difference,
            Method::MinK(_) => MethodKind::MinK,
        }
    }

    pub fn from_kind(kind: MethodKind, schedule: &WindowSchedule, k: f64) -> Self {
        match kind {
            MethodKind::Wbc => Method::Wbc(schedule.clone()),
            MethodKind::Loss => Method::Loss,
            MethodKind::Ratio => Method::Ratio,
            MethodKind::Difference => Method::Difference,
            MethodKind::MinK => Method::MinK(k),
        }
    }

    pub fn name(&self) -> &'static str {
        self.kind().as_str()
    }

    pub fn score(&self, record: &LossRecord) -> Result<ScoredRecord> {
        match self {
            Method::Wbc(schedule) => {
                let s = wbc_score(record, schedule)?;
                Ok(ScoredRecord {
                    record_id: s.record_id,
                    label: record.label(),
                    method: "wbc".into(),
                    score: s.total,
                })
            }
            Method::Loss => Ok(loss_score(record)),
            Method::Ratio => ratio_score(record),
            Method::Difference => Ok(difference_score(record)),
            Method::MinK(k) => min_k_score(record, *k),
        }
    }
}

/// Parse a comma-separated method list such as `wbc,ratio,loss`.
pub fn parse_methods(list: &str) -> Result<Vec<MethodKind>> {
    let kinds = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<_>>>()?;
    if kinds.is_empty() {
        return Err(Error::InvalidArgument("no methods given".into()));
    }
    Ok(kinds)
}

/// A record that one method could not score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreFailure {
    pub record_id: String,
    pub method: String,
    pub reason: String,
}

/// Scores for one method, in dataset order.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodScores {
    pub method: String,
    pub scores: Vec<ScoredRecord>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreTable {
    pub methods: Vec<MethodScores>,
    /// Per-window breakdown for the WBC method, when requested.
    pub wbc_detail: Vec<WbcScore>,
    pub failures: Vec<ScoreFailure>,
}

impl ScoreTable {
    pub fn get(&self, method: &str) -> Option<&[ScoredRecord]> {
        self.methods
            .iter()
            .find(|m| m.method == method)
            .map(|m| m.scores.as_slice())
    }

    pub fn total_scored(&self) -> usize {
        self.methods.iter().map(|m| m.scores.len()).sum()
    }
}

/// Score every record with every method. Records are processed in
/// parallel on the current rayon pool; output order is dataset order.
pub fn score_dataset(dataset: &Dataset, methods: &[Method]) -> ScoreTable {
    let mut table = ScoreTable::default();
    for method in methods {
        let results: Vec<Result<ScoredRecord>> = match method {
            Method::Wbc(schedule) => {
                let detail: Vec<Result<WbcScore>> = dataset
                    .records()
                    .par_iter()
                    .map(|r| wbc_score(r, schedule))
                    .collect();
                table.wbc_detail = detail.iter().filter_map(|d| d.as_ref().ok().cloned()).collect();
                dataset
                    .records()
                    .iter()
                    .zip(detail)
                    .map(|(r, d)| {
                        d.map(|d| ScoredRecord {
                            record_id: d.record_id,
                            label: r.label(),
                            method: "wbc".into(),
                            score: d.total,
                        })
                    })
                    .collect()
            }
            _ => dataset.records().par_iter().map(|r| method.score(r)).collect(),
        };
        let mut scores = Vec::with_capacity(results.len());
        for (record, result) in dataset.records().iter().zip(results) {
            match result {
                Ok(s) => scores.push(s),
                Err(e) => table.failures.push(ScoreFailure {
                    record_id: record.id().to_string(),
                    method: method.name().to_string(),
                    reason: e.to_string(),
                }),
            }
        }
        table.methods.push(MethodScores {
            method: method.name().to_string(),
            scores,
        });
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::preset;
    use crate::dataset::Label;

    #[test]
    fn method_names() {
        assert_eq!(parse_methods("wbc,ratio,loss").unwrap().len(), 3);
        let err = parse_methods("wbc,zlib").unwrap_err().to_string();
        for m in ["wbc", "loss", "ratio", "difference", "mink"] {
            assert!(err.contains(m));
        }
        assert!(parse_methods("").is_err());
    }

    #[test]
    fn failures_are_collected() {
        let ok = LossRecord::new("ok", Label::Member, vec![1.0; 50], vec![2.0; 50]).unwrap();
        let short = LossRecord::new("short", Label::Nonmember, vec![1.0; 3], vec![0.0; 3]).unwrap();
        let ds = Dataset::new("d", vec![ok, short]).unwrap();
        let methods = vec![
            Method::Wbc(preset("large", 0).unwrap()),
            Method::Ratio,
            Method::Loss,
        ];
        let table = score_dataset(&ds, &methods);
        assert_eq!(table.get("wbc").unwrap().len(), 1);
        assert_eq!(table.get("ratio").unwrap().len(), 1);
        assert_eq!(table.get("loss").unwrap().len(), 2);
        assert_eq!(table.failures.len(), 2);
        assert_eq!(table.wbc_detail.len(), 1);
        assert_eq!(table.total_scored(), 4);
    }

    #[test]
    fn wbc_orientation() {
        let member = LossRecord::new("m", Label::Member, vec![1.0, 1.1, 0.9], vec![1.5, 1.6, 1.4]).unwrap();
        let swapped = LossRecord::new("s", Label::Member, vec![1.5, 1.6, 1.4], vec![1.0, 1.1, 0.9]).unwrap();
        let m = Method::Wbc(preset("small", 0).unwrap());
        assert!(m.score(&swapped).unwrap().score < m.score(&member).unwrap().score);
    }
}
