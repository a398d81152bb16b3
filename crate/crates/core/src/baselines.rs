//! Baseline attacks computable from the loss sequences alone.
//!
//! Every score is oriented so that a larger value means "more likely a
//! member", whatever the method's native sign convention.

use serde::Serialize;

use crate::dataset::{Label, LossRecord};
use crate::error::{Error, Result};

/// Default fraction of least-likely tokens for Min-K%.
pub const DEFAULT_MIN_K: f64 = 0.20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredRecord {
    pub record_id: String,
    pub label: Label,
    pub method: String,
    pub score: f64,
}

impl ScoredRecord {
    fn of(record: &LossRecord, method: &str, score: f64) -> Self {
        Self {
            record_id: record.id().to_string(),
            label: record.label(),
            method: method.to_string(),
            score,
        }
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Negated average target loss. Ignores the reference model.
pub fn loss_score(record: &LossRecord) -> ScoredRecord {
    ScoredRecord::of(record, "loss", -mean(record.target_losses()))
}

/// `mean(ref) − mean(target)`.
pub fn difference_score(record: &LossRecord) -> ScoredRecord {
    let score = mean(record.ref_losses()) - mean(record.target_losses());
    ScoredRecord::of(record, "difference", score)
}

/// `−mean(target) / mean(ref)`; the reference mean must be positive.
pub fn ratio_score(record: &LossRecord) -> Result<ScoredRecord> {
    let ref_mean = mean(record.ref_losses());
    if ref_mean <= 0.0 {
        return Err(Error::DegenerateReference {
            id: record.id().to_string(),
            mean: ref_mean,
        });
    }
    let score = -mean(record.target_losses()) / ref_mean;
    Ok(ScoredRecord::of(record, "ratio", score))
}

/// Negated mean of the `⌈k·n⌉` largest target losses.
///
/// Ties among equal losses are broken by position (stable sort), which
/// does not affect the mean. The selected losses are summed in sequence
/// order, so `k = 1` reproduces the Loss score bit for bit.
pub fn min_k_score(record: &LossRecord, k: f64) -> Result<ScoredRecord> {
    if !(k > 0.0 && k <= 1.0) {
        return Err(Error::InvalidArgument(format!("Min-K% fraction must be in (0, 1], got {k}")));
    }
    let losses = record.target_losses();
    let n = losses.len();
    let m = ((k * n as f64).ceil() as usize).clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| losses[b].total_cmp(&losses[a]));
    let mut chosen = order[..m].to_vec();
    chosen.sort_unstable();
    let score = -chosen.iter().map(|&i| losses[i]).sum::<f64>() / m as f64;
    Ok(ScoredRecord::of(record, "mink", score))
}
