//! Distributional diagnostics of Δ sequences: moments, tail mass and
//! spatial clustering of extreme events.
//!
//! Central moments are population-style (divide by `n`), and `std` is
//! the population standard deviation `sqrt(m₂)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};

pub const DEFAULT_K_SIGMA: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("no values".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok((mean, m2.sqrt()))
}

/// Skewness `m₃/m₂^{3/2}` and excess kurtosis `m₄/m₂² − 3`.
///
/// Zero variance is a `Degenerate` error whose message still carries the
/// mean and standard deviation.
pub fn moments(values: &[f64]) -> Result<Moments> {
    if values.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "moments need at least 4 values, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if m2 == 0.0 {
        return Err(Error::Degenerate(format!(
            "zero variance (mean {mean}, std 0); skewness and kurtosis undefined"
        )));
    }
    Ok(Moments {
        mean,
        std: m2.sqrt(),
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
    })
}

fn extreme_mask(values: &[f64], k_sigma: f64) -> Result<impl Iterator<Item = bool> + '_> {
    let (mean, std) = mean_std(values)?;
    if std == 0.0 {
        return Err(Error::Degenerate(format!("zero variance (mean {mean})")));
    }
    let cut = k_sigma * std;
    Ok(values.iter().map(move |v| (v - mean).abs() > cut))
}

/// Fraction of values with `|v − mean| > k_sigma·std`.
pub fn tail_fraction(values: &[f64], k_sigma: f64) -> Result<f64> {
    let mask = extreme_mask(values, k_sigma);
    match mask {
        Ok(m) => Ok(m.filter(|&e| e).count() as f64 / values.len() as f64),
        // every value sits at the mean
        Err(Error::Degenerate(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Positions (0-based) of two-sided `k_sigma` extremes.
pub fn extreme_positions(values: &[f64], k_sigma: f64) -> Result<Vec<usize>> {
    Ok(extreme_mask(values, k_sigma)?
        .enumerate()
        .filter_map(|(i, e)| e.then_some(i))
        .collect())
}

/// 1-D Clark–Evans ratio for sorted event positions in a sequence of
/// length `n`: mean nearest-neighbour gap over its Poisson expectation
/// `n/(2m)`. Values near 1 mean random placement, below 1 clustering.
pub fn clustering_from_positions(positions: &[usize], n: usize) -> Result<f64> {
    let m = positions.len();
    if m < 2 {
        return Err(Error::InsufficientEvents { found: m });
    }
    debug_assert!(positions.windows(2).all(|p| p[0] < p[1]));
    let gaps: Vec<usize> = positions.windows(2).map(|p| p[1] - p[0]).collect();
    let mut total = gaps[0] + gaps[m - 2];
    for i in 1..m - 1 {
        total += gaps[i - 1].min(gaps[i]);
    }
    let observed = total as f64 / m as f64;
    let expected = n as f64 / (2.0 * m as f64);
    Ok(observed / expected)
}

pub fn clustering_coefficient(values: &[f64], k_sigma: f64) -> Result<f64> {
    clustering_from_positions(&extreme_positions(values, k_sigma)?, values.len())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaDiagnostics {
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub k_sigma: f64,
    pub tail_fraction: f64,
    /// `None` when fewer than two extremes occur.
    pub clustering_coefficient: Option<f64>,
    pub n_tokens: usize,
    pub n_extremes: usize,
}

pub fn diagnose(values: &[f64], k_sigma: f64) -> Result<DeltaDiagnostics> {
    let m = moments(values)?;
    let positions = extreme_positions(values, k_sigma)?;
    let clustering = match clustering_from_positions(&positions, values.len()) {
        Ok(c) => Some(c),
        Err(Error::InsufficientEvents { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(DeltaDiagnostics {
        mean: m.mean,
        std: m.std,
        skewness: m.skewness,
        excess_kurtosis: m.excess_kurtosis,
        k_sigma,
        tail_fraction: positions.len() as f64 / values.len() as f64,
        clustering_coefficient: clustering,
        n_tokens: values.len(),
        n_extremes: positions.len(),
    })
}

/// Concatenated Δ of every record with the given label, in dataset order.
/// `None` selects all records.
pub fn pooled_delta(dataset: &Dataset, label: Option<Label>) -> Vec<f64> {
    let parts: Vec<Vec<f64>> = dataset
        .records()
        .par_iter()
        .filter(|r| label.is_none_or(|l| r.label() == l))
        .map(|r| r.delta().0)
        .collect();
    parts.concat()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassDiagnostics {
    pub class: String,
    pub diagnostics: DeltaDiagnostics,
}

/// Diagnostics over pooled tokens for each label class present, then
/// for all records together.
pub fn diagnose_dataset(dataset: &Dataset, k_sigma: f64) -> Result<Vec<ClassDiagnostics>> {
    let mut out = Vec::new();
    for label in [Label::Member, Label::Nonmember, Label::Unknown] {
        let values = pooled_delta(dataset, Some(label));
        if values.is_empty() {
            continue;
        }
        out.push(ClassDiagnostics {
            class: label.as_str().to_string(),
            diagnostics: diagnose(&values, k_sigma)?,
        });
    }
    if out.len() != 1 {
        out.push(ClassDiagnostics {
            class: "all".into(),
            diagnostics: diagnose(&pooled_delta(dataset, None), k_sigma)?,
        });
    }
    Ok(out)
}

pub fn format_diagnostics(rows: &[ClassDiagnostics]) -> String {
    let mut out = format!(
        "{:<10} {:>10} {:>9} {:>9} {:>9} {:>10} {:>8} {:>10} {:>9}\n",
        "class", "tokens", "mean", "std", "skew", "ex.kurt", "tail", "extremes", "cluster"
    );
    for row in rows {
        let d = &row.diagnostics;
        let cluster = d
            .clustering_coefficient
            .map_or_else(|| "n/a".to_string(), |c| format!("{c:.4}"));
        out.push_str(&format!(
            "{:<10} {:>10} {:>9.4} {:>9.4} {:>9.4} {:>10.4} {:>8.5} {:>10} {:>9}\n",
            row.class,
            d.n_tokens,
            d.mean,
            d.std,
            d.skewness,
            d.excess_kurtosis,
            d.tail_fraction,
            d.n_extremes,
            cluster
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub density: f64,
}

/// Equal-width bins spanning `[min, max]`; the last bin is closed.
pub fn histogram(values: &[f64], bins: usize) -> Result<Vec<HistogramBin>> {
    if values.is_empty() || bins == 0 {
        return Err(Error::InvalidArgument("histogram needs values and bins".into()));
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for v in values {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let n = values.len() as f64;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lo: lo + i as f64 * width,
            hi: lo + (i + 1) as f64 * width,
            count,
            density: count as f64 / (n * width),
        })
        .collect())
}

/// Empirical `P(V ≥ x)` at up to about `max_points` order statistics,
/// spaced geometrically in tail rank so the upper tail stays resolved.
pub fn ccdf(values: &[f64], max_points: usize) -> Vec<(f64, f64)> {
    let n = values.len();
    if n == 0 || max_points == 0 {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let ratio = (n as f64).powf(1.0 / max_points as f64);
    let mut ranks = Vec::new();
    let mut r = 1.0f64;
    while (r as usize) <= n {
        let k = r as usize;
        if ranks.last() != Some(&k) {
            ranks.push(k);
        }
        r = (r * ratio).max(r + 1.0);
    }
    if ranks.last() != Some(&n) {
        ranks.push(n);
    }
    ranks
        .into_iter()
        .map(|k| (sorted[k - 1], k as f64 / n as f64))
        .collect()
}
