//! Sliding-window sums and the per-window sign and mean statistics.
//!
//! Window sums are computed incrementally: the first window is summed
//! directly, then each slide subtracts the leaving element and adds the
//! entering one. This is the same quantity as convolving the sequence with
//! a uniform length-`w` kernel; [`window_sums_prefix`] computes it through
//! prefix-sum differences instead and exists so the two can be checked
//! against each other.

use crate::dataset::LossRecord;
use crate::error::{Error, Result};

/// All `n − w + 1` sums of length-`w` windows over a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSums {
    pub w: usize,
    pub sums: Vec<f64>,
}

fn check_window(w: usize, n: usize) -> Result<()> {
    if w == 0 {
        return Err(Error::InvalidArgument("window size must be positive".into()));
    }
    if w > n {
        return Err(Error::WindowTooLarge { w, n });
    }
    Ok(())
}

pub fn window_sums(seq: &[f64], w: usize) -> Result<WindowSums> {
    check_window(w, seq.len())?;
    let mut sums = Vec::with_capacity(seq.len() - w + 1);
    let mut acc: f64 = seq[..w].iter().sum();
    sums.push(acc);
    for i in 1..=seq.len() - w {
        acc = acc - seq[i - 1] + seq[i + w - 1];
        sums.push(acc);
    }
    Ok(WindowSums { w, sums })
}

/// Same sums as [`window_sums`], as `P[i + w] − P[i]` over a prefix-sum array.
pub fn window_sums_prefix(seq: &[f64], w: usize) -> Result<WindowSums> {
    check_window(w, seq.len())?;
    let mut prefix = Vec::with_capacity(seq.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &v in seq {
        acc += v;
        prefix.push(acc);
    }
    let sums = (0..=seq.len() - w).map(|i| prefix[i + w] - prefix[i]).collect();
    Ok(WindowSums { w, sums })
}

/// Raw count behind [`sign_statistic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignCount {
    /// Windows whose reference sum strictly exceeds the target sum.
    pub count: usize,
    /// Number of window positions, `n − w + 1`.
    pub windows: usize,
}

impl SignCount {
    pub fn fraction(self) -> f64 {
        self.count as f64 / self.windows as f64
    }
}

/// Slides both loss sequences together and counts windows where the
/// reference sum is strictly larger. Ties are not member votes.
pub fn sign_count(record: &LossRecord, w: usize) -> Result<SignCount> {
    let target = record.target_losses();
    let reference = record.ref_losses();
    let n = record.len();
    check_window(w, n)?;

    let mut sum_t: f64 = target[..w].iter().sum();
    let mut sum_r: f64 = reference[..w].iter().sum();
    let mut count = usize::from(sum_r > sum_t);
    for i in 1..=n - w {
        sum_t = sum_t - target[i - 1] + target[i + w - 1];
        sum_r = sum_r - reference[i - 1] + reference[i + w - 1];
        if sum_r > sum_t {
            count += 1;
        }
    }
    Ok(SignCount {
        count,
        windows: n - w + 1,
    })
}

/// Fraction of length-`w` windows in which the reference model's summed
/// loss strictly exceeds the target model's, in `[0, 1]`.
pub fn sign_statistic(record: &LossRecord, w: usize) -> Result<f64> {
    sign_count(record, w).map(SignCount::fraction)
}

/// Average per-token windowed loss difference,
/// `(1 / (n − w + 1)) Σ_i (S_i^R − S_i^T) / w`.
///
/// Used only as the mean-style aggregator in the aggregation ablation.
pub fn mean_statistic(record: &LossRecord, w: usize) -> Result<f64> {
    let r = window_sums(record.ref_losses(), w)?;
    let t = window_sums(record.target_losses(), w)?;
    let total: f64 = r.sums.iter().zip(&t.sums).map(|(a, b)| (a - b) / w as f64).sum();
    Ok(total / r.sums.len() as f64)
}
