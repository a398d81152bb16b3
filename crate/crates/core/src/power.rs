//! Closed-form detection power of the windowed sign test.
//!
//! A window of `w` member tokens has `E[ΣΔ] ≈ ρ_δ·w·γ̄` and
//! `Var[ΣΔ] ≈ w·σ² + ρ_ξ·w·E[Y²]`. Gaussianizing the sum gives
//!
//! ```text
//! p_w = Φ(ρ_δ·w·γ̄ / sqrt(w·σ² + ρ_ξ·w·E[Y²]))
//! Var[T_sign(w)] ≈ w·p_w(1−p_w)/n       (about n/w independent windows)
//! Power(w) ∝ (p_w − 0.5)²·n / (w·p_w(1−p_w))
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::sim::{DeltaSampler, SimParams};

/// `E[Y²]` of the rare-event magnitude, or an error when it is infinite.
pub fn second_moment(params: &SimParams) -> Result<f64> {
    let m2 = params.y_dist.second_moment();
    if m2.is_finite() {
        Ok(m2)
    } else {
        Err(Error::AnalysisInapplicable(format!(
            "tail distribution {:?} has infinite second moment",
            params.y_dist
        )))
    }
}

pub fn std_normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Probability that a member window's Δ-sum is positive.
pub fn p_member(w: usize, params: &SimParams) -> Result<f64> {
    if w == 0 {
        return Err(Error::InvalidArgument("window size must be at least 1".into()));
    }
    params.validate()?;
    let m2 = second_moment(params)?;
    let w = w as f64;
    let signal = params.rho_delta * w * params.gamma_bar;
    let spread = (w * params.sigma * params.sigma + params.rho_xi * w * m2).sqrt();
    Ok(std_normal_cdf(signal / spread))
}

/// `w·p(1−p)/n`.
pub fn variance_tsign(w: usize, n: usize, p: f64) -> f64 {
    w as f64 * p * (1.0 - p) / n as f64
}

/// Unnormalized power; exactly zero at `p = 0.5`.
pub fn raw_power(w: usize, n: usize, p: f64) -> f64 {
    let excess = p - 0.5;
    if excess == 0.0 {
        return 0.0;
    }
    excess * excess * n as f64 / (w as f64 * p * (1.0 - p))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerProfile {
    pub n: usize,
    pub w_grid: Vec<usize>,
    pub p_member: Vec<f64>,
    pub variance: Vec<f64>,
    /// Relative power, scaled so the largest grid value is 1.
    pub power: Vec<f64>,
    pub raw_power: Vec<f64>,
    pub w_star: usize,
}

impl PowerProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("w,p_member,variance,power\n");
        for i in 0..self.w_grid.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.w_grid[i], self.p_member[i], self.variance[i], self.power[i]
            ));
        }
        out.push_str(&format!("w_star,{}\n", self.w_star));
        out
    }
}

/// Evaluate the power profile over `w_grid`. `w_star` is the first
/// maximizer, so an all-zero curve picks the first grid entry.
pub fn power_curve(params: &SimParams, n: usize, w_grid: &[usize]) -> Result<PowerProfile> {
    if w_grid.is_empty() {
        return Err(Error::InvalidArgument("window grid is empty".into()));
    }
    if let Some(&w) = w_grid.iter().find(|&&w| w == 0 || w > n) {
        return Err(Error::InvalidArgument(format!(
            "grid window {w} outside 1..={n}"
        )));
    }
    let p: Vec<f64> = w_grid
        .iter()
        .map(|&w| p_member(w, params))
        .collect::<Result<_>>()?;
    let variance = w_grid.iter().zip(&p).map(|(&w, &p)| variance_tsign(w, n, p)).collect();
    let raw: Vec<f64> = w_grid.iter().zip(&p).map(|(&w, &p)| raw_power(w, n, p)).collect();

    let mut best = 0;
    for (i, &v) in raw.iter().enumerate() {
        if v > raw[best] {
            best = i;
        }
    }
    let peak = raw[best];
    let power = raw
        .iter()
        .map(|&v| if peak > 0.0 { v / peak } else { 0.0 })
        .collect();
    Ok(PowerProfile {
        n,
        w_grid: w_grid.to_vec(),
        p_member: p,
        variance,
        power,
        raw_power: raw,
        w_star: w_grid[best],
    })
}

/// Parse `a:b` (inclusive range) or a comma list.
pub fn parse_grid(spec: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidArgument(format!("bad window grid `{spec}`"));
    let grid: Vec<usize> = if let Some((a, b)) = spec.split_once(':') {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a == 0 || a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if grid.is_empty() || grid.contains(&0) {
        return Err(bad());
    }
    Ok(grid)
}

const MC_CHUNK: usize = 4096;

/// Monte-Carlo estimate of `P(Σ Δ > 0)` over `n_windows` independent
/// member windows of `w` tokens drawn straight from the Δ process.
pub fn monte_carlo_p_member(params: &SimParams, w: usize, n_windows: usize, seed: u64) -> Result<f64> {
    if w == 0 || n_windows == 0 {
        return Err(Error::InvalidArgument("need w ≥ 1 and at least one window".into()));
    }
    let sampler = DeltaSampler::new(params)?;
    let chunks = n_windows.div_ceil(MC_CHUNK);
    let positive: usize = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let todo = MC_CHUNK.min(n_windows - c * MC_CHUNK);
            (0..todo)
                .filter(|_| {
                    let s: f64 = (0..w).map(|_| sampler.delta(&mut rng, Label::Member)).sum();
                    s > 0.0
                })
                .count()
        })
        .sum();
    Ok(positive as f64 / n_windows as f64)
}
