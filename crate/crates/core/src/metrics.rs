//! ROC AUC, TPR at fixed FPR, and stratified bootstrap aggregation.
//!
//! Scores are read as "higher means member". A record is called a member
//! at threshold `t` iff its score is `≥ t`.

use std::cmp::Ordering;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::ScoredRecord;
use crate::dataset::Label;
use crate::error::{Error, Result};

pub const DEFAULT_FPR_TARGETS: [f64; 3] = [0.10, 0.01, 0.001];
pub const DEFAULT_BOOTSTRAP_ROUNDS: usize = 100;

/// Member and non-member scores, both non-empty.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassScores {
    pub members: Vec<f64>,
    pub nonmembers: Vec<f64>,
}

impl ClassScores {
    pub fn new(members: Vec<f64>, nonmembers: Vec<f64>) -> Result<Self> {
        if members.is_empty() || nonmembers.is_empty() {
            return Err(Error::SingleClass {
                members: members.len(),
                nonmembers: nonmembers.len(),
            });
        }
        if let Some(bad) = members.iter().chain(&nonmembers).find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite score {bad}")));
        }
        Ok(Self {
            members,
            nonmembers,
        })
    }

    pub fn from_scored(scored: &[ScoredRecord]) -> Result<Self> {
        let mut members = Vec::new();
        let mut nonmembers = Vec::new();
        for s in scored {
            match s.label {
                Label::Member => members.push(s.score),
                Label::Nonmember => nonmembers.push(s.score),
                Label::Unknown => {
                    return Err(Error::Unlabeled {
                        id: s.record_id.clone(),
                    })
                }
            }
        }
        Self::new(members, nonmembers)
    }

    /// Tie groups in descending score order, as `(members, nonmembers)` counts.
    fn descending_groups(&self) -> Vec<(usize, usize)> {
        let mut all: Vec<(f64, bool)> = self
            .members
            .iter()
            .map(|&s| (s, true))
            .chain(self.nonmembers.iter().map(|&s| (s, false)))
            .collect();
        all.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
        let mut groups = Vec::new();
        let mut i = 0;
        while i < all.len() {
            let mut j = i;
            let (mut m, mut k) = (0, 0);
            while j < all.len() && all[j].0 == all[i].0 {
                if all[j].1 {
                    m += 1;
                } else {
                    k += 1;
                }
                j += 1;
            }
            groups.push((m, k));
            i = j;
        }
        groups
    }

    /// Probability that a random member outscores a random non-member,
    /// ties counted as one half.
    pub fn auc(&self) -> f64 {
        let pairs = self.members.len() as f64 * self.nonmembers.len() as f64;
        self.twice_u() as f64 / (2.0 * pairs)
    }

    /// Twice the Mann–Whitney U statistic, an exact integer.
    pub fn twice_u(&self) -> u128 {
        let mut twice_u: u128 = 0;
        let mut nonmembers_below = self.nonmembers.len() as u128;
        for (m, k) in self.descending_groups() {
            let (m, k) = (m as u128, k as u128);
            nonmembers_below -= k;
            twice_u += 2 * m * nonmembers_below + m * k;
        }
        twice_u
    }

    /// Largest TPR over thresholds whose empirical FPR does not exceed
    /// `fpr_target`. No interpolation between thresholds.
    pub fn tpr_at_fpr(&self, fpr_target: f64) -> f64 {
        let n1 = self.members.len() as f64;
        let n0 = self.nonmembers.len() as f64;
        let (mut tp, mut fp) = (0usize, 0usize);
        let mut best = 0.0;
        for (m, k) in self.descending_groups() {
            tp += m;
            fp += k;
            if fp as f64 / n0 > fpr_target {
                break;
            }
            best = tp as f64 / n1;
        }
        best
    }

    /// ROC step curve as `(fpr, tpr)` points from `(0, 0)` to `(1, 1)`.
    pub fn roc_points(&self) -> Vec<(f64, f64)> {
        let n1 = self.members.len() as f64;
        let n0 = self.nonmembers.len() as f64;
        let mut points = vec![(0.0, 0.0)];
        let (mut tp, mut fp) = (0usize, 0usize);
        for (m, k) in self.descending_groups() {
            tp += m;
            fp += k;
            points.push((fp as f64 / n0, tp as f64 / n1));
        }
        points
    }
}

pub fn auc(scored: &[ScoredRecord]) -> Result<f64> {
    Ok(ClassScores::from_scored(scored)?.auc())
}

pub fn tpr_at_fpr(scored: &[ScoredRecord], fpr_target: f64) -> Result<f64> {
    check_fpr(fpr_target)?;
    Ok(ClassScores::from_scored(scored)?.tpr_at_fpr(fpr_target))
}

fn check_fpr(fpr: f64) -> Result<()> {
    if fpr > 0.0 && fpr < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("FPR target must be in (0, 1), got {fpr}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapConfig {
    pub n_bootstrap: usize,
    pub seed: u64,
    pub fpr_targets: Vec<f64>,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            n_bootstrap: DEFAULT_BOOTSTRAP_ROUNDS,
            seed: 0,
            fpr_targets: DEFAULT_FPR_TARGETS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TprAtFpr {
    pub fpr: f64,
    /// Point estimate on the full sample.
    pub tpr: f64,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: String,
    pub n_members: usize,
    pub n_nonmembers: usize,
    /// Point estimate on the full sample.
    pub auc: f64,
    pub auc_mean: f64,
    pub auc_std: f64,
    pub tpr_at_fpr: Vec<TprAtFpr>,
    pub n_bootstrap: usize,
    pub seed: u64,
}

/// Mean and sample standard deviation; the deviation of a single value is 0.
fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Resample members and non-members separately with replacement (class
/// counts preserved) and recompute every metric. Round `b` draws from its
/// own counter-based stream, so the result does not depend on how rounds
/// are scheduled across threads.
pub fn bootstrap_evaluate(
    method: &str,
    scores: &ClassScores,
    config: &BootstrapConfig,
) -> Result<EvalReport> {
    if config.n_bootstrap == 0 {
        return Err(Error::InvalidArgument("n_bootstrap must be at least 1".into()));
    }
    for &f in &config.fpr_targets {
        check_fpr(f)?;
    }
    let rounds: Vec<(f64, Vec<f64>)> = (0..config.n_bootstrap)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
            rng.set_stream(b as u64);
            let resample = |src: &[f64], rng: &mut ChaCha20Rng| -> Vec<f64> {
                (0..src.len()).map(|_| src[rng.random_range(0..src.len())]).collect()
            };
            let members = resample(&scores.members, &mut rng);
            let nonmembers = resample(&scores.nonmembers, &mut rng);
            let sample = ClassScores {
                members,
                nonmembers,
            };
            let tprs = config.fpr_targets.iter().map(|&f| sample.tpr_at_fpr(f)).collect();
            (sample.auc(), tprs)
        })
        .collect();

    let aucs: Vec<f64> = rounds.iter().map(|r| r.0).collect();
    let (auc_mean, auc_std) = mean_std(&aucs);
    let tpr_at_fpr = config
        .fpr_targets
        .iter()
        .enumerate()
        .map(|(i, &fpr)| {
            let vals: Vec<f64> = rounds.iter().map(|r| r.1[i]).collect();
            let (mean, std) = mean_std(&vals);
            TprAtFpr {
                fpr,
                tpr: scores.tpr_at_fpr(fpr),
                mean,
                std,
            }
        })
        .collect();
    Ok(EvalReport {
        method: method.to_string(),
        n_members: scores.members.len(),
        n_nonmembers: scores.nonmembers.len(),
        auc: scores.auc(),
        auc_mean,
        auc_std,
        tpr_at_fpr,
        n_bootstrap: config.n_bootstrap,
        seed: config.seed,
    })
}

/// Convenience wrapper over [`bootstrap_evaluate`] for scored records of one method.
pub fn evaluate_scored(scored: &[ScoredRecord], config: &BootstrapConfig) -> Result<EvalReport> {
    let method = scored.first().map(|s| s.method.clone()).unwrap_or_default();
    bootstrap_evaluate(&method, &ClassScores::from_scored(scored)?, config)
}

fn percent_label(fpr: f64) -> String {
    let s = format!("{:.6}", fpr * 100.0);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    format!("TPR@{s}%FPR")
}

/// Aligned plain-text table, one row per report.
pub fn format_table(reports: &[EvalReport]) -> String {
    let mut header = vec!["method".to_string(), "AUC".to_string()];
    if let Some(first) = reports.first() {
        header.extend(first.tpr_at_fpr.iter().map(|t| percent_label(t.fpr)));
    }
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            let mut row = vec![
                r.method.clone(),
                format!("{:.4} ± {:.4}", r.auc_mean, r.auc_std),
            ];
            row.extend(
                r.tpr_at_fpr
                    .iter()
                    .map(|t| format!("{:.4} ± {:.4}", t.mean, t.std)),
            );
            row
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            std::iter::once(&header)
                .chain(&rows)
                .filter_map(|row| row.get(c))
                .map(|cell| cell.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in std::iter::once(&header).chain(&rows) {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:<w$}"))
            .collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn cs(m: &[f64], n: &[f64]) -> ClassScores {
        ClassScores::new(m.to_vec(), n.to_vec()).unwrap()
    }

    fn pairwise_auc(m: &[f64], n: &[f64]) -> f64 {
        let mut twice = 0u64;
        for &a in m {
            for &b in n {
                twice += if a > b { 2 } else if a == b { 1 } else { 0 };
            }
        }
        twice as f64 / (2.0 * (m.len() * n.len()) as f64)
    }

    fn sweep_tpr(m: &[f64], n: &[f64], target: f64) -> f64 {
        let mut thresholds: Vec<f64> = m.iter().chain(n).copied().collect();
        thresholds.push(f64::INFINITY);
        let mut best = 0.0f64;
        for t in thresholds {
            let fpr = n.iter().filter(|&&s| s >= t).count() as f64 / n.len() as f64;
            if fpr <= target {
                best = best.max(m.iter().filter(|&&s| s >= t).count() as f64 / m.len() as f64);
            }
        }
        best
    }

    #[test]
    fn auc_examples() {
        assert_eq!(cs(&[0.9, 0.8], &[0.1, 0.2]).auc(), 1.0);
        assert_eq!(cs(&[0.3; 4], &[0.3; 6]).auc(), 0.5);
        assert_eq!(cs(&[3.0, 1.0], &[2.0, 0.0]).auc(), 0.75);
        assert_eq!(pairwise_auc(&[3.0, 1.0], &[2.0, 0.0]), 0.75);
    }

    #[test]
    fn single_class_and_unlabeled_rejected() {
        assert!(matches!(ClassScores::new(vec![1.0], vec![]), Err(Error::SingleClass { .. })));
        let s = ScoredRecord {
            record_id: "u".into(),
            label: Label::Unknown,
            method: "loss".into(),
            score: 0.0,
        };
        assert!(matches!(auc(&[s]), Err(Error::Unlabeled { .. })));
    }

    #[test]
    fn tpr_examples() {
        let c = cs(&[0.9, 0.8, 0.7], &[0.1, 0.2, 0.3]);
        assert_eq!(c.tpr_at_fpr(0.01), 1.0);

        let flat = cs(&[1.0; 10], &[1.0; 10]);
        assert_eq!(flat.tpr_at_fpr(0.5), 0.0);

        // identical score multisets, 100 of each: the top slice admits one false positive
        let v: Vec<f64> = (0..100).map(f64::from).collect();
        let same = cs(&v, &v);
        assert_eq!(same.tpr_at_fpr(0.01), sweep_tpr(&v, &v, 0.01));
        assert_eq!(same.tpr_at_fpr(0.01), 0.01);
        assert!(tpr_at_fpr(&[], 1.5).is_err());
    }

    #[test]
    fn roc_endpoints() {
        let pts = cs(&[3.0, 1.0], &[2.0, 0.0]).roc_points();
        assert_eq!(pts.first(), Some(&(0.0, 0.0)));
        assert_eq!(pts.last(), Some(&(1.0, 1.0)));
        assert_eq!(pts.len(), 5);
    }

    #[test]
    fn bootstrap_examples() {
        let perfect = cs(&[0.9, 0.8, 0.95, 0.7], &[0.1, 0.2, 0.3]);
        let r = bootstrap_evaluate("x", &perfect, &BootstrapConfig { seed: 3, ..Default::default() }).unwrap();
        assert_eq!((r.auc_mean, r.auc_std), (1.0, 0.0));

        let one = bootstrap_evaluate(
            "x",
            &cs(&[0.3, 0.9, 0.1], &[0.2, 0.5]),
            &BootstrapConfig { n_bootstrap: 1, ..Default::default() },
        )
        .unwrap();
        assert_eq!(one.auc_std, 0.0);
        assert!(one.tpr_at_fpr.iter().all(|t| t.std == 0.0));
        assert!(bootstrap_evaluate("x", &perfect, &BootstrapConfig { n_bootstrap: 0, ..Default::default() }).is_err());
    }

    #[test]
    fn bootstrap_is_seed_deterministic() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let m: Vec<f64> = (0..100).map(|_| rng.random()).collect();
        let n: Vec<f64> = (0..100).map(|_| rng.random()).collect();
        let c = cs(&m, &n);
        let cfg = |seed| BootstrapConfig { seed, ..Default::default() };
        let a = bootstrap_evaluate("r", &c, &cfg(42)).unwrap();
        let b = bootstrap_evaluate("r", &c, &cfg(42)).unwrap();
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let s = single.install(|| bootstrap_evaluate("r", &c, &cfg(42)).unwrap());
        assert_eq!(a, b);
        assert_eq!(a, s);
        assert_ne!(a, bootstrap_evaluate("r", &c, &cfg(43)).unwrap());
    }

    #[test]
    fn random_scores_are_near_chance() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let (mut m, mut n) = (Vec::new(), Vec::new());
        for _ in 0..2000 {
            let s: f64 = rng.random();
            if rng.random_bool(0.5) { m.push(s) } else { n.push(s) }
        }
        let r = bootstrap_evaluate("null", &cs(&m, &n), &BootstrapConfig::default()).unwrap();
        assert!((r.auc - 0.5).abs() < 0.05);
        assert!((r.auc_mean - 0.5).abs() < 0.05);
        // bootstrap spread of a 2000-record AUC is about 0.013
        assert!(r.auc_std > 0.005 && r.auc_std < 0.03, "std {}", r.auc_std);
    }

    #[test]
    fn table_layout() {
        let c = cs(&[0.9, 0.4], &[0.1, 0.5]);
        let r = bootstrap_evaluate("wbc", &c, &BootstrapConfig { n_bootstrap: 5, ..Default::default() }).unwrap();
        let t = format_table(&[r.clone(), EvalReport { method: "difference".into(), ..r }]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("method"));
        assert!(lines[0].contains("TPR@10%FPR") && lines[0].contains("TPR@0.1%FPR"));
        assert_eq!(lines[1].find("0."), lines[2].find("0."));
    }

    fn scores() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        // small integer grid forces ties
        let v = || proptest::collection::vec((0i32..20).prop_map(f64::from), 1..60);
        (v(), v())
    }

    proptest! {
        #[test]
        fn auc_matches_pairwise((m, n) in scores()) {
            prop_assert!((cs(&m, &n).auc() - pairwise_auc(&m, &n)).abs() <= 1e-12);
        }

        #[test]
        fn tpr_matches_sweep((m, n) in scores(), fpr in 0.001f64..0.999) {
            prop_assert_eq!(cs(&m, &n).tpr_at_fpr(fpr), sweep_tpr(&m, &n, fpr));
        }

        #[test]
        fn tpr_monotone_in_target((m, n) in scores(), a in 0.001f64..0.999, b in 0.001f64..0.999) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let c = cs(&m, &n);
            prop_assert!(c.tpr_at_fpr(lo) <= c.tpr_at_fpr(hi));
        }

        #[test]
        fn negation_complements_auc((m, n) in scores()) {
            let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
            let (a, b) = (cs(&m, &n), cs(&neg(&m), &neg(&n)));
            prop_assert_eq!(a.twice_u() + b.twice_u(), 2 * (m.len() * n.len()) as u128);
            prop_assert!((b.auc() - (1.0 - a.auc())).abs() <= f64::EPSILON);
        }

        #[test]
        fn monotone_transform_invariance((m, n) in scores(), fpr in 0.001f64..0.999) {
            let f = |v: &[f64]| v.iter().map(|x| (x / 7.0).exp() * 3.0 - 1.0).collect::<Vec<_>>();
            let (a, b) = (cs(&m, &n), cs(&f(&m), &f(&n)));
            prop_assert_eq!(a.auc(), b.auc());
            prop_assert_eq!(a.tpr_at_fpr(fpr), b.tpr_at_fpr(fpr));
        }
    }
}
