//! Acceptance suite A1–A11. Each test prints one `[Ax] PASS|FAIL` line
//! with the measured quantities, then asserts.

use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use wbc::attack::PUBLISHED_WINDOWS;
use wbc::diagnostics::{clustering_from_positions, moments, tail_fraction};
use wbc::metrics::ClassScores;
use wbc::power::monte_carlo_p_member;
use wbc::sim::null_preset;
use wbc::window::sign_count;
use wbc::*;

fn verdict(id: &str, pass: bool, elapsed: Duration, budget: Duration, detail: String) {
    let in_time = elapsed <= budget;
    let ok = pass && in_time;
    println!(
        "[{id}] {} {detail} (runtime {:.3}s, budget {}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(pass, "{id}: {detail}");
    assert!(in_time, "{id}: runtime {elapsed:?} exceeds {budget:?}");
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn random_record(rng: &mut ChaCha20Rng, id: String, n: usize) -> LossRecord {
    let shift: f64 = rng.random_range(-0.5..0.5);
    let target: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..8.0)).collect();
    let reference: Vec<f64> = target
        .iter()
        .map(|t| (t + shift + rng.random_range(-2.0..2.0)).max(0.0))
        .collect();
    LossRecord::new(id, Label::Member, target, reference).unwrap()
}

#[test]
fn a1_schedule_exactness() {
    let t = Instant::now();
    let got = geometric_schedule(2, 40, 10).unwrap();
    let elapsed = t.elapsed();
    verdict(
        "A1",
        got.sizes() == PUBLISHED_WINDOWS,
        elapsed,
        Duration::from_millis(1),
        format!("geometric_schedule(2,40,10) = {{{got}}}, expected {{{}}}", preset("full", 0).unwrap()),
    );
}

#[test]
fn a2_window_sum_oracle() {
    let t = Instant::now();
    let mut rng = rng(2);
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    for _ in 0..1000 {
        let n = rng.random_range(2..=600);
        let seq: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..12.0)).collect();
        let mut sizes = vec![1, n, rng.random_range(1..=n)];
        sizes.extend(PUBLISHED_WINDOWS.iter().filter(|&&w| w <= n));
        for w in sizes {
            let inc = window_sums(&seq, w).unwrap().sums;
            let pre = window_sums_prefix(&seq, w).unwrap().sums;
            assert_eq!(inc.len(), n - w + 1);
            for i in 0..inc.len() {
                let naive: f64 = seq[i..i + w].iter().sum();
                worst = worst.max((inc[i] - naive).abs()).max((pre[i] - naive).abs());
                checked += 1;
            }
        }
    }
    verdict(
        "A2",
        worst <= 1e-9,
        t.elapsed(),
        Duration::from_secs(5),
        format!("max |error| {worst:.3e} over {checked} window sums (tolerance 1e-9)"),
    );
}

/// Every window sum recomputed from scratch.
fn straight_line_counts(record: &LossRecord, w: usize) -> (usize, usize) {
    let t = record.target_losses();
    let r = record.ref_losses();
    let windows = t.len() - w + 1;
    let mut count = 0;
    for i in 0..windows {
        let st: f64 = t[i..i + w].iter().sum();
        let sr: f64 = r[i..i + w].iter().sum();
        if sr > st {
            count += 1;
        }
    }
    (count, windows)
}

#[test]
fn a3_algorithm_fidelity() {
    let t = Instant::now();
    let schedule = preset("full", 0).unwrap();
    let mut rng = rng(3);
    let mut mismatches = 0;
    for i in 0..200 {
        let n = rng.random_range(2..=600);
        let record = random_record(&mut rng, format!("r{i}"), n);
        let score = wbc_score(&record, &schedule).unwrap();
        let mut total = 0.0;
        let mut used = 0;
        for &w in schedule.sizes().iter().filter(|&&w| w <= n) {
            let (count, windows) = straight_line_counts(&record, w);
            let got = sign_count(&record, w).unwrap();
            if (got.count, got.windows) != (count, windows) {
                mismatches += 1;
            }
            total += count as f64 / windows as f64;
            used += 1;
        }
        if score.total != total / used as f64 {
            mismatches += 1;
        }
    }
    verdict(
        "A3",
        mismatches == 0,
        t.elapsed(),
        Duration::from_secs(5),
        format!("{mismatches} count/score mismatches over 200 records"),
    );
}

fn pairwise_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut s = 0.0;
    for &p in pos {
        for &q in neg {
            s += if p > q {
                1.0
            } else if p == q {
                0.5
            } else {
                0.0
            };
        }
    }
    s / (pos.len() * neg.len()) as f64
}

/// Every observed score and +∞ as a threshold; member iff score ≥ t.
fn sweep_tpr(pos: &[f64], neg: &[f64], target: f64) -> f64 {
    let mut thresholds: Vec<f64> = pos.iter().chain(neg).cloned().collect();
    thresholds.push(f64::INFINITY);
    let mut best = 0.0f64;
    for t in thresholds {
        let fpr = neg.iter().filter(|&&s| s >= t).count() as f64 / neg.len() as f64;
        if fpr <= target {
            best = best.max(pos.iter().filter(|&&s| s >= t).count() as f64 / pos.len() as f64);
        }
    }
    best
}

#[test]
fn a4_metric_oracles() {
    let t = Instant::now();
    let mut rng = rng(4);
    let (mut worst_auc, mut tpr_mismatch) = (0.0f64, 0);
    for _ in 0..200 {
        let n1 = rng.random_range(1..=250);
        let n0 = rng.random_range(1..=250);
        let grid = rng.random_bool(0.5);
        let mut draw = |shift: f64| -> f64 {
            let x: f64 = rng.random_range(0.0..1.0) + shift;
            if grid {
                (x * 20.0).round()
            } else {
                x
            }
        };
        let pos: Vec<f64> = (0..n1).map(|_| draw(0.2)).collect();
        let neg: Vec<f64> = (0..n0).map(|_| draw(0.0)).collect();
        let cs = ClassScores::new(pos.clone(), neg.clone()).unwrap();
        worst_auc = worst_auc.max((cs.auc() - pairwise_auc(&pos, &neg)).abs());
        for f in [0.1, 0.01, 0.001, 0.25, 0.5] {
            if cs.tpr_at_fpr(f) != sweep_tpr(&pos, &neg, f) {
                tpr_mismatch += 1;
            }
        }
    }
    verdict(
        "A4",
        worst_auc <= 1e-12 && tpr_mismatch == 0,
        t.elapsed(),
        Duration::from_secs(10),
        format!("max AUC deviation {worst_auc:.2e} (tol 1e-12), {tpr_mismatch} TPR@FPR mismatches"),
    );
}

#[test]
fn a5_null_calibration() {
    let t = Instant::now();
    let params = null_preset();
    let ds = sample_dataset(&params, 1, 5000).unwrap();
    let nonmembers: Vec<&LossRecord> = ds.records().iter().filter(|r| r.label() == Label::Nonmember).collect();
    let mut details = Vec::new();
    let mut pass = true;
    for w in [2, 10, 40] {
        let mean = nonmembers.iter().map(|r| sign_statistic(r, w).unwrap()).sum::<f64>() / nonmembers.len() as f64;
        pass &= (mean - 0.5).abs() <= 0.01;
        details.push(format!("mean T_sign({w}) = {mean:.4}"));
    }
    let balanced = sample_dataset(&params, 2000, 2000).unwrap();
    let table = score_dataset(&balanced, &[Method::Wbc(preset("full", 0).unwrap())]);
    let auc = metrics::auc(table.get("wbc").unwrap()).unwrap();
    pass &= (auc - 0.5).abs() <= 0.03;
    details.push(format!("WBC AUC {auc:.4} (0.5 ± 0.03)"));
    verdict("A5", pass, t.elapsed(), Duration::from_secs(60), details.join(", "));
}

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

#[derive(Debug, Clone, Copy)]
struct SeedAucs {
    full: f64,
    small: f64,
    large: f64,
    difference: f64,
    ratio: f64,
}

/// Heavy-tail AUCs per seed, shared by A6 and A8 so the data is generated once.
fn heavy_tail_aucs() -> &'static (Vec<SeedAucs>, Duration) {
    static CELL: OnceLock<(Vec<SeedAucs>, Duration)> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = Instant::now();
        let methods = [
            Method::Wbc(preset("full", 0).unwrap()),
            Method::Difference,
            Method::Ratio,
        ];
        let small = Method::Wbc(preset("small", 0).unwrap());
        let large = Method::Wbc(preset("large", 0).unwrap());
        let rows = SEEDS
            .iter()
            .map(|&seed| {
                let params = SimParams { seed, ..heavy_tail_preset() };
                let ds = sample_dataset(&params, 2000, 2000).unwrap();
                let auc_of = |m: &Method| {
                    let table = score_dataset(&ds, std::slice::from_ref(m));
                    metrics::auc(&table.methods[0].scores).unwrap()
                };
                SeedAucs {
                    full: auc_of(&methods[0]),
                    difference: auc_of(&methods[1]),
                    ratio: auc_of(&methods[2]),
                    small: auc_of(&small),
                    large: auc_of(&large),
                }
            })
            .collect();
        (rows, t.elapsed())
    })
}

#[test]
fn a6_localized_beats_global() {
    let t = Instant::now();
    let (rows, generated) = heavy_tail_aucs();
    let elapsed = t.elapsed().max(*generated);
    let mut pass = true;
    let mut details = Vec::new();
    for (seed, r) in SEEDS.iter().zip(rows) {
        let gd = r.full - r.difference;
        let gr = r.full - r.ratio;
        pass &= gd >= 0.03 && gr >= 0.03;
        details.push(format!("seed {seed}: full {:.4} diff {:.4} ratio {:.4}", r.full, r.difference, r.ratio));
    }
    verdict("A6", pass, elapsed, Duration::from_secs(300), details.join("; "));
}

#[test]
fn a7_power_formula() {
    let t = Instant::now();
    let points = [
        (
            SimParams { rho_xi: 0.0, rho_delta: 0.5, gamma_bar: 0.4, gamma_jitter: 0.1, sigma: 1.0, mu_eps: 0.0, ..SimParams::default() },
            4,
        ),
        (
            SimParams {
                y_dist: TailDist::LogNormal { mu: -1.0, sigma: 0.5 },
                rho_xi: 0.02,
                rho_delta: 0.1,
                gamma_bar: 1.0,
                gamma_jitter: 0.25,
                sigma: 1.0,
                mu_eps: 0.0,
                ..SimParams::default()
            },
            10,
        ),
        (
            SimParams {
                y_dist: TailDist::Pareto { shape: 3.0, scale: 0.3 },
                rho_xi: 0.02,
                rho_delta: 0.2,
                gamma_bar: 0.25,
                gamma_jitter: 0.0625,
                sigma: 1.0,
                mu_eps: 0.0,
                ..SimParams::default()
            },
            8,
        ),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (i, (params, w)) in points.iter().enumerate() {
        let mc = monte_carlo_p_member(params, *w, 100_000, 70 + i as u64).unwrap();
        let formula = p_member(*w, params).unwrap();
        pass &= (mc - formula).abs() <= 0.03;
        details.push(format!("point {} (w={w}): MC {mc:.4} vs formula {formula:.4}", i + 1));
    }

    // closed-form hand oracles
    pass &= variance_tsign(1, 100, 0.5) == 0.0025;
    pass &= variance_tsign(8, 300, 0.7) == 2.0 * variance_tsign(4, 300, 0.7);
    pass &= variance_tsign(50, 50, 0.3) == 0.3 * 0.7;
    let no_signal = SimParams { rho_delta: 0.0, ..SimParams::default() };
    pass &= [1, 7, 40].iter().all(|&w| p_member(w, &no_signal).unwrap() == 0.5);
    let flat = power_curve(&no_signal, 512, &[5, 6, 7]).unwrap();
    pass &= flat.power.iter().all(|&p| p == 0.0) && flat.w_star == 5;
    let phi2 = p_member(4, &SimParams { rho_xi: 0.0, rho_delta: 0.5, gamma_bar: 2.0, sigma: 1.0, ..SimParams::default() }).unwrap();
    pass &= (phi2 - 0.977_249_868_051_820_8).abs() < 1e-10;
    details.push(format!("Φ(2) = {phi2:.10}"));

    verdict("A7", pass, t.elapsed(), Duration::from_secs(120), details.join(", "));
}

#[test]
fn a8_ensemble_ordering() {
    let t = Instant::now();
    let (rows, generated) = heavy_tail_aucs();
    let elapsed = t.elapsed().max(*generated);
    let mean = |f: fn(&SeedAucs) -> f64| rows.iter().map(f).sum::<f64>() / rows.len() as f64;
    let full = mean(|r| r.full);
    let small = mean(|r| r.small);
    let large = mean(|r| r.large);
    let pass = full >= small && small >= large - 0.01 && full - large >= 0.02;
    verdict(
        "A8",
        pass,
        elapsed,
        Duration::from_secs(600),
        format!("mean AUC full {full:.4}, small {small:.4}, large {large:.4}; full − large = {:.4}", full - large),
    );
}

#[test]
fn a9_invariances() {
    let t = Instant::now();
    let mut rng = rng(9);
    let schedule = preset("full", 0).unwrap();
    let mut failures = Vec::new();

    // dyadic losses keep every window sum exact under the transforms below
    for i in 0..100 {
        let n = rng.random_range(2..=300);
        let target: Vec<f64> = (0..n).map(|_| rng.random_range(0..4096) as f64 / 512.0).collect();
        let reference: Vec<f64> = (0..n).map(|_| rng.random_range(0..4096) as f64 / 512.0).collect();
        let base = LossRecord::new("x", Label::Member, target.clone(), reference.clone()).unwrap();
        let s0 = wbc_score(&base, &schedule).unwrap().total;
        for c in [0.5, 2.0, 3.0, 7.25] {
            let scaled = LossRecord::new(
                "x",
                Label::Member,
                target.iter().map(|v| v * c).collect(),
                reference.iter().map(|v| v * c).collect(),
            )
            .unwrap();
            if wbc_score(&scaled, &schedule).unwrap().total != s0 {
                failures.push(format!("scale {c} record {i}"));
            }
        }
        for b in [-1.5, 0.375, 10.0] {
            let shifted = LossRecord::new(
                "x",
                Label::Member,
                target.iter().map(|v| v + b).collect(),
                reference.iter().map(|v| v + b).collect(),
            )
            .unwrap();
            if wbc_score(&shifted, &schedule).unwrap().total != s0 {
                failures.push(format!("shift {b} record {i}"));
            }
        }
        if min_k_score(&base, 1.0).unwrap().score != loss_score(&base).score {
            failures.push(format!("min-k(1) record {i}"));
        }
    }

    for i in 0..100 {
        let n1 = rng.random_range(1..200);
        let n0 = rng.random_range(1..200);
        let pos: Vec<f64> = (0..n1).map(|_| (rng.random_range(0.0..1.0f64) * 30.0).round() / 3.0).collect();
        let neg: Vec<f64> = (0..n0).map(|_| (rng.random_range(-0.3..0.9f64) * 30.0).round() / 3.0).collect();
        let cs = ClassScores::new(pos.clone(), neg.clone()).unwrap();
        let mono = ClassScores::new(
            pos.iter().map(|x| (x / 7.0).exp() * 3.0 - 1.0).collect(),
            neg.iter().map(|x| (x / 7.0).exp() * 3.0 - 1.0).collect(),
        )
        .unwrap();
        if mono.auc() != cs.auc() {
            failures.push(format!("monotone transform set {i}"));
        }
        let negated = ClassScores::new(
            pos.iter().map(|x| -x).collect(),
            neg.iter().map(|x| -x).collect(),
        )
        .unwrap();
        if cs.twice_u() + negated.twice_u() != 2 * (n1 * n0) as u128 {
            failures.push(format!("negation set {i}"));
        }
    }
    verdict(
        "A9",
        failures.is_empty(),
        t.elapsed(),
        Duration::from_secs(10),
        if failures.is_empty() {
            "scale, shift, monotone, negation and Min-K%(1) identities exact".into()
        } else {
            format!("violations: {}", failures.join(", "))
        },
    );
}

#[test]
fn a10_diagnostics_calibration() {
    let t = Instant::now();
    let mut g = rng(10);
    let v: Vec<f64> = (0..1_000_000).map(|_| StandardNormal.sample(&mut g)).collect();
    let m = moments(&v).unwrap();
    let tail = tail_fraction(&v, 3.0).unwrap();
    let mut total = 0.0;
    for trial in 0..100 {
        let mut r = rng(1000 + trial);
        let mut pos = rand::seq::index::sample(&mut r, 100_000, 2000).into_vec();
        pos.sort_unstable();
        total += clustering_from_positions(&pos, 100_000).unwrap();
    }
    let cluster = total / 100.0;
    let pass = m.skewness.abs() <= 0.01
        && m.excess_kurtosis.abs() <= 0.05
        && (tail - 0.0027).abs() <= 0.0005
        && (cluster - 1.0).abs() <= 0.05;
    verdict(
        "A10",
        pass,
        t.elapsed(),
        Duration::from_secs(60),
        format!(
            "skew {:.4}, excess kurtosis {:.4}, 3σ tail {tail:.5}, clustering {cluster:.4}",
            m.skewness, m.excess_kurtosis
        ),
    );
}

fn wbc(dir: &Path, args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_wbc"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run wbc");
    assert!(out.status.success(), "wbc {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

/// Run every command in `dir`; return stdout of each plus all files written.
fn cli_run(dir: &Path, threads: &str) -> Vec<(String, Vec<u8>)> {
    let t = ["--threads", threads];
    let script: Vec<Vec<&str>> = vec![
        vec!["simulate", "--preset", "heavy-tail", "--members", "150", "--nonmembers", "150", "--seed", "1", "--output", "d.jsonl"],
        vec!["score", "--input", "d.jsonl", "--output", "s.csv", "--methods", "wbc,ratio,loss,difference,mink", "--schedule", "random", "--seed", "5"],
        vec!["eval", "--scores", "s.csv", "--n-bootstrap", "100", "--seed", "7", "--out-dir", "ev"],
        vec!["eval", "--input", "d.jsonl", "--methods", "wbc,difference", "--n-bootstrap", "60", "--seed", "3", "--out-dir", "ev2"],
        vec!["power", "--params", "d.params.json", "--n", "512", "--grid", "1:64", "--output", "p.csv"],
        vec!["power", "--preset", "heavy-tail", "--grid", "2,4,8"],
        vec!["diagnose", "--input", "d.jsonl", "--output", "diag.csv"],
        vec!["schedule", "--preset", "full"],
        vec!["schedule", "--geometric", "2:80:12"],
    ];
    let mut out = Vec::new();
    for (i, cmd) in script.iter().enumerate() {
        let mut args = cmd.clone();
        args.extend(t);
        out.push((format!("stdout#{i}"), wbc(dir, &args)));
    }
    let mut files: Vec<_> = walk(dir);
    files.sort();
    for f in files {
        let rel = f.strip_prefix(dir).unwrap().display().to_string();
        out.push((rel, std::fs::read(&f).unwrap()));
    }
    out
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut files = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            files.extend(walk(&p));
        } else {
            files.push(p);
        }
    }
    files
}

#[test]
fn a11_cli_determinism() {
    let t = Instant::now();
    let runs: Vec<_> = [("1", "a"), ("1", "b"), ("8", "c")]
        .iter()
        .map(|(threads, _)| {
            let dir = tempfile::tempdir().unwrap();
            (cli_run(dir.path(), threads), dir)
        })
        .collect();
    let names: Vec<&str> = runs[0].0.iter().map(|(n, _)| n.as_str()).collect();
    let mut diffs = Vec::new();
    for (label, other) in [("rerun", &runs[1].0), ("threads 1 vs 8", &runs[2].0)] {
        if other.len() != runs[0].0.len() {
            diffs.push(format!("{label}: different file sets"));
            continue;
        }
        for ((na, a), (nb, b)) in runs[0].0.iter().zip(other) {
            if na != nb || a != b {
                diffs.push(format!("{label}: {na}"));
            }
        }
    }
    verdict(
        "A11",
        diffs.is_empty(),
        t.elapsed(),
        Duration::from_secs(120),
        if diffs.is_empty() {
            format!("{} outputs byte-identical across reruns and thread counts", names.len())
        } else {
            format!("differences: {}", diffs.join(", "))
        },
    );
}
