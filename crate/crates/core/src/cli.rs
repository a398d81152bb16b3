//! Command-line front end. Every command is a pure function of its flags
//! and input files, so reruns produce byte-identical outputs.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::attack::ScheduleSpec;
use crate::baselines::{ScoredRecord, DEFAULT_MIN_K};
use crate::dataset::{load_jsonl_lenient, write_jsonl, Dataset, Label, Rejection};
use crate::diagnostics::{ccdf, diagnose_dataset, format_diagnostics, histogram, pooled_delta};
use crate::error::{Error, Result};
use crate::metrics::{bootstrap_evaluate, format_table, BootstrapConfig, ClassScores, EvalReport};
use crate::power::{parse_grid, power_curve};
use crate::scoring::{parse_methods, score_dataset, Method, ScoreTable};
use crate::sim::{named_preset, sample_dataset, SimParams};

#[derive(Debug, Parser)]
#[command(name = "wbc", version, about = "Window-based comparison membership inference")]
pub struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every record with the requested methods.
    Score(ScoreArgs),
    /// Evaluate methods with AUC, TPR at low FPR and bootstrap spread.
    Eval(EvalArgs),
    /// Generate a synthetic labeled dataset.
    Simulate(SimulateArgs),
    /// Closed-form detection power over a window grid.
    Power(PowerArgs),
    /// Distribution diagnostics of the loss differences.
    Diagnose(DiagnoseArgs),
    /// Print the window sizes of a schedule.
    Schedule(ScheduleArgs),
}

#[derive(Debug, Args)]
pub struct MethodArgs {
    /// Comma-separated methods: wbc, loss, ratio, difference, mink
    /// [default: wbc, or every method present in a score file].
    #[arg(long)]
    pub methods: Option<String>,
    /// Preset name, explicit sizes `2,4,8`, or `geo:W_MIN:W_MAX:COUNT`.
    #[arg(long, default_value = "full")]
    pub schedule: String,
    /// Min-K% fraction.
    #[arg(long, default_value_t = DEFAULT_MIN_K)]
    pub k: f64,
    /// Seed for randomized schedules and bootstrap resampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Score CSV; `.wbc.json` and `.rejects.jsonl` sidecars go next to it.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub method: MethodArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Dataset to score inline.
    #[arg(long, conflicts_with = "scores", required_unless_present = "scores")]
    pub input: Option<PathBuf>,
    /// Score CSV written by `score`.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Comma-separated FPR targets.
    #[arg(long, default_value = "0.1,0.01,0.001")]
    pub fpr: String,
    #[arg(long, default_value_t = crate::metrics::DEFAULT_BOOTSTRAP_ROUNDS)]
    pub n_bootstrap: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Named parameter set: heavy-tail or null.
    #[arg(long, conflicts_with = "params")]
    pub preset: Option<String>,
    /// JSON parameter file.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pub members: usize,
    #[arg(long, default_value_t = 2000)]
    pub nonmembers: usize,
    /// Overrides the seed of the parameter set.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the record length.
    #[arg(long)]
    pub n: Option<usize>,
    /// Dataset JSONL; the parameters used go to a `.params.json` sidecar.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    #[arg(long, conflicts_with = "params")]
    pub preset: Option<String>,
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Record length (defaults to the parameter set's).
    #[arg(long)]
    pub n: Option<usize>,
    /// `A:B` inclusive range or comma list.
    #[arg(long, default_value = "1:64")]
    pub grid: String,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Diagnostics CSV; `.hist.csv` and `.ccdf.csv` sidecars go next to it.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = crate::diagnostics::DEFAULT_K_SIGMA)]
    pub k_sigma: f64,
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
    #[arg(long, default_value_t = 200)]
    pub ccdf_points: usize,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ScheduleSource {
    #[arg(long)]
    pub preset: Option<String>,
    /// Explicit sizes, e.g. `2,4,8`.
    #[arg(long)]
    pub windows: Option<String>,
    /// `W_MIN:W_MAX:COUNT`.
    #[arg(long)]
    pub geometric: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub source: ScheduleSource,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Parse `args`, run the command and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Score(a) => cmd_score(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Power(a) => cmd_power(&a),
        Command::Diagnose(a) => cmd_diagnose(&a),
        Command::Schedule(a) => cmd_schedule(&a),
    })
}

/// `dir/name.csv` with suffix `.wbc.json` becomes `dir/name.wbc.json`.
fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.with_extension("").into_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| csv_err(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn build_methods(args: &MethodArgs) -> Result<Vec<Method>> {
    let kinds = parse_methods(args.methods.as_deref().unwrap_or("wbc"))?;
    let schedule = args.schedule.parse::<ScheduleSpec>()?.resolve(args.seed)?;
    Ok(kinds
        .into_iter()
        .map(|k| Method::from_kind(k, &schedule, args.k))
        .collect())
}

fn load_lenient(path: &Path) -> Result<(Dataset, Vec<Rejection>)> {
    let (dataset, rejects) = load_jsonl_lenient(path)?;
    for r in &rejects {
        log::warn!("{}: line {}: {}", path.display(), r.line, r.reason);
    }
    Ok((dataset, rejects))
}

#[derive(Serialize, Deserialize)]
struct ScoreRow {
    id: String,
    label: Label,
    method: String,
    score: f64,
}

#[derive(Serialize)]
struct RejectRow<'a> {
    line: Option<usize>,
    id: Option<&'a str>,
    method: Option<&'a str>,
    reason: &'a str,
}

fn write_score_csv(path: &Path, table: &ScoreTable) -> Result<()> {
    let mut w = csv_writer(path)?;
    for m in &table.methods {
        for s in &m.scores {
            w.serialize(ScoreRow {
                id: s.record_id.clone(),
                label: s.label,
                method: s.method.clone(),
                score: s.score,
            })
            .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn cmd_score(args: &ScoreArgs) -> Result<()> {
    let methods = build_methods(&args.method)?;
    let (dataset, load_rejects) = load_lenient(&args.input)?;
    let table = score_dataset(&dataset, &methods);

    write_score_csv(&args.output, &table)?;
    if methods.iter().any(|m| matches!(m, Method::Wbc(_))) {
        write_json(&sidecar(&args.output, ".wbc.json"), &table.wbc_detail)?;
    }

    let rejects_path = sidecar(&args.output, ".rejects.jsonl");
    let mut out = BufWriter::new(File::create(&rejects_path).map_err(|e| Error::io(&rejects_path, e))?);
    let rows = load_rejects
        .iter()
        .map(|r| RejectRow {
            line: Some(r.line),
            id: r.id.as_deref(),
            method: None,
            reason: &r.reason,
        })
        .chain(table.failures.iter().map(|f| RejectRow {
            line: None,
            id: Some(&f.record_id),
            method: Some(&f.method),
            reason: &f.reason,
        }));
    for row in rows {
        serde_json::to_writer(&mut out, &row)?;
        out.write_all(b"\n").map_err(|e| Error::io(&rejects_path, e))?;
    }
    out.flush().map_err(|e| Error::io(&rejects_path, e))?;

    for f in &table.failures {
        log::warn!("{} could not score `{}`: {}", f.method, f.record_id, f.reason);
    }
    if table.total_scored() == 0 {
        return Err(Error::NothingScoreable {
            failures: table.failures.len() + load_rejects.len(),
        });
    }
    println!(
        "scored {} records with {} method(s); {} failure(s)",
        dataset.len(),
        methods.len(),
        table.failures.len() + load_rejects.len()
    );
    Ok(())
}

fn parse_fpr_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("`{t}` is not an FPR")))
        })
        .collect()
}

/// Scores grouped by method, in first-appearance order.
fn read_score_csv(path: &Path, keep: Option<&[String]>) -> Result<Vec<(String, Vec<ScoredRecord>)>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut groups: Vec<(String, Vec<ScoredRecord>)> = Vec::new();
    for row in reader.deserialize::<ScoreRow>() {
        let row = row.map_err(|e| csv_err(path, e))?;
        if keep.is_some_and(|k| !k.contains(&row.method)) {
            continue;
        }
        let scored = ScoredRecord {
            record_id: row.id,
            label: row.label,
            method: row.method.clone(),
            score: row.score,
        };
        match groups.iter_mut().find(|g| g.0 == row.method) {
            Some(g) => g.1.push(scored),
            None => groups.push((row.method, vec![scored])),
        }
    }
    Ok(groups)
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let config = BootstrapConfig {
        n_bootstrap: args.n_bootstrap,
        seed: args.method.seed,
        fpr_targets: parse_fpr_list(&args.fpr)?,
    };
    let groups = match (&args.input, &args.scores) {
        (Some(input), _) => {
            let methods = build_methods(&args.method)?;
            let (dataset, _) = load_lenient(input)?;
            let table = score_dataset(&dataset, &methods);
            for f in &table.failures {
                log::warn!("{} could not score `{}`: {}", f.method, f.record_id, f.reason);
            }
            table.methods.into_iter().map(|m| (m.method, m.scores)).collect()
        }
        (None, Some(scores)) => {
            let requested: Option<Vec<String>> = args
                .method
                .methods
                .as_deref()
                .map(parse_methods)
                .transpose()?
                .map(|ks| ks.iter().map(|k| k.as_str().to_string()).collect());
            read_score_csv(scores, requested.as_deref())?
        }
        (None, None) => return Err(Error::InvalidArgument("need --input or --scores".into())),
    };
    if groups.is_empty() {
        return Err(Error::InvalidArgument("no scores to evaluate".into()));
    }

    fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    let mut reports: Vec<EvalReport> = Vec::new();
    for (method, scored) in &groups {
        let classes = ClassScores::from_scored(scored)?;
        reports.push(bootstrap_evaluate(method, &classes, &config)?);

        let roc_path = args.out_dir.join(format!("roc_{method}.csv"));
        let mut w = csv_writer(&roc_path)?;
        w.write_record(["fpr", "tpr"]).map_err(|e| csv_err(&roc_path, e))?;
        for (fpr, tpr) in classes.roc_points() {
            w.serialize((fpr, tpr)).map_err(|e| csv_err(&roc_path, e))?;
        }
        w.flush().map_err(|e| Error::io(&roc_path, e))?;
    }
    write_json(&args.out_dir.join("reports.json"), &reports)?;
    let table = format_table(&reports);
    let txt = args.out_dir.join("report.txt");
    fs::write(&txt, &table).map_err(|e| Error::io(&txt, e))?;
    print!("{table}");
    Ok(())
}

fn resolve_params(preset: Option<&str>, params: Option<&Path>) -> Result<SimParams> {
    match (preset, params) {
        (_, Some(path)) => SimParams::from_json_file(path),
        (Some(name), None) => named_preset(name),
        (None, None) => named_preset("heavy-tail"),
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let mut params = resolve_params(args.preset.as_deref(), args.params.as_deref())?;
    if let Some(seed) = args.seed {
        params.seed = seed;
    }
    if let Some(n) = args.n {
        params.n = n;
    }
    let dataset = sample_dataset(&params, args.members, args.nonmembers)?;
    write_jsonl(&dataset, &args.output)?;
    params.to_json_file(sidecar(&args.output, ".params.json"))?;
    println!(
        "wrote {} records of {} tokens to {}",
        dataset.len(),
        params.n,
        args.output.display()
    );
    Ok(())
}

pub fn cmd_power(args: &PowerArgs) -> Result<()> {
    let params = resolve_params(args.preset.as_deref(), args.params.as_deref())?;
    let n = args.n.unwrap_or(params.n);
    let profile = power_curve(&params, n, &parse_grid(&args.grid)?)?;
    let csv = profile.to_csv();
    match &args.output {
        Some(path) => {
            fs::write(path, &csv).map_err(|e| Error::io(path, e))?;
            println!("w_star = {}", profile.w_star);
        }
        None => print!("{csv}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct DiagRow<'a> {
    class: &'a str,
    n_tokens: usize,
    mean: f64,
    std: f64,
    skewness: f64,
    excess_kurtosis: f64,
    k_sigma: f64,
    tail_fraction: f64,
    n_extremes: usize,
    clustering_coefficient: Option<f64>,
}

pub fn cmd_diagnose(args: &DiagnoseArgs) -> Result<()> {
    let (dataset, _) = load_lenient(&args.input)?;
    let rows = diagnose_dataset(&dataset, args.k_sigma)?;

    let mut w = csv_writer(&args.output)?;
    for r in &rows {
        let d = &r.diagnostics;
        w.serialize(DiagRow {
            class: &r.class,
            n_tokens: d.n_tokens,
            mean: d.mean,
            std: d.std,
            skewness: d.skewness,
            excess_kurtosis: d.excess_kurtosis,
            k_sigma: d.k_sigma,
            tail_fraction: d.tail_fraction,
            n_extremes: d.n_extremes,
            clustering_coefficient: d.clustering_coefficient,
        })
        .map_err(|e| csv_err(&args.output, e))?;
    }
    w.flush().map_err(|e| Error::io(&args.output, e))?;

    let hist_path = sidecar(&args.output, ".hist.csv");
    let ccdf_path = sidecar(&args.output, ".ccdf.csv");
    let mut hist = csv_writer(&hist_path)?;
    let mut tail = csv_writer(&ccdf_path)?;
    hist.write_record(["class", "lo", "hi", "count", "density"])
        .map_err(|e| csv_err(&hist_path, e))?;
    tail.write_record(["class", "delta", "ccdf"])
        .map_err(|e| csv_err(&ccdf_path, e))?;
    for r in &rows {
        let label = r.class.parse::<Label>().ok();
        let values = pooled_delta(&dataset, label);
        for b in histogram(&values, args.bins)? {
            hist.serialize((&r.class, b.lo, b.hi, b.count, b.density))
                .map_err(|e| csv_err(&hist_path, e))?;
        }
        for (x, p) in ccdf(&values, args.ccdf_points) {
            tail.serialize((&r.class, x, p)).map_err(|e| csv_err(&ccdf_path, e))?;
        }
    }
    hist.flush().map_err(|e| Error::io(&hist_path, e))?;
    tail.flush().map_err(|e| Error::io(&ccdf_path, e))?;

    print!("{}", format_diagnostics(&rows));
    Ok(())
}

pub fn cmd_schedule(args: &ScheduleArgs) -> Result<()> {
    let src = &args.source;
    let spec = if let Some(p) = &src.preset {
        ScheduleSpec::Preset(p.parse()?)
    } else if let Some(w) = &src.windows {
        w.parse::<ScheduleSpec>()?
    } else if let Some(g) = &src.geometric {
        format!("geo:{g}").parse::<ScheduleSpec>()?
    } else {
        return Err(Error::InvalidArgument("no schedule given".into()));
    };
    println!("{}", spec.resolve(args.seed)?);
    Ok(())
}
