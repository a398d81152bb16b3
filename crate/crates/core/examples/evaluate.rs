//! Compare WBC with the baselines: AUC and TPR at low FPR with bootstrap
//! spread, on simulated heavy-tailed data.

use wbc::metrics::{format_table, BootstrapConfig, ClassScores};
use wbc::{bootstrap_evaluate, heavy_tail_preset, preset, sample_dataset, score_dataset, Method};

fn main() -> wbc::Result<()> {
    let dataset = sample_dataset(&heavy_tail_preset(), 1000, 1000)?;
    let methods = [
        Method::Wbc(preset("full", 0)?),
        Method::Difference,
        Method::Ratio,
        Method::Loss,
        Method::MinK(0.2),
    ];
    let table = score_dataset(&dataset, &methods);

    let config = BootstrapConfig { n_bootstrap: 100, seed: 7, ..Default::default() };
    let mut reports = Vec::new();
    for m in &table.methods {
        let scores = ClassScores::from_scored(&m.scores)?;
        reports.push(bootstrap_evaluate(&m.method, &scores, &config)?);
    }
    print!("{}", format_table(&reports));
    Ok(())
}
