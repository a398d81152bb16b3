//! AUC of every schedule preset on the heavy-tail simulator, averaged over
//! a few seeds.

use wbc::attack::Preset;
use wbc::{heavy_tail_preset, metrics, sample_dataset, score_dataset, Method, SimParams};

fn main() -> wbc::Result<()> {
    let seeds = [0, 1, 2];
    let mut sums = vec![0.0; Preset::ALL.len()];
    for &seed in &seeds {
        let dataset = sample_dataset(&SimParams { seed, ..heavy_tail_preset() }, 1000, 1000)?;
        for (i, p) in Preset::ALL.iter().enumerate() {
            let table = score_dataset(&dataset, &[Method::Wbc(p.schedule(seed))]);
            sums[i] += metrics::auc(&table.methods[0].scores)?;
        }
    }
    for (p, s) in Preset::ALL.iter().zip(sums) {
        println!("{:<15} AUC {:.4}", p.name(), s / seeds.len() as f64);
    }
    Ok(())
}
