//! Moments, tail mass and clustering of Δ per label class, plus the
//! histogram and CCDF points behind a density plot.

use wbc::diagnostics::{ccdf, diagnose_dataset, format_diagnostics, histogram, pooled_delta};
use wbc::{heavy_tail_preset, sample_dataset, Label};

fn main() -> wbc::Result<()> {
    let dataset = sample_dataset(&heavy_tail_preset(), 500, 500)?;
    print!("{}", format_diagnostics(&diagnose_dataset(&dataset, 3.0)?));

    let members = pooled_delta(&dataset, Some(Label::Member));
    let bins = histogram(&members, 12)?;
    println!("\nmember Δ histogram");
    for b in bins {
        println!("  [{:>8.2}, {:>8.2})  {}", b.lo, b.hi, b.count);
    }
    println!("\nupper tail P(Δ ≥ x)");
    for (x, p) in ccdf(&members, 8) {
        println!("  {x:>9.3}  {p:.2e}");
    }
    Ok(())
}
