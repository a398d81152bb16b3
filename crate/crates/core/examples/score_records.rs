//! Score a single record with WBC and every baseline, and inspect the
//! per-window sign statistics.

use wbc::{
    difference_score, loss_score, min_k_score, preset, ratio_score, wbc_score, Label, LossRecord,
};

fn main() -> wbc::Result<()> {
    // the target model is slightly better than the reference on most
    // tokens, but one rare token is far worse
    let n = 64;
    let reference: Vec<f64> = (0..n).map(|i| 3.0 + (i % 7) as f64 * 0.1).collect();
    let mut target: Vec<f64> = reference.iter().map(|r| r - 0.15).collect();
    target[40] += 25.0;
    let record = LossRecord::new("doc-1", Label::Unknown, target, reference)?;

    let wbc = wbc_score(&record, &preset("full", 0)?)?;
    println!("WBC score {:.4}", wbc.total);
    for (w, t) in &wbc.per_window {
        println!("  w = {w:>2}  T_sign = {t:.4}");
    }

    println!("Loss       {:.4}", loss_score(&record).score);
    println!("Difference {:.4}", difference_score(&record).score);
    println!("Ratio      {:.4}", ratio_score(&record)?.score);
    println!("Min-K% 20  {:.4}", min_k_score(&record, 0.2)?.score);
    Ok(())
}
