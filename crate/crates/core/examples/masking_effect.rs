//! A single rare-token outlier swamps a global average but moves only the
//! few windows that contain it.

use wbc::{difference_score, preset, wbc_score, Label, LossRecord};

fn main() -> wbc::Result<()> {
    let n = 512;
    let reference = vec![3.0; n];
    // member: the target is 0.1 nats better on every token
    let clean: Vec<f64> = reference.iter().map(|r| r - 0.1).collect();
    let schedule = preset("full", 0)?;

    println!("{:>10} {:>12} {:>10}", "outlier", "difference", "wbc");
    for outlier in [0.0, 10.0, 50.0, 100.0, 500.0] {
        let mut target = clean.clone();
        target[200] += outlier;
        let r = LossRecord::new("m", Label::Member, target, reference.clone())?;
        println!(
            "{outlier:>10.1} {:>12.4} {:>10.4}",
            difference_score(&r).score,
            wbc_score(&r, &schedule)?.total
        );
    }
    Ok(())
}
