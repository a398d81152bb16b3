//! Window schedules: named presets, the geometric progression and
//! explicit lists.

use wbc::attack::{geometric_schedule, Preset, ScheduleSpec};

fn main() -> wbc::Result<()> {
    for p in Preset::ALL {
        println!("{:<15} {}", p.name(), p.schedule(0));
    }

    println!("\ngeometric(2, 40, 10) = {}", geometric_schedule(2, 40, 10)?);

    // the same strings the CLI accepts
    for spec in ["full", "2,4,8,16", "geo:4:64:5", "random"] {
        let s: ScheduleSpec = spec.parse()?;
        println!("{spec:>12} -> {}", s.resolve(7)?);
    }
    Ok(())
}
