//! Lenient JSONL loading: bad lines are collected instead of aborting.

use std::io::Write;

use wbc::load_jsonl_lenient;

fn main() -> wbc::Result<()> {
    let mut file = tempfile::NamedTempFile::new().map_err(|e| wbc::Error::InvalidArgument(e.to_string()))?;
    let lines = [
        r#"{"id":"a","label":"member","target_losses":[1.2,0.8,1.1],"ref_losses":[1.9,1.5,1.6]}"#,
        r#"{"id":"b","label":"nonmember","target_losses":[2.0,1.0],"ref_losses":[2.1]}"#,
        r#"{"id":"c","target_losses":[0.4,0.9],"ref_losses":[0.5,1.0]}"#,
        "{ truncated",
    ];
    writeln!(file, "{}", lines.join("\n")).map_err(|e| wbc::Error::InvalidArgument(e.to_string()))?;

    let (dataset, rejects) = load_jsonl_lenient(file.path())?;
    for r in dataset.records() {
        println!("kept {} ({}, {} tokens)", r.id(), r.label(), r.len());
    }
    for r in rejects {
        println!("line {}: {}", r.line, r.reason);
    }
    Ok(())
}
