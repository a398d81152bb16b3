//! Generate a labeled synthetic dataset, save it as JSONL with its
//! parameters, and load it back.

use wbc::{heavy_tail_preset, load_jsonl, sample_dataset, write_jsonl, SimParams};

fn main() -> wbc::Result<()> {
    let params = SimParams { seed: 3, ..heavy_tail_preset() };
    let dataset = sample_dataset(&params, 100, 100)?;

    let dir = std::env::temp_dir().join("wbc-example");
    std::fs::create_dir_all(&dir).map_err(|e| wbc::Error::InvalidArgument(e.to_string()))?;
    let path = dir.join("synthetic.jsonl");
    write_jsonl(&dataset, &path)?;
    params.to_json_file(dir.join("synthetic.params.json"))?;

    let back = load_jsonl(&path)?;
    assert_eq!(back.records(), dataset.records());
    let (m, n) = back.class_counts();
    println!("{} members, {} non-members, {} tokens each -> {}", m, n, params.n, path.display());

    let first = &back.records()[0];
    println!("{}: mean Δ {:.4}", first.id(), first.delta().mean());
    Ok(())
}
