//! Attribute statistics of an annotated dataset.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

use omnitrack::datasetstats::{dataset_stats, AttributeDataset, DatasetStats};

/// One header line and one row: the dataset-level numbers.
pub fn summary_csv(s: &DatasetStats) -> String {
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    format!(
        "sequences,frames,annotated_frames,mac,fpa,inter\n{},{},{},{},{},{}\n",
        s.sequences,
        s.frames,
        s.annotated_frames,
        s.mac,
        opt(s.fpa.mean),
        opt(s.inter)
    )
}

pub fn per_attribute_csv(s: &DatasetStats) -> String {
    let mut out = String::from("attribute,fpa\n");
    for (a, v) in &s.fpa.per_attribute {
        let _ = writeln!(out, "{a},{v}");
    }
    out
}

/// Computes the statistics of the JSON annotation file at `input`; writes
/// `stats.csv`, `fpa.csv` and `stats.json` to `output` when given.
pub fn cmd_stats(input: &Path, output: Option<&Path>) -> Result<DatasetStats> {
    let text =
        std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let d = AttributeDataset::from_json(&text)
        .with_context(|| format!("parsing {}", input.display()))?;
    let s = dataset_stats(&d);
    if let Some(dir) = output {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("stats.csv"), summary_csv(&s))?;
        std::fs::write(dir.join("fpa.csv"), per_attribute_csv(&s))?;
        let mut json = serde_json::to_string_pretty(&s)?;
        json.push('\n');
        std::fs::write(dir.join("stats.json"), json)?;
    }
    Ok(s)
}
