//! Tables from a tree of run directories.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use omnitrack::evaluator::{read_run, RunStatus, StoredRun, MANIFEST_FILE};
use omnitrack::measures::{EaoReport, ReportParams, SequenceRuns};

/// Every run directory under `root`, sorted. Hidden (staging) directories
/// are skipped.
pub fn find_runs(root: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        if dir.join(MANIFEST_FILE).is_file() {
            out.push(dir);
            continue;
        }
        let entries =
            std::fs::read_dir(&dir).with_context(|| format!("listing {}", dir.display()))?;
        for e in entries {
            let e = e?;
            let hidden = e.file_name().to_string_lossy().starts_with('.');
            if !hidden && e.file_type()?.is_dir() {
                stack.push(e.path());
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Groups complete runs by (tracker, pattern, sequence). Runs ended by an
/// infrastructure failure are left out and counted.
pub fn collect_runs(root: &Path) -> Result<(Vec<SequenceRuns>, usize)> {
    if !root.is_dir() {
        bail!("runs root {} is not a directory", root.display());
    }
    let mut groups: BTreeMap<(String, String, String), (usize, Vec<StoredRun>)> = BTreeMap::new();
    let mut skipped = 0;
    for dir in find_runs(root)? {
        let run = read_run(&dir)?;
        if run.manifest.run.status != RunStatus::Complete {
            eprintln!("skipping {}: infrastructure failure", dir.display());
            skipped += 1;
            continue;
        }
        let m = &run.manifest;
        let key = (
            m.tracker.name().to_string(),
            m.run.pattern.clone(),
            m.run.sequence.clone(),
        );
        let g = groups.entry(key).or_insert((m.run.length, Vec::new()));
        if g.0 != m.run.length {
            bail!(
                "{}: length {} differs from other repetitions ({})",
                dir.display(),
                m.run.length,
                g.0
            );
        }
        g.1.push(run);
    }
    let mut out = Vec::new();
    for ((tracker, pattern, sequence), (length, runs)) in groups {
        let traces = runs
            .iter()
            .map(|r| {
                r.overlap_trace()
                    .with_context(|| format!("trace in {}", r.dir.display()))
            })
            .collect::<Result<_>>()?;
        out.push(SequenceRuns {
            tracker,
            pattern,
            sequence,
            length,
            traces,
        });
    }
    Ok((out, skipped))
}

pub fn cmd_report(root: &Path, output: &Path, params: ReportParams) -> Result<EaoReport> {
    let (runs, _) = collect_runs(root)?;
    if runs.is_empty() {
        bail!("no complete runs under {}", root.display());
    }
    let report = EaoReport::compute(&runs, params)?;
    report
        .write_tables(output)
        .with_context(|| format!("writing tables to {}", output.display()))?;
    Ok(report)
}
