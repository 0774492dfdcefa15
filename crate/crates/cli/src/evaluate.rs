//! Supervised evaluation over every (pattern, sequence) slot.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use omnitrack::controllers::MotionPattern;
use omnitrack::evaluator::{
    handshake_failure, read_run, repetition_seed, resume_key, run_repetition, staging_dir,
    write_run, EventKind, FrameStore, LaunchError, RunManifest, RunStatus, RunTrace, StoredRun,
    TrackerSpec, STDERR_FILE,
};
use omnitrack::protocol::SessionError;
use omnitrack::renderer::SequenceGenerator;

use crate::config::{Resolved, Source};
use crate::ARTIFACT_VERSION;

pub const INDEX_FILE: &str = "index.json";

/// `runs/<tracker>/<pattern>/<sequence>/rep<k>` under `output`.
pub fn run_dir(output: &Path, tracker: &str, pattern: &str, sequence: &str, rep: usize) -> PathBuf {
    output
        .join("runs")
        .join(tracker)
        .join(pattern)
        .join(sequence)
        .join(format!("rep{rep}"))
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexEntry {
    pub pattern: String,
    pub sequence: String,
    pub repetition: usize,
    pub dir: PathBuf,
    pub status: RunStatus,
    pub failures: usize,
    /// Taken from an earlier invocation rather than run now.
    pub resumed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalSummary {
    pub artifact_version: String,
    pub tracker: String,
    pub runs: Vec<IndexEntry>,
    pub infrastructure_failures: usize,
    pub resumed: usize,
}

/// Runs the configured tracker over all slots. Launch errors abort with an
/// error; per-run crashes and timeouts are recorded and counted.
pub fn cmd_evaluate(r: &Resolved) -> Result<EvalSummary> {
    let c = &r.config;
    let spec = c
        .tracker
        .as_ref()
        .ok_or_else(|| anyhow!("no tracker configured"))?;
    let name = spec.name();
    if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
        bail!("tracker name {name:?} is not usable as a directory name");
    }
    // feasibility of every slot up front, before any tracker starts
    let mut slots = Vec::new();
    for pattern in &r.patterns {
        for src in &r.sources {
            let seq = SequenceGenerator::new(src.sequence.clone(), *pattern, c.width, c.height)
                .and_then(|s| s.check_feasible().map(|_| s))
                .with_context(|| {
                    format!("sequence {} pattern {}", src.sequence.id(), pattern.name())
                })?;
            slots.push((seq, src));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(c.workers)
        .build()?;
    let launch_error = Mutex::new(None);
    let done = AtomicUsize::new(0);
    let total = slots.len();
    let mut per_slot: Vec<Vec<IndexEntry>> = pool.install(|| {
        slots
            .par_iter()
            .map(|(seq, src)| {
                if launch_error.lock().unwrap().is_some() {
                    return Vec::new();
                }
                let out = run_slot(r, spec, seq, src);
                let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                match out {
                    Ok(entries) => {
                        eprintln!(
                            "[{n}/{total}] {} {} {}",
                            name,
                            seq.pattern().name(),
                            seq.source().id()
                        );
                        entries
                    }
                    Err(e) => {
                        launch_error.lock().unwrap().get_or_insert(e);
                        Vec::new()
                    }
                }
            })
            .collect()
    });
    if let Some(e) = launch_error.into_inner().unwrap() {
        return Err(e);
    }
    let mut runs: Vec<IndexEntry> = per_slot.drain(..).flatten().collect();
    runs.sort_by(|a, b| {
        (&a.pattern, &a.sequence, a.repetition).cmp(&(&b.pattern, &b.sequence, b.repetition))
    });
    let summary = EvalSummary {
        artifact_version: ARTIFACT_VERSION.to_string(),
        tracker: name.to_string(),
        infrastructure_failures: runs
            .iter()
            .filter(|e| e.status == RunStatus::InfrastructureFailure)
            .count(),
        resumed: runs.iter().filter(|e| e.resumed).count(),
        runs,
    };
    let index = c.output.join("runs").join(name).join(INDEX_FILE);
    crate::config::write_effective(c, &index.with_file_name(crate::config::EFFECTIVE_CONFIG))?;
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    let tmp = index.with_extension("json.tmp");
    std::fs::create_dir_all(index.parent().expect("has parent"))?;
    std::fs::write(&tmp, json)?;
    std::fs::rename(&tmp, &index)?;
    Ok(summary)
}

/// A finished run directory from an earlier invocation whose manifest
/// matches `want` in everything but the run outcome.
fn reusable(dir: &Path, want: &RunManifest) -> Option<StoredRun> {
    let stored = read_run(dir).ok()?;
    let m = &stored.manifest;
    let same = m.resume_key == want.resume_key
        && m.config == want.config
        && m.pattern == want.pattern
        && (m.width, m.height) == (want.width, want.height)
        && m.tracker == want.tracker
        && m.run.status == RunStatus::Complete;
    same.then_some(stored)
}

// Staging directories left by an interrupted invocation.
fn remove_stale_staging(dir: &Path) -> Result<()> {
    let (Some(parent), Some(name)) = (dir.parent(), dir.file_name()) else {
        return Ok(());
    };
    let prefix = format!(".{}.staging-", name.to_string_lossy());
    let Ok(entries) = std::fs::read_dir(parent) else {
        return Ok(());
    };
    for e in entries {
        let e = e?;
        if e.file_name().to_string_lossy().starts_with(&prefix) {
            std::fs::remove_dir_all(e.path())?;
        }
    }
    Ok(())
}

fn run_slot(
    r: &Resolved,
    spec: &TrackerSpec,
    seq: &SequenceGenerator,
    src: &Source,
) -> Result<Vec<IndexEntry>> {
    let c = &r.config;
    let name = spec.name();
    let pattern: MotionPattern = *seq.pattern();
    let store = FrameStore::new(
        c.output
            .join("frames")
            .join(pattern.name())
            .join(seq.source().id()),
    );
    let mut entries = Vec::new();
    let mut reps = c.run.repetitions;
    let mut k = 0;
    while k < reps {
        let seed = repetition_seed(&c.run, name, seq, k);
        let dir = run_dir(&c.output, name, pattern.name(), seq.source().id(), k);
        // the run outcome is not part of the comparison
        let placeholder = handshake_failure(name, seq, k, seed, SessionError::Closed).meta;
        let key = resume_key(name, pattern.name(), seq.source().id(), k, seed);
        let manifest_for = |run| RunManifest {
            artifact_version: ARTIFACT_VERSION.to_string(),
            resume_key: key.clone(),
            run,
            config: c.run,
            pattern,
            width: c.width,
            height: c.height,
            tracker: spec.clone(),
            extra: serde_json::json!({ "bench_seed": c.seed, "source": src.origin }),
        };
        if let Some(stored) = reusable(&dir, &manifest_for(placeholder.clone())) {
            if stored.manifest.run.deterministic {
                reps = 1;
            }
            entries.push(IndexEntry {
                pattern: pattern.name().to_string(),
                sequence: seq.source().id().to_string(),
                repetition: k,
                dir,
                status: RunStatus::Complete,
                failures: stored
                    .events
                    .iter()
                    .filter(|e| e.kind == EventKind::Failure)
                    .count(),
                resumed: true,
            });
            k += 1;
            continue;
        }
        remove_stale_staging(&dir)?;
        let staging = staging_dir(&dir);
        std::fs::create_dir_all(&staging)?;
        let trace: RunTrace =
            match spec.launch(seed, Some(&staging.join(STDERR_FILE)), c.run.timeout()) {
                Ok(mut tracker) => {
                    if tracker.meta().deterministic {
                        reps = 1;
                    }
                    run_repetition(tracker.as_mut(), seq, &c.run, k, seed, Some(&store))?
                }
                Err(LaunchError::Handshake(e)) => handshake_failure(name, seq, k, seed, e),
                Err(LaunchError::Transport(e)) => {
                    let _ = std::fs::remove_dir_all(&staging);
                    return Err(anyhow::Error::new(e).context(format!("launching tracker {name}")));
                }
            };
        write_run(&dir, &staging, &trace, &manifest_for(trace.meta.clone()))?;
        entries.push(IndexEntry {
            pattern: pattern.name().to_string(),
            sequence: seq.source().id().to_string(),
            repetition: k,
            dir,
            status: trace.meta.status,
            failures: trace.failures(),
            resumed: false,
        });
        k += 1;
    }
    Ok(entries)
}
