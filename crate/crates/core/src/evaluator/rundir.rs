use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::trackers::TrackerSpec;
use super::{EvalError, Event, RunConfig, RunMeta, RunTrace};
use crate::controllers::MotionPattern;
use crate::measures::{FrameKind, MeasureError, OverlapFrame, OverlapTrace};

pub const TRACE_FILE: &str = "trace.csv";
pub const EVENTS_FILE: &str = "events.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const STDERR_FILE: &str = "tracker_stderr.log";

/// Everything needed to reproduce one repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub resume_key: String,
    pub run: RunMeta,
    pub config: RunConfig,
    pub pattern: MotionPattern,
    pub width: u32,
    pub height: u32,
    pub tracker: TrackerSpec,
    #[serde(default)]
    pub extra: serde_json::Value,
}

/// Hex SHA-256 of the (tracker, pattern, sequence, repetition, seed) tuple.
pub fn resume_key(
    tracker: &str,
    pattern: &str,
    sequence: &str,
    repetition: usize,
    seed: u64,
) -> String {
    let mut h = Sha256::new();
    for part in [tracker, pattern, sequence] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    h.update((repetition as u64).to_le_bytes());
    h.update(seed.to_le_bytes());
    h.finalize()
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> EvalError + '_ {
    move |source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn kind_name(k: FrameKind) -> &'static str {
    match k {
        FrameKind::Init => "init",
        FrameKind::Tracked => "tracked",
        FrameKind::Failure => "failure",
        FrameKind::Skipped => "skipped",
    }
}

fn trace_csv(trace: &RunTrace) -> String {
    let mut out = String::from("frame,overlap,region,flags\n");
    for f in &trace.frames {
        let overlap = f.overlap.map(|o| o.to_string()).unwrap_or_default();
        let region = f.region.map(|r| r.to_string()).unwrap_or_default();
        let mut flags = kind_name(f.kind).to_string();
        if f.degenerate {
            flags.push_str("|degenerate");
        }
        let _ = writeln!(out, "{},{},\"{}\",{}", f.index, overlap, region, flags);
    }
    out
}

/// Writes the run directory atomically: files go to a sibling staging
/// directory that is renamed over `dir`. `staging` may already exist and
/// hold the tracker's stderr log.
pub fn write_run(
    dir: &Path,
    staging: &Path,
    trace: &RunTrace,
    manifest: &RunManifest,
) -> Result<(), EvalError> {
    std::fs::create_dir_all(staging).map_err(io(staging))?;
    let put = |name: &str, body: &[u8]| {
        let p = staging.join(name);
        std::fs::write(&p, body).map_err(io(&p))
    };
    put(TRACE_FILE, trace_csv(trace).as_bytes())?;
    let events = serde_json::to_vec_pretty(&trace.events).expect("events serialize");
    put(EVENTS_FILE, &events)?;
    let man = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    put(MANIFEST_FILE, &man)?;
    let log = staging.join(STDERR_FILE);
    if !log.exists() {
        put(STDERR_FILE, b"")?;
    }
    if let Some(parent) = dir.parent() {
        std::fs::create_dir_all(parent).map_err(io(parent))?;
    }
    if dir.exists() {
        std::fs::remove_dir_all(dir).map_err(io(dir))?;
    }
    std::fs::rename(staging, dir).map_err(io(dir))
}

/// Staging directory used by [`write_run`] for `dir`.
pub fn staging_dir(dir: &Path) -> PathBuf {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    dir.with_file_name(format!(".{name}.staging-{}", std::process::id()))
}

/// A run directory read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredRun {
    pub dir: PathBuf,
    pub manifest: RunManifest,
    pub frames: Vec<OverlapFrame>,
    pub events: Vec<Event>,
}

impl StoredRun {
    pub fn overlap_trace(&self) -> Result<OverlapTrace, MeasureError> {
        OverlapTrace::new(self.frames.clone())
    }
}

pub fn read_run(dir: &Path) -> Result<StoredRun, EvalError> {
    let read = |name: &str| {
        let p = dir.join(name);
        std::fs::read_to_string(&p).map_err(io(&p))
    };
    let bad = |name: &str, message: String| EvalError::Format {
        path: dir.join(name),
        message,
    };
    let manifest: RunManifest = serde_json::from_str(&read(MANIFEST_FILE)?)
        .map_err(|e| bad(MANIFEST_FILE, e.to_string()))?;
    let events: Vec<Event> =
        serde_json::from_str(&read(EVENTS_FILE)?).map_err(|e| bad(EVENTS_FILE, e.to_string()))?;
    let text = read(TRACE_FILE)?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut frames = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(TRACE_FILE, e.to_string()))?;
        let line = i + 2;
        let field = |k: usize| {
            rec.get(k)
                .ok_or_else(|| bad(TRACE_FILE, format!("line {line}: missing field {k}")))
        };
        let overlap = match field(1)? {
            "" => None,
            s => Some(
                s.parse::<f64>()
                    .map_err(|e| bad(TRACE_FILE, format!("line {line}: {e}")))?,
            ),
        };
        let kind = match field(3)?.split('|').next().unwrap_or_default() {
            "init" => FrameKind::Init,
            "tracked" => FrameKind::Tracked,
            "failure" => FrameKind::Failure,
            "skipped" => FrameKind::Skipped,
            other => {
                return Err(bad(
                    TRACE_FILE,
                    format!("line {line}: unknown flag {other:?}"),
                ))
            }
        };
        frames.push(OverlapFrame::new(kind, overlap));
    }
    Ok(StoredRun {
        dir: dir.to_path_buf(),
        manifest,
        frames,
        events,
    })
}
