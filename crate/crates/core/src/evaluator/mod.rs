//! Supervised evaluation: run a tracker over a viewpoint sequence,
//! re-initialize it after failures and record what happened.

mod rundir;
mod supervised;
mod trackers;

pub use rundir::{
    read_run, resume_key, staging_dir, write_run, RunManifest, StoredRun, EVENTS_FILE,
    MANIFEST_FILE, STDERR_FILE, TRACE_FILE,
};
pub use supervised::{
    detect_failure, handshake_failure, repetition_seed, run_repetition, run_supervised, FrameStore,
};
pub use trackers::{
    FrameInput, LaunchError, ReferenceKind, SessionTracker, Tracker, TrackerSpec, ADDR_PLACEHOLDER,
};

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::ImagePolygon;
use crate::measures::{FrameKind, MeasureError, OverlapFrame, OverlapTrace};
use crate::protocol::{Region, TransportError};
use crate::renderer::RenderError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid run configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("cannot start tracker: {0}")]
    Launch(#[from] TransportError),
    #[error("tracker needs images but no frame directory was given")]
    NoFrameStore,
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format {
        path: std::path::PathBuf,
        message: String,
    },
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Overlaps at or below this count as failures.
    pub failure_overlap: f64,
    /// Frames left out after a failure before re-initializing.
    pub reinit_skip: usize,
    /// Frames after each initialization excluded from accuracy.
    pub burn_in: usize,
    /// Repetitions for trackers that are not deterministic.
    pub repetitions: usize,
    /// Per-message response timeout in seconds.
    pub timeout: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            failure_overlap: 0.0,
            reinit_skip: 5,
            burn_in: 10,
            repetitions: 3,
            timeout: 30.0,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: &str| Err(EvalError::Config(m.to_string()));
        if !(0.0..1.0).contains(&self.failure_overlap) {
            return bad("failure_overlap must be in [0, 1)");
        }
        if self.reinit_skip < 1 {
            return bad("reinit_skip must be at least 1");
        }
        if self.repetitions < 1 {
            return bad("repetitions must be at least 1");
        }
        if !(self.timeout > 0.0 && self.timeout.is_finite()) {
            return bad("timeout must be positive");
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Init,
    Failure,
    Reinit,
    /// Tracker process died, closed the stream or broke the protocol.
    Crash,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub frame: usize,
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub index: usize,
    pub gt: ImagePolygon<f64>,
    /// Reported region; absent on skipped frames.
    pub region: Option<Region>,
    pub overlap: Option<f64>,
    pub kind: FrameKind,
    /// The reported region had no area or crossed itself.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    /// Crash or timeout; the repetition does not count.
    InfrastructureFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub tracker: String,
    pub tracker_version: Option<String>,
    pub deterministic: bool,
    pub pattern: String,
    pub sequence: String,
    pub repetition: usize,
    /// Seed handed to the tracker for this repetition.
    pub seed: u64,
    pub controller_seed: u64,
    pub length: usize,
    pub status: RunStatus,
    pub wall_time: f64,
}

/// Record of one repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub frames: Vec<FrameRecord>,
    pub events: Vec<Event>,
    pub meta: RunMeta,
}

impl RunTrace {
    pub fn failures(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Failure)
            .count()
    }

    pub fn count(&self, kind: FrameKind) -> usize {
        self.frames.iter().filter(|f| f.kind == kind).count()
    }

    pub fn is_complete(&self) -> bool {
        self.meta.status == RunStatus::Complete
    }

    pub fn overlap_trace(&self) -> Result<OverlapTrace, MeasureError> {
        OverlapTrace::new(
            self.frames
                .iter()
                .map(|f| OverlapFrame::new(f.kind, f.overlap))
                .collect(),
        )
    }
}
