use std::path::{Path, PathBuf};
use std::time::Instant;

use super::trackers::{FrameInput, LaunchError, Tracker, TrackerSpec};
use super::{EvalError, Event, EventKind, FrameRecord, RunConfig, RunMeta, RunStatus, RunTrace};
use crate::controllers::derive_seed;
use crate::measures::{quad_overlap, FrameKind};
use crate::protocol::{Region, SessionError};
use crate::renderer::SequenceGenerator;

/// Overlap at or below the threshold is a failure.
pub fn detect_failure(overlap: f64, cfg: &RunConfig) -> bool {
    overlap <= cfg.failure_overlap
}

/// Directory of rendered frames handed to external trackers by path.
///
/// Frames are rendered on first request and written atomically, so
/// several repetitions (or processes) may share one directory.
#[derive(Debug, Clone)]
pub struct FrameStore {
    dir: PathBuf,
}

impl FrameStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, t: usize) -> PathBuf {
        self.dir.join(format!("{t:05}.png"))
    }

    pub fn ensure(&self, seq: &SequenceGenerator, t: usize) -> Result<PathBuf, EvalError> {
        let path = self.path(t);
        if path.exists() {
            return Ok(path);
        }
        let io = |source| EvalError::Io {
            path: path.clone(),
            source,
        };
        std::fs::create_dir_all(&self.dir).map_err(io)?;
        let img = seq.frame(t, true)?.image.expect("rendered");
        let tmp = self
            .dir
            .join(format!(".{t:05}.{}.tmp.png", std::process::id()));
        img.save(&tmp).map_err(|e| EvalError::Format {
            path: tmp.clone(),
            message: e.to_string(),
        })?;
        std::fs::rename(&tmp, &path).map_err(io)?;
        Ok(path)
    }
}

/// Tracker seed for one repetition, derived from the run seed and the
/// (tracker, pattern, sequence, repetition) labels.
pub fn repetition_seed(cfg: &RunConfig, tracker: &str, seq: &SequenceGenerator, rep: usize) -> u64 {
    derive_seed(
        cfg.seed,
        &[
            tracker,
            seq.pattern().name(),
            seq.source().id(),
            &format!("rep{rep}"),
        ],
    )
}

/// Runs one repetition of `tracker` over `seq`.
///
/// Infrastructure errors end the trace early with a crash or timeout event
/// and mark the run as an infrastructure failure.
pub fn run_repetition(
    tracker: &mut dyn Tracker,
    seq: &SequenceGenerator,
    cfg: &RunConfig,
    repetition: usize,
    seed: u64,
    frames: Option<&FrameStore>,
) -> Result<RunTrace, EvalError> {
    cfg.validate()?;
    if tracker.needs_images() && frames.is_none() {
        return Err(EvalError::NoFrameStore);
    }
    let started = Instant::now();
    let len = seq.len();
    let mut records = Vec::with_capacity(len);
    let mut events = Vec::new();
    let mut status = RunStatus::Complete;
    let mut next_init = Some(0usize);
    let mut t = 0;
    while t < len {
        let vf = seq.frame(t, false)?;
        if next_init.is_some_and(|i| t < i) {
            records.push(FrameRecord {
                index: t,
                gt: vf.gt,
                region: None,
                overlap: None,
                kind: FrameKind::Skipped,
                degenerate: false,
            });
            t += 1;
            continue;
        }
        let image = match (tracker.needs_images(), frames) {
            (true, Some(store)) => Some(store.ensure(seq, t)?),
            _ => None,
        };
        let input = FrameInput {
            index: t,
            image: image.as_deref(),
            gt: &vf.gt,
        };
        let initializing = next_init.is_some();
        // ground truth at wire precision, so a tracker echoing it scores exactly 1
        let gt = Region::from_polygon(&vf.gt).map_err(|e| EvalError::Config(e.to_string()))?;
        let reply = if initializing {
            tracker.initialize(&input, gt)
        } else {
            tracker.track(&input)
        };
        let region = match reply {
            Ok(r) => r,
            Err(e) => {
                events.push(Event {
                    frame: t,
                    kind: if matches!(e, SessionError::Timeout(_)) {
                        EventKind::Timeout
                    } else {
                        EventKind::Crash
                    },
                    detail: Some(e.to_string()),
                });
                status = RunStatus::InfrastructureFailure;
                break;
            }
        };
        let ov = quad_overlap(&region.points(), &gt.points());
        let kind = if initializing {
            events.push(Event {
                frame: t,
                kind: if t == 0 {
                    EventKind::Init
                } else {
                    EventKind::Reinit
                },
                detail: None,
            });
            next_init = None;
            FrameKind::Init
        } else if detect_failure(ov.value, cfg) {
            events.push(Event {
                frame: t,
                kind: EventKind::Failure,
                detail: None,
            });
            next_init = Some(t + 1 + cfg.reinit_skip);
            FrameKind::Failure
        } else {
            FrameKind::Tracked
        };
        records.push(FrameRecord {
            index: t,
            gt: vf.gt,
            region: Some(region),
            overlap: Some(ov.value),
            kind,
            degenerate: ov.degenerate,
        });
        t += 1;
    }
    tracker.finish();
    let meta = tracker.meta();
    Ok(RunTrace {
        frames: records,
        events,
        meta: RunMeta {
            tracker: meta.name.clone(),
            tracker_version: Some(meta.version.clone()),
            deterministic: meta.deterministic,
            pattern: seq.pattern().name().to_string(),
            sequence: seq.source().id().to_string(),
            repetition,
            seed,
            controller_seed: seq.controller_seed(),
            length: len,
            status,
            wall_time: started.elapsed().as_secs_f64(),
        },
    })
}

/// Runs all repetitions of `spec` over `seq`: `cfg.repetitions` of them,
/// or one when the tracker declares itself deterministic. Each repetition
/// gets a fresh tracker and its own derived seed.
pub fn run_supervised(
    spec: &TrackerSpec,
    seq: &SequenceGenerator,
    cfg: &RunConfig,
    frames: Option<&FrameStore>,
) -> Result<Vec<RunTrace>, EvalError> {
    cfg.validate()?;
    let mut traces = Vec::new();
    let mut reps = cfg.repetitions;
    let mut k = 0;
    while k < reps {
        let seed = repetition_seed(cfg, spec.name(), seq, k);
        let mut tracker = match spec.launch(seed, None, cfg.timeout()) {
            Ok(t) => t,
            Err(LaunchError::Transport(e)) => return Err(e.into()),
            Err(LaunchError::Handshake(e)) => {
                traces.push(handshake_failure(spec.name(), seq, k, seed, e));
                k += 1;
                continue;
            }
        };
        if tracker.meta().deterministic {
            reps = 1;
        }
        traces.push(run_repetition(tracker.as_mut(), seq, cfg, k, seed, frames)?);
        k += 1;
    }
    Ok(traces)
}

/// Trace for a tracker that never completed the handshake.
pub fn handshake_failure(
    name: &str,
    seq: &SequenceGenerator,
    rep: usize,
    seed: u64,
    e: SessionError,
) -> RunTrace {
    RunTrace {
        frames: Vec::new(),
        events: vec![Event {
            frame: 0,
            kind: if matches!(e, SessionError::Timeout(_)) {
                EventKind::Timeout
            } else {
                EventKind::Crash
            },
            detail: Some(format!("handshake: {e}")),
        }],
        meta: RunMeta {
            tracker: name.to_string(),
            tracker_version: None,
            deterministic: false,
            pattern: seq.pattern().name().to_string(),
            sequence: seq.source().id().to_string(),
            repetition: rep,
            seed,
            controller_seed: seq.controller_seed(),
            length: seq.len(),
            status: RunStatus::InfrastructureFailure,
            wall_time: 0.0,
        },
    }
}
