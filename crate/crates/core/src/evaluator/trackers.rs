use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::controllers::NoiseStream;
use crate::geometry::ImagePolygon;
use crate::protocol::{
    accept_with_timeout, Region, Session, SessionError, StreamTransport, TrackerMeta,
    TransportError,
};

/// Replaced by the listening address in TCP tracker arguments.
pub const ADDR_PLACEHOLDER: &str = "{addr}";

/// What a tracker gets to see for one frame.
#[derive(Debug, Clone, Copy)]
pub struct FrameInput<'a> {
    pub index: usize,
    pub image: Option<&'a Path>,
    /// Ground truth, only for the in-process reference trackers.
    pub gt: &'a ImagePolygon<f64>,
}

pub trait Tracker {
    fn meta(&self) -> &TrackerMeta;
    fn needs_images(&self) -> bool;
    fn initialize(&mut self, frame: &FrameInput, region: Region) -> Result<Region, SessionError>;
    fn track(&mut self, frame: &FrameInput) -> Result<Region, SessionError>;
    /// Ends the session; called once after the last frame.
    fn finish(&mut self) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceKind {
    /// Reports the ground truth.
    Echo,
    /// Reports the initialization region until re-initialized.
    Static,
    /// Ground-truth corners plus Gaussian noise of `sigma` pixels.
    NoisyEcho { sigma: f64 },
}

struct Reference {
    kind: ReferenceKind,
    meta: TrackerMeta,
    noise: NoiseStream,
    last: Option<Region>,
}

fn gt_region(gt: &ImagePolygon<f64>) -> Result<Region, SessionError> {
    Region::from_polygon(gt).map_err(|e| SessionError::Violation(e.to_string()))
}

impl Tracker for Reference {
    fn meta(&self) -> &TrackerMeta {
        &self.meta
    }

    fn needs_images(&self) -> bool {
        false
    }

    fn initialize(&mut self, _frame: &FrameInput, region: Region) -> Result<Region, SessionError> {
        self.last = Some(region);
        Ok(region)
    }

    fn track(&mut self, frame: &FrameInput) -> Result<Region, SessionError> {
        let r = match self.kind {
            ReferenceKind::Echo => gt_region(frame.gt)?,
            ReferenceKind::Static => self.last.ok_or(SessionError::State {
                action: "track",
                phase: crate::protocol::Phase::Idle,
            })?,
            ReferenceKind::NoisyEcho { sigma } => {
                let mut pts = *frame.gt.vertices();
                for (k, p) in pts.iter_mut().enumerate() {
                    let (a, b) = self.noise.normal_pair(4 * frame.index as u64 + k as u64);
                    p.u += sigma * a;
                    p.v += sigma * b;
                }
                Region::from_points(&pts).map_err(|e| SessionError::Violation(e.to_string()))?
            }
        };
        self.last = Some(r);
        Ok(r)
    }
}

/// External tracker behind a protocol session.
pub struct SessionTracker {
    session: Session<StreamTransport>,
    meta: TrackerMeta,
}

impl SessionTracker {
    /// Performs the handshake on a fresh transport.
    pub fn connect(transport: StreamTransport, timeout: Duration) -> Result<Self, SessionError> {
        let mut session = Session::new(transport, timeout);
        let meta = session.handshake()?;
        Ok(Self { session, meta })
    }

    pub fn session(&self) -> &Session<StreamTransport> {
        &self.session
    }
}

fn image_path(frame: &FrameInput) -> String {
    frame
        .image
        .map(|p| p.display().to_string())
        .unwrap_or_default()
}

impl Tracker for SessionTracker {
    fn meta(&self) -> &TrackerMeta {
        &self.meta
    }

    fn needs_images(&self) -> bool {
        true
    }

    fn initialize(&mut self, frame: &FrameInput, region: Region) -> Result<Region, SessionError> {
        self.session.initialize(&image_path(frame), region)
    }

    fn track(&mut self, frame: &FrameInput) -> Result<Region, SessionError> {
        self.session.frame(&image_path(frame))
    }

    fn finish(&mut self) {
        self.session.quit();
    }
}

/// How to obtain a tracker for one repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrackerSpec {
    Reference {
        name: String,
        tracker: ReferenceKind,
    },
    /// Child process speaking the protocol on its standard streams.
    Command { name: String, command: Vec<String> },
    /// The evaluator listens on `listen`; the tracker connects. `command`,
    /// when given, is started first and is expected to connect; `{addr}` in
    /// its arguments becomes the bound address, so `listen` may use port 0.
    Tcp {
        name: String,
        listen: String,
        #[serde(default)]
        command: Vec<String>,
    },
}

/// Launch failure, or a tracker that started but never said hello.
#[derive(Debug, thiserror::Error)]
pub enum LaunchError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("handshake failed: {0}")]
    Handshake(#[from] SessionError),
}

impl TrackerSpec {
    pub fn name(&self) -> &str {
        match self {
            TrackerSpec::Reference { name, .. }
            | TrackerSpec::Command { name, .. }
            | TrackerSpec::Tcp { name, .. } => name,
        }
    }

    pub fn reference(kind: ReferenceKind) -> Self {
        let name = match kind {
            ReferenceKind::Echo => "echo".to_string(),
            ReferenceKind::Static => "static".to_string(),
            ReferenceKind::NoisyEcho { sigma } => format!("noisy_echo_{sigma}"),
        };
        TrackerSpec::Reference {
            name,
            tracker: kind,
        }
    }

    /// The executable a launch would start, if any.
    pub fn program(&self) -> Option<PathBuf> {
        match self {
            TrackerSpec::Command { command, .. } | TrackerSpec::Tcp { command, .. } => {
                command.first().map(PathBuf::from)
            }
            TrackerSpec::Reference { .. } => None,
        }
    }

    /// Starts a tracker for one repetition. External trackers write their
    /// standard error to `stderr_log`.
    pub fn launch(
        &self,
        seed: u64,
        stderr_log: Option<&Path>,
        timeout: Duration,
    ) -> Result<Box<dyn Tracker>, LaunchError> {
        match self {
            TrackerSpec::Reference { name, tracker } => Ok(Box::new(Reference {
                kind: *tracker,
                meta: TrackerMeta {
                    name: name.clone(),
                    version: env!("CARGO_PKG_VERSION").to_string(),
                    deterministic: !matches!(tracker, ReferenceKind::NoisyEcho { sigma } if *sigma > 0.0),
                },
                noise: NoiseStream::new(seed),
                last: None,
            })),
            TrackerSpec::Command { command, .. } => {
                let (prog, args) = split(command)?;
                let t = StreamTransport::spawn(Path::new(prog), args, stderr_log)?;
                Ok(Box::new(SessionTracker::connect(t, timeout)?))
            }
            TrackerSpec::Tcp {
                listen, command, ..
            } => {
                let listener = TcpListener::bind(listen.as_str()).map_err(TransportError::from)?;
                let mut child = None;
                if !command.is_empty() {
                    let (prog, args) = split(command)?;
                    let addr = listener
                        .local_addr()
                        .map_err(TransportError::from)?
                        .to_string();
                    let args: Vec<String> = args
                        .iter()
                        .map(|a| a.replace(ADDR_PLACEHOLDER, &addr))
                        .collect();
                    child = Some(StreamTransport::spawn(Path::new(prog), &args, stderr_log)?);
                }
                let stream = accept_with_timeout(&listener, timeout)?;
                let tracker = SessionTracker::connect(StreamTransport::tcp(stream)?, timeout)?;
                // the child's own pipes are unused; keep it alive with the session
                Ok(Box::new(WithChild {
                    tracker,
                    _child: child,
                }))
            }
        }
    }
}

fn split(command: &[String]) -> Result<(&String, &[String]), TransportError> {
    command.split_first().ok_or_else(|| {
        TransportError::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            "empty tracker command",
        ))
    })
}

struct WithChild {
    tracker: SessionTracker,
    _child: Option<StreamTransport>,
}

impl Tracker for WithChild {
    fn meta(&self) -> &TrackerMeta {
        self.tracker.meta()
    }

    fn needs_images(&self) -> bool {
        true
    }

    fn initialize(&mut self, frame: &FrameInput, region: Region) -> Result<Region, SessionError> {
        self.tracker.initialize(frame, region)
    }

    fn track(&mut self, frame: &FrameInput) -> Result<Region, SessionError> {
        self.tracker.track(frame)
    }

    fn finish(&mut self) {
        self.tracker.finish();
    }
}
