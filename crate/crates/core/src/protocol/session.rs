use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use super::message::{
    decode_message, encode_message, DecodeError, DecodeErrorKind, Message, TrackerMeta, MAX_LINE,
};
use super::region::Region;
use super::transport::{Incoming, Transport, TransportError};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    AwaitHello,
    Idle,
    AwaitStatus,
    Closed,
}

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("no response within {0:?}")]
    Timeout(Duration),
    #[error("tracker closed the connection")]
    Closed,
    #[error("protocol violation: {0}")]
    Violation(String),
    #[error("malformed message: {0}")]
    Decode(#[from] DecodeError),
    #[error("cannot {action} in phase {phase:?}")]
    State { action: &'static str, phase: Phase },
    #[error(transparent)]
    Transport(#[from] TransportError),
}

impl SessionError {
    /// Timeouts and dead peers, as opposed to protocol misbehaviour.
    pub fn is_crash(&self) -> bool {
        matches!(self, SessionError::Closed | SessionError::Transport(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Sent,
    Received,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranscriptEntry {
    pub direction: Direction,
    pub line: String,
}

/// Evaluator side of one tracker connection.
///
/// After `hello` exactly one request is outstanding at a time. Any error
/// closes the session; `quit` is sent on a best-effort basis.
pub struct Session<T: Transport> {
    transport: T,
    phase: Phase,
    meta: Option<TrackerMeta>,
    timeout: Duration,
    transcript: Vec<TranscriptEntry>,
}

impl<T: Transport> Session<T> {
    pub fn new(transport: T, timeout: Duration) -> Self {
        Self {
            transport,
            phase: Phase::AwaitHello,
            meta: None,
            timeout,
            transcript: Vec::new(),
        }
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn meta(&self) -> Option<&TrackerMeta> {
        self.meta.as_ref()
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    pub fn transport_mut(&mut self) -> &mut T {
        &mut self.transport
    }

    /// Waits for the tracker's `hello`.
    pub fn handshake(&mut self) -> Result<TrackerMeta, SessionError> {
        self.expect_phase("handshake", Phase::AwaitHello)?;
        match self.receive()? {
            Message::Hello(meta) => {
                self.meta = Some(meta.clone());
                self.phase = Phase::Idle;
                Ok(meta)
            }
            other => Err(self.violation(format!("expected hello, got {}", other.verb()))),
        }
    }

    pub fn initialize(&mut self, image: &str, region: Region) -> Result<Region, SessionError> {
        self.request(
            "initialize",
            Message::Initialize {
                image: image.to_string(),
                region,
            },
        )
    }

    pub fn frame(&mut self, image: &str) -> Result<Region, SessionError> {
        self.request(
            "frame",
            Message::Frame {
                image: image.to_string(),
            },
        )
    }

    /// Sends `quit` if the peer may still be listening and closes the
    /// transport.
    pub fn quit(&mut self) {
        if self.phase != Phase::Closed {
            let _ = self.send(&Message::Quit);
            self.phase = Phase::Closed;
        }
        self.transport.close();
    }

    fn expect_phase(&self, action: &'static str, want: Phase) -> Result<(), SessionError> {
        if self.phase != want {
            return Err(SessionError::State {
                action,
                phase: self.phase,
            });
        }
        Ok(())
    }

    fn request(&mut self, action: &'static str, m: Message) -> Result<Region, SessionError> {
        self.expect_phase(action, Phase::Idle)?;
        if let Err(e) = self.send(&m) {
            self.abort();
            return Err(e);
        }
        self.phase = Phase::AwaitStatus;
        match self.receive()? {
            Message::Status { region } => {
                self.phase = Phase::Idle;
                Ok(region)
            }
            other => Err(self.violation(format!("expected status, got {}", other.verb()))),
        }
    }

    fn send(&mut self, m: &Message) -> Result<(), SessionError> {
        let line = encode_message(m);
        self.transcript.push(TranscriptEntry {
            direction: Direction::Sent,
            line: line.trim_end_matches('\n').to_string(),
        });
        self.transport.send_line(&line).map_err(|e| match e {
            TransportError::Write(_) => SessionError::Closed,
            e => e.into(),
        })
    }

    fn receive(&mut self) -> Result<Message, SessionError> {
        let line = match self.transport.recv_line(self.timeout) {
            Incoming::Line(l) => l,
            Incoming::Oversize(n) => {
                self.abort();
                return Err(DecodeError {
                    offset: MAX_LINE,
                    kind: DecodeErrorKind::Oversize(n),
                }
                .into());
            }
            Incoming::Timeout => {
                self.abort();
                return Err(SessionError::Timeout(self.timeout));
            }
            Incoming::Closed => {
                self.phase = Phase::Closed;
                self.transport.close();
                return Err(SessionError::Closed);
            }
        };
        self.transcript.push(TranscriptEntry {
            direction: Direction::Received,
            line: String::from_utf8_lossy(&line).into_owned(),
        });
        match decode_message(&line) {
            Ok(Message::Quit) => {
                self.phase = Phase::Closed;
                self.transport.close();
                Err(SessionError::Closed)
            }
            Ok(m) => Ok(m),
            Err(e) => {
                self.abort();
                Err(e.into())
            }
        }
    }

    fn violation(&mut self, msg: String) -> SessionError {
        self.abort();
        SessionError::Violation(msg)
    }

    fn abort(&mut self) {
        self.quit();
    }
}

impl<T: Transport> Drop for Session<T> {
    fn drop(&mut self) {
        self.quit();
    }
}

/// One evaluator request in a scripted session.
#[derive(Debug, Clone, PartialEq)]
pub enum ScriptStep {
    Initialize { image: String, region: Region },
    Frame { image: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SessionOutcome {
    Completed,
    Timeout {
        step: usize,
    },
    Crash {
        step: usize,
    },
    Violation {
        step: Option<usize>,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionResult {
    pub meta: Option<TrackerMeta>,
    #[serde(skip)]
    pub statuses: Vec<Region>,
    pub outcome: SessionOutcome,
    pub transcript: Vec<TranscriptEntry>,
}

/// Runs the handshake and then `steps` in order, stopping at the first
/// failure. `quit` is always attempted at the end.
pub fn run_session<T: Transport>(
    transport: T,
    timeout: Duration,
    steps: &[ScriptStep],
) -> SessionResult {
    let mut s = Session::new(transport, timeout);
    let mut statuses = Vec::new();
    let classify = |e: SessionError, step: Option<usize>| match e {
        SessionError::Timeout(_) => SessionOutcome::Timeout {
            step: step.unwrap_or(0),
        },
        e if e.is_crash() => SessionOutcome::Crash {
            step: step.unwrap_or(0),
        },
        e => SessionOutcome::Violation {
            step,
            message: e.to_string(),
        },
    };
    let outcome = match s.handshake() {
        Err(e) => classify(e, None),
        Ok(_) => {
            let mut outcome = SessionOutcome::Completed;
            for (i, step) in steps.iter().enumerate() {
                let r = match step {
                    ScriptStep::Initialize { image, region } => s.initialize(image, *region),
                    ScriptStep::Frame { image } => s.frame(image),
                };
                match r {
                    Ok(region) => statuses.push(region),
                    Err(e) => {
                        outcome = classify(e, Some(i));
                        break;
                    }
                }
            }
            outcome
        }
    };
    s.quit();
    SessionResult {
        meta: s.meta.clone(),
        statuses,
        outcome,
        transcript: s.transcript.clone(),
    }
}
