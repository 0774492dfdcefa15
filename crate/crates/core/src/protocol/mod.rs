//! Line protocol between the evaluator and external trackers.
//!
//! One message per LF-terminated UTF-8 line: a verb followed by
//! `key="value"` attributes. Values escape `"`, `\` and newline with a
//! backslash.
//!
//! ```text
//! tracker:   hello name="echo" version="1" deterministic="1"
//! evaluator: initialize image="/data/00000.png" region="P 10.0000,10.0000,..."
//! tracker:   status region="P 10.0000,10.0000,..."
//! evaluator: frame image="/data/00001.png"
//! tracker:   status region="R 12.0000,11.0000,50.0000,30.0000"
//! evaluator: quit
//! ```
//!
//! The grammar is modelled on TraX but is not TraX-certified.

pub mod client;
mod golden;
mod message;
mod region;
mod session;
mod transport;

pub use golden::{format_transcript, golden_meta, golden_script, GOLDEN_ECHO_TRANSCRIPT};
pub use message::{
    decode_message, encode_message, DecodeError, DecodeErrorKind, Message, TrackerMeta, MAX_LINE,
};
pub use region::{Region, RegionError};
pub use session::{
    run_session, Direction, Phase, ScriptStep, Session, SessionError, SessionOutcome,
    SessionResult, TranscriptEntry, DEFAULT_TIMEOUT,
};
pub use transport::{
    accept_with_timeout, listen, Incoming, StreamTransport, Transport, TransportError,
};
