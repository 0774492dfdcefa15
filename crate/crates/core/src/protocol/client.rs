//! Tracker side of the protocol, used by the bundled sample trackers and
//! by tests.

use std::io::{BufRead, Write};

use thiserror::Error;

use super::message::{decode_message, encode_message, DecodeError, Message, TrackerMeta};
use super::region::Region;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("malformed message from evaluator: {0}")]
    Decode(#[from] DecodeError),
    #[error("unexpected {0} from evaluator")]
    Unexpected(&'static str),
    #[error("frame before initialize")]
    NotInitialized,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub trait ClientTracker {
    fn initialize(&mut self, image: &str, region: Region) -> Region;
    fn frame(&mut self, image: &str) -> Region;
}

/// Answers every request with the last known region: the initialization
/// region, so it never moves.
#[derive(Debug, Default)]
pub struct StaticClient {
    region: Option<Region>,
}

impl ClientTracker for StaticClient {
    fn initialize(&mut self, _image: &str, region: Region) -> Region {
        self.region = Some(region);
        region
    }

    fn frame(&mut self, _image: &str) -> Region {
        self.region.expect("initialized before frame")
    }
}

/// Sends `hello`, then answers requests until `quit` or end of input.
pub fn serve<R: BufRead, W: Write>(
    mut input: R,
    mut output: W,
    meta: &TrackerMeta,
    tracker: &mut impl ClientTracker,
) -> Result<(), ClientError> {
    output.write_all(encode_message(&Message::Hello(meta.clone())).as_bytes())?;
    output.flush()?;
    let mut initialized = false;
    let mut line = Vec::new();
    loop {
        line.clear();
        if input.read_until(b'\n', &mut line)? == 0 {
            return Ok(());
        }
        let region = match decode_message(&line)? {
            Message::Initialize { image, region } => {
                initialized = true;
                tracker.initialize(&image, region)
            }
            Message::Frame { image } => {
                if !initialized {
                    return Err(ClientError::NotInitialized);
                }
                tracker.frame(&image)
            }
            Message::Quit => return Ok(()),
            m => return Err(ClientError::Unexpected(m.verb())),
        };
        output.write_all(encode_message(&Message::Status { region }).as_bytes())?;
        output.flush()?;
    }
}
