//! Protocol-speaking sample trackers for fault injection and self-tests.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::time::Duration;

use anyhow::{bail, Context, Result};

use omnitrack::protocol::client::{serve, ClientTracker, StaticClient};
use omnitrack::protocol::{encode_message, Message, Region, TrackerMeta};

/// Behaviour of a sample tracker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    /// Reports the initialization region.
    Static,
    /// Like static, sleeping this many milliseconds per request.
    Slow(u64),
    /// Answers this many requests, then stops responding.
    Stall(usize),
    /// Answers this many requests, then exits with status 3.
    Crash(usize),
    /// Sends a malformed line after `hello`.
    Garbage,
    /// Exits before saying hello.
    Mute,
}

impl std::str::FromStr for SampleKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = s.split_once(':').unwrap_or((s, ""));
        let num = || {
            arg.parse::<u64>()
                .with_context(|| format!("{s:?} needs a number after ':'"))
        };
        Ok(match head {
            "static" => SampleKind::Static,
            "slow" => SampleKind::Slow(num()?),
            "stall" => SampleKind::Stall(num()? as usize),
            "crash" => SampleKind::Crash(num()? as usize),
            "garbage" => SampleKind::Garbage,
            "mute" => SampleKind::Mute,
            _ => bail!("unknown sample tracker {s:?}"),
        })
    }
}

struct Sample {
    kind: SampleKind,
    inner: StaticClient,
    answered: usize,
}

impl Sample {
    fn before_reply(&mut self) {
        match self.kind {
            SampleKind::Slow(ms) => std::thread::sleep(Duration::from_millis(ms)),
            SampleKind::Stall(n) if self.answered >= n => loop {
                std::thread::sleep(Duration::from_secs(3600));
            },
            SampleKind::Crash(n) if self.answered >= n => {
                eprintln!("sample tracker exiting after {n} requests");
                std::process::exit(3);
            }
            _ => {}
        }
        self.answered += 1;
    }
}

impl ClientTracker for Sample {
    fn initialize(&mut self, image: &str, region: Region) -> Region {
        self.before_reply();
        self.inner.initialize(image, region)
    }

    fn frame(&mut self, image: &str) -> Region {
        self.before_reply();
        self.inner.frame(image)
    }
}

fn run<R: BufRead, W: Write>(kind: SampleKind, input: R, mut output: W, name: &str) -> Result<()> {
    let meta = TrackerMeta {
        name: name.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        deterministic: true,
    };
    match kind {
        SampleKind::Mute => bail!("exiting without hello"),
        SampleKind::Garbage => {
            output.write_all(encode_message(&Message::Hello(meta)).as_bytes())?;
            output.write_all(b"status region=\"R 1,2\"\n")?;
            output.flush()?;
            Ok(())
        }
        _ => {
            let mut t = Sample {
                kind,
                inner: StaticClient::default(),
                answered: 0,
            };
            serve(input, output, &meta, &mut t)?;
            Ok(())
        }
    }
}

/// Serves on standard streams, or connects to `connect` when given.
pub fn cmd_sample_tracker(kind: SampleKind, connect: Option<&str>, name: &str) -> Result<()> {
    match connect {
        Some(addr) => {
            let s = TcpStream::connect(addr).with_context(|| format!("connecting to {addr}"))?;
            let r = BufReader::new(s.try_clone()?);
            run(kind, r, s, name)
        }
        None => run(
            kind,
            std::io::stdin().lock(),
            std::io::stdout().lock(),
            name,
        ),
    }
}
