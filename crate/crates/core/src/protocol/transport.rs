use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, ExitStatus, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use thiserror::Error;

use super::message::MAX_LINE;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("failed to launch {program:?}: {source}")]
    Launch {
        program: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("no tracker connected to {addr} within {waited:?}")]
    AcceptTimeout { addr: SocketAddr, waited: Duration },
    #[error("write failed: {0}")]
    Write(#[source] io::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// What the peer sent next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Incoming {
    /// One line without its terminator.
    Line(Vec<u8>),
    /// A line longer than the protocol limit; its content is discarded.
    Oversize(usize),
    Timeout,
    /// End of stream or read error.
    Closed,
}

/// A bidirectional line stream.
pub trait Transport: Send {
    fn send_line(&mut self, line: &str) -> Result<(), TransportError>;
    fn recv_line(&mut self, timeout: Duration) -> Incoming;
    /// Releases the underlying resources. Idempotent.
    fn close(&mut self);
}

enum Chunk {
    Line(Vec<u8>),
    Oversize(usize),
}

// Reads LF-terminated lines, capping memory at MAX_LINE + 2 per line.
fn read_capped(r: &mut impl BufRead) -> io::Result<Option<Chunk>> {
    let mut buf = Vec::new();
    let mut total = 0usize;
    let mut over = false;
    loop {
        let avail = r.fill_buf()?;
        if avail.is_empty() {
            if total == 0 {
                return Ok(None);
            }
            break;
        }
        let (take, done) = match avail.iter().position(|&b| b == b'\n') {
            Some(i) => (i + 1, true),
            None => (avail.len(), false),
        };
        total += take;
        if !over {
            if buf.len() + take > MAX_LINE + 2 {
                over = true;
                buf.clear();
            } else {
                buf.extend_from_slice(&avail[..take]);
            }
        }
        r.consume(take);
        if done {
            break;
        }
    }
    if buf.last() == Some(&b'\n') {
        buf.pop();
    }
    if over || buf.len() > MAX_LINE + 1 {
        return Ok(Some(Chunk::Oversize(total)));
    }
    Ok(Some(Chunk::Line(buf)))
}

fn spawn_reader(input: impl Read + Send + 'static) -> (Receiver<Chunk>, JoinHandle<()>) {
    let (tx, rx) = mpsc::channel();
    let handle = thread::spawn(move || {
        let mut r = BufReader::new(input);
        while let Ok(Some(chunk)) = read_capped(&mut r) {
            if tx.send(chunk).is_err() {
                break;
            }
        }
    });
    (rx, handle)
}

/// Line transport over any reader/writer pair. A background thread reads
/// lines so that receives can time out.
pub struct StreamTransport {
    writer: Option<Box<dyn Write + Send>>,
    rx: Receiver<Chunk>,
    reader: Option<JoinHandle<()>>,
    child: Option<Child>,
    shutdown: Option<Box<dyn FnMut() + Send>>,
}

impl StreamTransport {
    pub fn new(reader: impl Read + Send + 'static, writer: impl Write + Send + 'static) -> Self {
        let (rx, handle) = spawn_reader(reader);
        Self {
            writer: Some(Box::new(writer)),
            rx,
            reader: Some(handle),
            child: None,
            shutdown: None,
        }
    }

    /// Launches `program` and talks to it over its standard streams. The
    /// child's standard error goes to `stderr_log` when given.
    pub fn spawn(
        program: &Path,
        args: &[String],
        stderr_log: Option<&Path>,
    ) -> Result<Self, TransportError> {
        let stderr = match stderr_log {
            Some(p) => Stdio::from(File::create(p)?),
            None => Stdio::null(),
        };
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(stderr)
            .spawn()
            .map_err(|source| TransportError::Launch {
                program: program.to_path_buf(),
                source,
            })?;
        let stdin = child.stdin.take().expect("piped");
        let stdout = child.stdout.take().expect("piped");
        let mut t = Self::new(stdout, stdin);
        t.child = Some(child);
        Ok(t)
    }

    /// Transport over an accepted TCP connection.
    pub fn tcp(stream: TcpStream) -> Result<Self, TransportError> {
        stream.set_nodelay(true)?;
        let reader = stream.try_clone()?;
        let closer = stream.try_clone()?;
        let mut t = Self::new(reader, stream);
        t.shutdown = Some(Box::new(move || {
            let _ = closer.shutdown(std::net::Shutdown::Both);
        }));
        Ok(t)
    }

    /// Waits for the child to exit for up to `grace`, then kills it.
    pub fn reap(&mut self, grace: Duration) -> Option<ExitStatus> {
        let child = self.child.as_mut()?;
        let deadline = Instant::now() + grace;
        loop {
            match child.try_wait() {
                Ok(Some(s)) => return Some(s),
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(5)),
                _ => {
                    let _ = child.kill();
                    return child.wait().ok();
                }
            }
        }
    }
}

impl Transport for StreamTransport {
    fn send_line(&mut self, line: &str) -> Result<(), TransportError> {
        let w = self
            .writer
            .as_mut()
            .ok_or_else(|| TransportError::Write(io::ErrorKind::BrokenPipe.into()))?;
        w.write_all(line.as_bytes())
            .and_then(|_| w.flush())
            .map_err(TransportError::Write)
    }

    fn recv_line(&mut self, timeout: Duration) -> Incoming {
        match self.rx.recv_timeout(timeout) {
            Ok(Chunk::Line(l)) => Incoming::Line(l),
            Ok(Chunk::Oversize(n)) => Incoming::Oversize(n),
            Err(RecvTimeoutError::Timeout) => Incoming::Timeout,
            Err(RecvTimeoutError::Disconnected) => Incoming::Closed,
        }
    }

    fn close(&mut self) {
        // dropping stdin signals EOF to a child
        self.writer = None;
        if let Some(f) = self.shutdown.as_mut() {
            f();
        }
        if self.child.is_some() {
            self.reap(Duration::from_millis(500));
        }
        if let Some(h) = self.reader.take() {
            // a stalled child that was just killed closes its stdout, so
            // this join returns; a stream we cannot unblock is detached
            if self.child.is_some() || self.shutdown.is_some() {
                let _ = h.join();
            }
        }
    }
}

impl Drop for StreamTransport {
    fn drop(&mut self) {
        self.close();
    }
}

/// Accepts one connection on `listener` within `timeout`.
pub fn accept_with_timeout(
    listener: &TcpListener,
    timeout: Duration,
) -> Result<TcpStream, TransportError> {
    listener.set_nonblocking(true)?;
    let deadline = Instant::now() + timeout;
    let res = loop {
        match listener.accept() {
            Ok((s, _)) => break Ok(s),
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => {
                if Instant::now() >= deadline {
                    break Err(TransportError::AcceptTimeout {
                        addr: listener.local_addr()?,
                        waited: timeout,
                    });
                }
                thread::sleep(Duration::from_millis(5));
            }
            Err(e) => break Err(e.into()),
        }
    };
    listener.set_nonblocking(false)?;
    let s = res?;
    s.set_nonblocking(false)?;
    Ok(s)
}

/// Binds a listener for trackers connecting over TCP.
pub fn listen(addr: impl ToSocketAddrs) -> Result<TcpListener, TransportError> {
    Ok(TcpListener::bind(addr)?)
}
