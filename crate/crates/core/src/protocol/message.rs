use std::fmt;

use super::region::Region;

/// Longest accepted line, excluding the terminator.
pub const MAX_LINE: usize = 64 * 1024;

/// Tracker metadata announced in `hello`.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TrackerMeta {
    pub name: String,
    pub version: String,
    pub deterministic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Hello(TrackerMeta),
    Initialize { image: String, region: Region },
    Frame { image: String },
    Status { region: Region },
    Quit,
}

impl Message {
    pub fn verb(&self) -> &'static str {
        match self {
            Message::Hello(_) => "hello",
            Message::Initialize { .. } => "initialize",
            Message::Frame { .. } => "frame",
            Message::Status { .. } => "status",
            Message::Quit => "quit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeErrorKind {
    Oversize(usize),
    Empty,
    InvalidUtf8,
    UnknownVerb(String),
    ExpectedSpace,
    BadKey,
    ExpectedEquals,
    ExpectedQuote,
    UnterminatedQuote,
    BadEscape(char),
    DuplicateKey(String),
    UnexpectedKey {
        verb: &'static str,
        key: String,
    },
    MissingKey {
        verb: &'static str,
        key: &'static str,
    },
    BadRegion(String),
    BadFlag(String),
}

/// Decode failure at a byte offset into the line.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("at byte {offset}: {kind}")]
pub struct DecodeError {
    pub offset: usize,
    pub kind: DecodeErrorKind,
}

impl fmt::Display for DecodeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use DecodeErrorKind::*;
        match self {
            Oversize(n) => write!(f, "line of {n} bytes exceeds {MAX_LINE}"),
            Empty => f.write_str("empty line"),
            InvalidUtf8 => f.write_str("invalid UTF-8"),
            UnknownVerb(v) => write!(f, "unknown verb {v:?}"),
            ExpectedSpace => f.write_str("expected a space"),
            BadKey => f.write_str("keys are lowercase ASCII identifiers"),
            ExpectedEquals => f.write_str("expected '='"),
            ExpectedQuote => f.write_str("expected '\"'"),
            UnterminatedQuote => f.write_str("unterminated quoted value"),
            BadEscape(c) => write!(f, "unknown escape \\{c}"),
            DuplicateKey(k) => write!(f, "duplicate key {k:?}"),
            UnexpectedKey { verb, key } => write!(f, "{verb} does not take key {key:?}"),
            MissingKey { verb, key } => write!(f, "{verb} requires key {key:?}"),
            BadRegion(m) => write!(f, "{m}"),
            BadFlag(v) => write!(f, "deterministic must be \"0\" or \"1\", got {v:?}"),
        }
    }
}

fn required_keys(verb: &str) -> Option<(&'static str, &'static [&'static str])> {
    Some(match verb {
        "hello" => ("hello", &["name", "version", "deterministic"]),
        "initialize" => ("initialize", &["image", "region"]),
        "frame" => ("frame", &["image"]),
        "status" => ("status", &["region"]),
        "quit" => ("quit", &[]),
        _ => return None,
    })
}

fn escape(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
}

/// Serializes `m` as one LF-terminated line.
pub fn encode_message(m: &Message) -> String {
    let mut out = String::from(m.verb());
    let mut attr = |k: &str, v: &str| {
        out.push(' ');
        out.push_str(k);
        out.push_str("=\"");
        escape(v, &mut out);
        out.push('"');
    };
    match m {
        Message::Hello(meta) => {
            attr("name", &meta.name);
            attr("version", &meta.version);
            attr("deterministic", if meta.deterministic { "1" } else { "0" });
        }
        Message::Initialize { image, region } => {
            attr("image", image);
            attr("region", &region.to_string());
        }
        Message::Frame { image } => attr("image", image),
        Message::Status { region } => attr("region", &region.to_string()),
        Message::Quit => {}
    }
    out.push('\n');
    out
}

struct Cursor<'a> {
    b: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn err(&self, kind: DecodeErrorKind) -> DecodeError {
        DecodeError {
            offset: self.pos,
            kind,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.b.get(self.pos).copied()
    }

    fn ident(&mut self) -> &str {
        let start = self.pos;
        while matches!(self.peek(), Some(b'a'..=b'z' | b'0'..=b'9' | b'_')) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.b[start..self.pos]).expect("ASCII")
    }

    fn quoted(&mut self) -> Result<String, DecodeError> {
        if self.peek() != Some(b'"') {
            return Err(self.err(DecodeErrorKind::ExpectedQuote));
        }
        let open = self.pos;
        self.pos += 1;
        let mut out = Vec::new();
        loop {
            match self.peek() {
                None => {
                    return Err(DecodeError {
                        offset: open,
                        kind: DecodeErrorKind::UnterminatedQuote,
                    })
                }
                Some(b'"') => {
                    self.pos += 1;
                    break;
                }
                Some(b'\\') => {
                    let c = self.b.get(self.pos + 1).copied();
                    out.push(match c {
                        Some(b'"') => b'"',
                        Some(b'\\') => b'\\',
                        Some(b'n') => b'\n',
                        None => {
                            return Err(DecodeError {
                                offset: open,
                                kind: DecodeErrorKind::UnterminatedQuote,
                            })
                        }
                        Some(c) => return Err(self.err(DecodeErrorKind::BadEscape(c as char))),
                    });
                    self.pos += 2;
                }
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
        String::from_utf8(out).map_err(|_| DecodeError {
            offset: open,
            kind: DecodeErrorKind::InvalidUtf8,
        })
    }
}

/// Parses one line. A trailing LF and then a trailing CR are stripped.
pub fn decode_message(line: &[u8]) -> Result<Message, DecodeError> {
    let mut b = line.strip_suffix(b"\n").unwrap_or(line);
    b = b.strip_suffix(b"\r").unwrap_or(b);
    if b.len() > MAX_LINE {
        return Err(DecodeError {
            offset: MAX_LINE,
            kind: DecodeErrorKind::Oversize(b.len()),
        });
    }
    let mut c = Cursor { b, pos: 0 };
    if b.is_empty() {
        return Err(c.err(DecodeErrorKind::Empty));
    }
    let verb_text = {
        let start = c.pos;
        while matches!(c.peek(), Some(ch) if ch != b' ') {
            c.pos += 1;
        }
        String::from_utf8_lossy(&b[start..c.pos]).into_owned()
    };
    let Some((verb, keys)) = required_keys(&verb_text) else {
        return Err(DecodeError {
            offset: 0,
            kind: DecodeErrorKind::UnknownVerb(verb_text),
        });
    };
    let mut values: Vec<Option<(usize, String)>> = vec![None; keys.len()];
    while c.pos < b.len() {
        if c.peek() != Some(b' ') {
            return Err(c.err(DecodeErrorKind::ExpectedSpace));
        }
        c.pos += 1;
        let key_at = c.pos;
        if !matches!(c.peek(), Some(b'a'..=b'z' | b'_')) {
            return Err(c.err(DecodeErrorKind::BadKey));
        }
        let key = c.ident().to_string();
        if c.peek() != Some(b'=') {
            return Err(c.err(
                if matches!(c.peek(), Some(ch) if ch.is_ascii_alphanumeric()) {
                    DecodeErrorKind::BadKey
                } else {
                    DecodeErrorKind::ExpectedEquals
                },
            ));
        }
        c.pos += 1;
        let value_at = c.pos;
        let value = c.quoted()?;
        let Some(slot) = keys.iter().position(|k| *k == key) else {
            return Err(DecodeError {
                offset: key_at,
                kind: DecodeErrorKind::UnexpectedKey { verb, key },
            });
        };
        if values[slot].is_some() {
            return Err(DecodeError {
                offset: key_at,
                kind: DecodeErrorKind::DuplicateKey(key),
            });
        }
        values[slot] = Some((value_at, value));
    }
    let mut take = |i: usize| {
        values[i].take().ok_or(DecodeError {
            offset: b.len(),
            kind: DecodeErrorKind::MissingKey { verb, key: keys[i] },
        })
    };
    let region = |(at, v): (usize, String)| {
        v.parse::<Region>().map_err(|e| DecodeError {
            offset: at,
            kind: DecodeErrorKind::BadRegion(e.0),
        })
    };
    Ok(match verb {
        "hello" => {
            let name = take(0)?.1;
            let version = take(1)?.1;
            let (at, flag) = take(2)?;
            let deterministic = match flag.as_str() {
                "1" => true,
                "0" => false,
                _ => {
                    return Err(DecodeError {
                        offset: at,
                        kind: DecodeErrorKind::BadFlag(flag),
                    })
                }
            };
            Message::Hello(TrackerMeta {
                name,
                version,
                deterministic,
            })
        }
        "initialize" => {
            let image = take(0)?.1;
            Message::Initialize {
                image,
                region: region(take(1)?)?,
            }
        }
        "frame" => Message::Frame { image: take(0)?.1 },
        "status" => Message::Status {
            region: region(take(0)?)?,
        },
        _ => Message::Quit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_polygon() {
        let m = decode_message(br#"status region="P 10,10,60,10,60,40,10,40""#).unwrap();
        assert_eq!(
            m,
            Message::Status {
                region: Region::poly([10.0, 10.0, 60.0, 10.0, 60.0, 40.0, 10.0, 40.0]).unwrap()
            }
        );
    }

    #[test]
    fn hello_meta() {
        let m =
            decode_message(b"hello name=\"echo\" version=\"1\" deterministic=\"1\"\r\n").unwrap();
        assert_eq!(
            m,
            Message::Hello(TrackerMeta {
                name: "echo".into(),
                version: "1".into(),
                deterministic: true
            })
        );
    }

    #[test]
    fn frame_with_region_rejected() {
        let e = decode_message(br#"frame region="R 1,1,2,2""#).unwrap_err();
        assert!(matches!(
            e.kind,
            DecodeErrorKind::UnexpectedKey { verb: "frame", .. }
        ));
        assert_eq!(e.offset, 6);
    }

    #[test]
    fn quit_encoding() {
        assert_eq!(encode_message(&Message::Quit), "quit\n");
        assert_eq!(decode_message(b"quit").unwrap(), Message::Quit);
        assert!(decode_message(b"quit x=\"1\"").is_err());
    }

    #[test]
    fn escapes_round_trip() {
        let m = Message::Frame {
            image: "a \"quoted\" \\path\nwith newline".into(),
        };
        let wire = encode_message(&m);
        assert_eq!(wire.matches('\n').count(), 1);
        assert!(wire.contains(r#"\"quoted\""#));
        assert_eq!(decode_message(wire.as_bytes()).unwrap(), m);
    }

    #[test]
    fn structured_errors() {
        use DecodeErrorKind::*;
        let cases: &[(&[u8], fn(&DecodeErrorKind) -> bool)] = &[
            (b"", |k| *k == Empty),
            (b"bogus", |k| matches!(k, UnknownVerb(_))),
            (b"frame image=\"x", |k| *k == UnterminatedQuote),
            (b"frame image=x", |k| *k == ExpectedQuote),
            (b"frame image", |k| *k == ExpectedEquals),
            (b"frame  image=\"x\"", |k| *k == BadKey),
            (b"frame Image=\"x\"", |k| *k == BadKey),
            (b"frame image=\"a\\tb\"", |k| *k == BadEscape('t')),
            (b"frame image=\"x\" image=\"y\"", |k| {
                matches!(k, DuplicateKey(_))
            }),
            (b"frame image=\"x\"junk", |k| *k == ExpectedSpace),
            (b"frame", |k| matches!(k, MissingKey { key: "image", .. })),
            (b"status region=\"P 1,2,3\"", |k| matches!(k, BadRegion(_))),
            (
                b"hello name=\"a\" version=\"1\" deterministic=\"yes\"",
                |k| matches!(k, BadFlag(_)),
            ),
            (b"frame image=\"\xff\"", |k| *k == InvalidUtf8),
        ];
        for (line, ok) in cases {
            let e = decode_message(line).unwrap_err();
            assert!(ok(&e.kind), "{:?} -> {e}", String::from_utf8_lossy(line));
        }
    }

    #[test]
    fn oversize_rejected() {
        let mut line = b"frame image=\"".to_vec();
        line.extend(std::iter::repeat(b'a').take(MAX_LINE));
        line.push(b'"');
        let e = decode_message(&line).unwrap_err();
        assert!(matches!(e.kind, DecodeErrorKind::Oversize(_)));
    }
}
