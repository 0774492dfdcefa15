use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use omnitrack::protocol::client::{serve, ClientTracker, StaticClient};
use omnitrack::protocol::{
    accept_with_timeout, decode_message, encode_message, format_transcript, golden_meta,
    golden_script, listen, run_session, Message, Phase, Region, ScriptStep, Session, SessionError,
    SessionOutcome, StreamTransport, TrackerMeta, GOLDEN_ECHO_TRANSCRIPT, MAX_LINE,
};
use proptest::prelude::*;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Starts `client` on a thread connected to a fresh pipe transport.
fn piped<F>(client: F) -> (StreamTransport, JoinHandle<()>)
where
    F: FnOnce(BufReader<std::io::PipeReader>, std::io::PipeWriter) + Send + 'static,
{
    let (eval_rx, client_tx) = std::io::pipe().unwrap();
    let (client_rx, eval_tx) = std::io::pipe().unwrap();
    let h = thread::spawn(move || client(BufReader::new(client_rx), client_tx));
    (StreamTransport::new(eval_rx, eval_tx), h)
}

fn echo_client(
    meta: TrackerMeta,
) -> impl FnOnce(BufReader<std::io::PipeReader>, std::io::PipeWriter) + Send {
    move |r, w| serve(r, w, &meta, &mut StaticClient::default()).unwrap()
}

fn script(frames: usize) -> Vec<ScriptStep> {
    let region = Region::rect(10.0, 20.0, 30.0, 40.0).unwrap();
    let mut s = vec![ScriptStep::Initialize {
        image: "f/00000.png".into(),
        region,
    }];
    s.extend((1..frames).map(|t| ScriptStep::Frame {
        image: format!("f/{t:05}.png"),
    }));
    s
}

#[test]
fn echo_session_over_pipes() {
    let (t, h) = piped(echo_client(golden_meta()));
    let steps = script(20);
    let r = run_session(t, Duration::from_secs(5), &steps);
    h.join().unwrap();
    assert_eq!(r.outcome, SessionOutcome::Completed);
    assert_eq!(r.statuses.len(), 20);
    assert!(r
        .statuses
        .iter()
        .all(|s| *s == Region::rect(10.0, 20.0, 30.0, 40.0).unwrap()));
    assert_eq!(r.meta, Some(golden_meta()));
    assert_eq!(r.transcript.last().unwrap().line, "quit");
}

#[test]
fn golden_transcript_matches() {
    let (t, h) = piped(echo_client(golden_meta()));
    let r = run_session(t, Duration::from_secs(5), &golden_script());
    h.join().unwrap();
    assert_eq!(r.outcome, SessionOutcome::Completed);
    assert_eq!(format_transcript(&r.transcript), GOLDEN_ECHO_TRANSCRIPT);
}

#[test]
fn tcp_and_pipe_transcripts_agree() {
    let steps = golden_script();
    let (t, h) = piped(echo_client(golden_meta()));
    let over_pipe = run_session(t, Duration::from_secs(5), &steps);
    h.join().unwrap();

    let listener = listen("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let h = thread::spawn(move || {
        let s = TcpStream::connect(addr).unwrap();
        let r = BufReader::new(s.try_clone().unwrap());
        serve(r, s, &golden_meta(), &mut StaticClient::default()).unwrap();
    });
    let stream = accept_with_timeout(&listener, Duration::from_secs(5)).unwrap();
    let over_tcp = run_session(
        StreamTransport::tcp(stream).unwrap(),
        Duration::from_secs(5),
        &steps,
    );
    h.join().unwrap();
    assert_eq!(over_tcp.outcome, SessionOutcome::Completed);
    assert_eq!(over_pipe.transcript, over_tcp.transcript);
}

#[test]
fn status_before_hello_is_violation() {
    let (t, h) = piped(|_r, mut w| {
        w.write_all(b"status region=\"R 1,1,2,2\"\n").unwrap();
    });
    let r = run_session(t, Duration::from_secs(5), &script(3));
    h.join().unwrap();
    match r.outcome {
        SessionOutcome::Violation {
            step: None,
            message,
        } => assert!(message.contains("hello"), "{message}"),
        o => panic!("{o:?}"),
    }
}

#[test]
fn second_hello_is_violation_at_step() {
    let (t, h) = piped(|mut r, mut w| {
        let hello = encode_message(&Message::Hello(golden_meta()));
        w.write_all(hello.as_bytes()).unwrap();
        let mut line = String::new();
        r.read_line(&mut line).unwrap();
        w.write_all(hello.as_bytes()).unwrap();
    });
    let r = run_session(t, Duration::from_secs(5), &script(3));
    h.join().unwrap();
    assert!(
        matches!(r.outcome, SessionOutcome::Violation { step: Some(0), .. }),
        "{:?}",
        r.outcome
    );
}

#[test]
fn malformed_and_oversize_replies_abort() {
    for reply in [
        b"status region=\"Q 1\"\n".to_vec(),
        vec![b'x'; MAX_LINE + 10],
    ] {
        let (t, h) = piped(move |mut r, mut w| {
            w.write_all(encode_message(&Message::Hello(golden_meta())).as_bytes())
                .unwrap();
            let mut line = String::new();
            r.read_line(&mut line).unwrap();
            w.write_all(&reply).unwrap();
            let _ = w.write_all(b"\n");
        });
        let r = run_session(t, Duration::from_secs(5), &script(3));
        h.join().unwrap();
        assert!(
            matches!(r.outcome, SessionOutcome::Violation { step: Some(0), .. }),
            "{:?}",
            r.outcome
        );
    }
}

#[test]
fn evaluator_side_state_is_enforced() {
    let (t, h) = piped(echo_client(golden_meta()));
    let mut s = Session::new(t, Duration::from_secs(5));
    let e = s.frame("x.png").unwrap_err();
    assert!(matches!(
        e,
        SessionError::State {
            phase: Phase::AwaitHello,
            ..
        }
    ));
    s.handshake().unwrap();
    assert!(matches!(
        s.handshake().unwrap_err(),
        SessionError::State {
            phase: Phase::Idle,
            ..
        }
    ));
    s.initialize("a.png", Region::rect(0.0, 0.0, 1.0, 1.0).unwrap())
        .unwrap();
    s.quit();
    assert_eq!(s.phase(), Phase::Closed);
    assert!(matches!(
        s.frame("b.png").unwrap_err(),
        SessionError::State {
            phase: Phase::Closed,
            ..
        }
    ));
    drop(s);
    h.join().unwrap();
}

/// Answers `hang_at` requests, then goes silent.
struct Stalling {
    inner: StaticClient,
    seen: usize,
    hang_at: usize,
}

impl ClientTracker for Stalling {
    fn initialize(&mut self, image: &str, region: Region) -> Region {
        self.seen += 1;
        self.inner.initialize(image, region)
    }
    fn frame(&mut self, image: &str) -> Region {
        self.seen += 1;
        if self.seen > self.hang_at {
            thread::sleep(Duration::from_secs(3));
        }
        self.inner.frame(image)
    }
}

#[test]
fn stalled_client_times_out_at_frame() {
    let (t, _h) = piped(|r, w| {
        let mut c = Stalling {
            inner: StaticClient::default(),
            seen: 0,
            hang_at: 4,
        };
        let _ = serve(r, w, &golden_meta(), &mut c);
    });
    let timeout = Duration::from_millis(500);
    let start = Instant::now();
    let r = run_session(t, timeout, &script(10));
    let took = start.elapsed();
    assert_eq!(r.outcome, SessionOutcome::Timeout { step: 4 });
    assert!(took < timeout + Duration::from_secs(1), "{took:?}");
}

#[test]
fn client_exit_mid_run_is_crash() {
    let (t, h) = piped(|mut r, mut w| {
        w.write_all(encode_message(&Message::Hello(golden_meta())).as_bytes())
            .unwrap();
        let mut line = String::new();
        for _ in 0..3 {
            line.clear();
            r.read_line(&mut line).unwrap();
            w.write_all(b"status region=\"R 1,1,2,2\"\n").unwrap();
        }
    });
    let r = run_session(t, Duration::from_secs(5), &script(10));
    h.join().unwrap();
    assert_eq!(r.outcome, SessionOutcome::Crash { step: 3 });
    assert_eq!(r.statuses.len(), 3);
}

#[test]
fn fuzzed_lines_never_panic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let seeds: Vec<Vec<u8>> = [
        Message::Hello(golden_meta()),
        Message::Initialize {
            image: "a\"b\\c\nd.png".into(),
            region: Region::poly([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.5]).unwrap(),
        },
        Message::Frame {
            image: "x.png".into(),
        },
        Message::Status {
            region: Region::rect(1.0, 2.0, 3.0, 4.0).unwrap(),
        },
        Message::Quit,
    ]
    .iter()
    .map(|m| encode_message(m).into_bytes())
    .collect();
    let alphabet = b"hello status frame initialize quit region image name version deterministic =\"\\ ,.RP0123456789-e\r\n\x00\xff";
    let (mut ok, mut err) = (0, 0);
    for i in 0..10_000 {
        let line: Vec<u8> = match i % 3 {
            0 => (0..rng.next_u32() % 120)
                .map(|_| rng.next_u32() as u8)
                .collect(),
            1 => (0..rng.next_u32() % 120)
                .map(|_| alphabet[rng.next_u32() as usize % alphabet.len()])
                .collect(),
            _ => {
                let mut l = seeds[rng.next_u32() as usize % seeds.len()].clone();
                for _ in 0..1 + rng.next_u32() % 4 {
                    let p = rng.next_u32() as usize % l.len();
                    match rng.next_u32() % 3 {
                        0 => l[p] = rng.next_u32() as u8,
                        1 => {
                            l.remove(p);
                        }
                        _ => l.insert(p, alphabet[rng.next_u32() as usize % alphabet.len()]),
                    }
                    if l.is_empty() {
                        break;
                    }
                }
                l
            }
        };
        match decode_message(&line) {
            Ok(m) => {
                ok += 1;
                // anything accepted re-encodes to something that decodes the same
                assert_eq!(decode_message(encode_message(&m).as_bytes()), Ok(m));
            }
            Err(e) => {
                err += 1;
                assert!(e.offset <= line.len().max(MAX_LINE), "{e:?}");
            }
        }
    }
    assert!(ok > 0 && err > 0);
}

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop_oneof![
            Just('"'),
            Just('\\'),
            Just('\n'),
            Just(' '),
            Just('='),
            Just('é'),
            prop::char::range('a', 'z')
        ],
        0..20,
    )
    .prop_map(|v| v.into_iter().collect())
}

fn region() -> impl Strategy<Value = Region> {
    prop_oneof![
        (-1e4..1e4f64, -1e4..1e4f64, 0.001..1e4f64, 0.001..1e4f64)
            .prop_map(|(x, y, w, h)| Region::rect(x, y, w, h).unwrap()),
        prop::array::uniform8(-1e6..1e6f64).prop_map(|c| Region::poly(c).unwrap()),
    ]
}

fn message() -> impl Strategy<Value = Message> {
    prop_oneof![
        (text(), text(), any::<bool>()).prop_map(|(name, version, deterministic)| Message::Hello(
            TrackerMeta {
                name,
                version,
                deterministic
            }
        )),
        (text(), region()).prop_map(|(image, region)| Message::Initialize { image, region }),
        text().prop_map(|image| Message::Frame { image }),
        region().prop_map(|region| Message::Status { region }),
        Just(Message::Quit),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn messages_round_trip(m in message()) {
        let line = encode_message(&m);
        prop_assert_eq!(line.matches('\n').count(), 1);
        prop_assert_eq!(decode_message(line.as_bytes()), Ok(m));
    }
}
