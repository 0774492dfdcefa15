//! Reference transcript of an echo client, for checking other client
//! implementations against the wire grammar.

use super::message::TrackerMeta;
use super::region::Region;
use super::session::{Direction, ScriptStep, TranscriptEntry};

/// Transcript of [`golden_script`] against an echo client announcing
/// [`golden_meta`]. Evaluator lines start with `> `, tracker lines with `< `.
pub const GOLDEN_ECHO_TRANSCRIPT: &str = include_str!("golden_echo.txt");

pub fn golden_meta() -> TrackerMeta {
    TrackerMeta {
        name: "echo".into(),
        version: "1".into(),
        deterministic: true,
    }
}

/// Initialize with a polygon, five frames, then a rectangle re-initialization
/// and two more frames.
pub fn golden_script() -> Vec<ScriptStep> {
    let img = |t: usize| format!("frames/{t:05}.png");
    let poly = Region::poly([10.0, 10.5, 60.25, 12.0, 58.125, 40.0, 9.0, 38.75]).expect("valid");
    let rect = Region::rect(100.0, 80.0, 32.5, 20.0).expect("valid");
    let mut steps = vec![ScriptStep::Initialize {
        image: img(0),
        region: poly,
    }];
    steps.extend((1..6).map(|t| ScriptStep::Frame { image: img(t) }));
    steps.push(ScriptStep::Initialize {
        image: img(6),
        region: rect,
    });
    steps.extend((7..9).map(|t| ScriptStep::Frame { image: img(t) }));
    steps
}

/// Renders a session transcript in the golden format.
pub fn format_transcript(entries: &[TranscriptEntry]) -> String {
    entries
        .iter()
        .map(|e| {
            let tag = match e.direction {
                Direction::Sent => '>',
                Direction::Received => '<',
            };
            format!("{tag} {}\n", e.line)
        })
        .collect()
}
