use serde::{Deserialize, Serialize};

use super::MeasureError;

/// Role of one frame in a supervised run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameKind {
    /// Tracker (re)initialized with ground truth on this frame.
    Init,
    Tracked,
    /// Overlap fell to the failure threshold.
    Failure,
    /// Between a failure and the next initialization; no report.
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapFrame {
    pub kind: FrameKind,
    pub overlap: Option<f64>,
}

impl OverlapFrame {
    pub fn new(kind: FrameKind, overlap: Option<f64>) -> Self {
        Self { kind, overlap }
    }
}

/// Per-frame overlaps of one run with their roles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapTrace {
    frames: Vec<OverlapFrame>,
}

impl OverlapTrace {
    /// Requires a leading init, overlaps in `[0, 1]` on every reported frame
    /// and none on skipped frames.
    pub fn new(frames: Vec<OverlapFrame>) -> Result<Self, MeasureError> {
        let bad = |m: String| Err(MeasureError::Trace(m));
        match frames.first() {
            None => return bad("empty trace".into()),
            Some(f) if f.kind != FrameKind::Init => return bad("first frame is not an init".into()),
            _ => {}
        }
        for (i, f) in frames.iter().enumerate() {
            match (f.kind, f.overlap) {
                (FrameKind::Skipped, None) => {}
                (FrameKind::Skipped, Some(_)) => {
                    return bad(format!("frame {i}: skipped frame carries an overlap"))
                }
                (_, None) => return bad(format!("frame {i}: missing overlap")),
                (_, Some(o)) if !(0.0..=1.0).contains(&o) => {
                    return bad(format!("frame {i}: overlap {o} outside [0, 1]"))
                }
                _ => {}
            }
            if f.kind == FrameKind::Skipped
                && i > 0
                && !matches!(frames[i - 1].kind, FrameKind::Failure | FrameKind::Skipped)
            {
                return bad(format!(
                    "frame {i}: skipped frame not preceded by a failure"
                ));
            }
        }
        Ok(Self { frames })
    }

    /// Builds a trace from raw overlaps: frame 0 is an init, every other
    /// frame is tracked. Handy for fixtures.
    pub fn from_overlaps(overlaps: &[f64]) -> Result<Self, MeasureError> {
        Self::new(
            overlaps
                .iter()
                .enumerate()
                .map(|(i, &o)| {
                    OverlapFrame::new(
                        if i == 0 {
                            FrameKind::Init
                        } else {
                            FrameKind::Tracked
                        },
                        Some(o),
                    )
                })
                .collect(),
        )
    }

    pub fn frames(&self) -> &[OverlapFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn count(&self, kind: FrameKind) -> usize {
        self.frames.iter().filter(|f| f.kind == kind).count()
    }
}

/// Mean overlap over tracked frames, skipping the `burn_in` frames that
/// start at every (re)initialization (the init frame counts as the first).
/// Failure and skipped frames never count.
pub fn accuracy(trace: &OverlapTrace, burn_in: usize) -> Option<f64> {
    let mut since_init = 0usize;
    let (mut sum, mut n) = (0.0, 0usize);
    for f in trace.frames() {
        if f.kind == FrameKind::Init {
            since_init = 0;
        }
        if matches!(f.kind, FrameKind::Init | FrameKind::Tracked) && since_init >= burn_in {
            sum += f.overlap.unwrap_or(0.0);
            n += 1;
        }
        since_init += 1;
    }
    (n > 0).then(|| sum / n as f64)
}

/// Number of failures.
pub fn robustness(trace: &OverlapTrace) -> usize {
    trace.count(FrameKind::Failure)
}

/// `exp(-s * failures / length)`.
pub fn ar_robustness(failures: f64, length: usize, sensitivity: f64) -> f64 {
    if sensitivity == 0.0 {
        return 1.0;
    }
    (-sensitivity * failures / length as f64).exp()
}

/// Overlaps from one initialization to the next failure or to the end of
/// the sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    pub overlaps: Vec<f64>,
    /// Ended in a failure, so it continues with zeros.
    pub failed: bool,
}

impl Fragment {
    fn usable(&self, n: usize) -> bool {
        self.failed || self.overlaps.len() >= n
    }

    fn average(&self, n: usize, prefix: &[f64]) -> f64 {
        prefix[n.min(self.overlaps.len())] / n as f64
    }
}

/// Splits a trace into fragments. The failure frame itself contributes 0.
pub fn fragments(trace: &OverlapTrace) -> Vec<Fragment> {
    let mut out = Vec::new();
    let mut cur: Option<Vec<f64>> = None;
    for f in trace.frames() {
        match f.kind {
            FrameKind::Init => {
                if let Some(o) = cur.take() {
                    out.push(Fragment {
                        overlaps: o,
                        failed: false,
                    });
                }
                cur = Some(vec![f.overlap.unwrap_or(0.0)]);
            }
            FrameKind::Tracked => {
                if let Some(o) = cur.as_mut() {
                    o.push(f.overlap.unwrap_or(0.0));
                }
            }
            FrameKind::Failure => {
                if let Some(mut o) = cur.take() {
                    o.push(0.0);
                    out.push(Fragment {
                        overlaps: o,
                        failed: true,
                    });
                }
            }
            FrameKind::Skipped => {}
        }
    }
    if let Some(o) = cur {
        out.push(Fragment {
            overlaps: o,
            failed: false,
        });
    }
    out
}

struct Prepared {
    frags: Vec<(Fragment, Vec<f64>)>,
}

impl Prepared {
    fn new(traces: &[OverlapTrace]) -> Self {
        let frags = traces
            .iter()
            .flat_map(fragments)
            .map(|f| {
                let mut prefix = Vec::with_capacity(f.overlaps.len() + 1);
                prefix.push(0.0);
                let mut acc = 0.0;
                for &o in &f.overlaps {
                    acc += o;
                    prefix.push(acc);
                }
                (f, prefix)
            })
            .collect();
        Self { frags }
    }

    fn phi(&self, n: usize) -> Option<f64> {
        let (mut sum, mut k) = (0.0, 0usize);
        for (f, prefix) in &self.frags {
            if f.usable(n) {
                sum += f.average(n, prefix);
                k += 1;
            }
        }
        (k > 0).then(|| sum / k as f64)
    }
}

/// Expected average overlap at length `n`: mean over usable fragments of
/// the average of their first `n` overlaps.
pub fn eao_curve(traces: &[OverlapTrace], n: usize) -> Option<f64> {
    if n == 0 {
        return None;
    }
    Prepared::new(traces).phi(n)
}

/// Mean of [`eao_curve`] over `lo..=hi`, skipping lengths with no usable
/// fragment.
pub fn eao(traces: &[OverlapTrace], lo: usize, hi: usize) -> Result<Option<f64>, MeasureError> {
    if lo == 0 || lo > hi {
        return Err(MeasureError::Range(lo, hi));
    }
    let prep = Prepared::new(traces);
    let (mut sum, mut k) = (0.0, 0usize);
    for n in lo..=hi {
        if let Some(p) = prep.phi(n) {
            sum += p;
            k += 1;
        }
    }
    Ok((k > 0).then(|| sum / k as f64))
}

/// Length-weighted mean; undefined scores are dropped and the remaining
/// weights renormalized.
pub fn weighted_average(
    scores: &[Option<f64>],
    lengths: &[usize],
) -> Result<Option<f64>, MeasureError> {
    if scores.len() != lengths.len() {
        return Err(MeasureError::LengthMismatch(scores.len(), lengths.len()));
    }
    if lengths.contains(&0) {
        return Err(MeasureError::ZeroLength);
    }
    let (mut num, mut den) = (0.0, 0.0);
    for (s, &l) in scores.iter().zip(lengths) {
        if let Some(s) = s {
            num += s * l as f64;
            den += l as f64;
        }
    }
    Ok((den > 0.0).then(|| num / den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use FrameKind::*;

    fn hand_case() -> OverlapTrace {
        OverlapTrace::new(vec![
            OverlapFrame::new(Init, Some(0.5)),
            OverlapFrame::new(Tracked, Some(0.5)),
            OverlapFrame::new(Failure, Some(0.0)),
            OverlapFrame::new(Skipped, None),
        ])
        .unwrap()
    }

    #[test]
    fn eao_hand_enumeration() {
        let t = [hand_case()];
        let phis: Vec<f64> = (1..=4).map(|n| eao_curve(&t, n).unwrap()).collect();
        let want = [0.5, 0.5, 1.0 / 3.0, 0.25];
        for (p, w) in phis.iter().zip(want) {
            assert!((p - w).abs() < 1e-12);
        }
        let e = eao(&t, 1, 4).unwrap().unwrap();
        assert!((e - (0.5 + 0.5 + 1.0 / 3.0 + 0.25) / 4.0).abs() < 1e-12);
        assert!((e - 0.3958333333).abs() < 1e-9);
    }

    #[test]
    fn duplicated_fragments_same_eao() {
        let one = eao(&[hand_case()], 1, 4).unwrap();
        let two = eao(&[hand_case(), hand_case()], 1, 4).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn all_ones_eao_is_one() {
        let t = [OverlapTrace::from_overlaps(&[1.0; 50]).unwrap()];
        for (lo, hi) in [(1, 1), (1, 50), (10, 30), (50, 50)] {
            assert_eq!(eao(&t, lo, hi).unwrap(), Some(1.0));
        }
        // lengths beyond the sequence have no usable fragment
        assert_eq!(eao(&t, 51, 60).unwrap(), None);
        assert_eq!(eao(&t, 40, 60).unwrap(), Some(1.0));
    }

    #[test]
    fn accuracy_burn_in() {
        let t = OverlapTrace::from_overlaps(&[1.0, 1.0, 0.5, 0.5]).unwrap();
        assert_eq!(accuracy(&t, 2), Some(0.5));
        assert_eq!(accuracy(&t, 0), Some(0.75));
        assert_eq!(accuracy(&t, 4), None);
        assert_eq!(
            accuracy(&OverlapTrace::from_overlaps(&[1.0; 20]).unwrap(), 10),
            Some(1.0)
        );
    }

    #[test]
    fn accuracy_restarts_burn_in_after_reinit() {
        let t = OverlapTrace::new(vec![
            OverlapFrame::new(Init, Some(0.9)),
            OverlapFrame::new(Tracked, Some(0.8)),
            OverlapFrame::new(Failure, Some(0.0)),
            OverlapFrame::new(Skipped, None),
            OverlapFrame::new(Init, Some(1.0)),
            OverlapFrame::new(Tracked, Some(0.6)),
            OverlapFrame::new(Tracked, Some(0.4)),
        ])
        .unwrap();
        assert_eq!(accuracy(&t, 1), Some((0.8 + 0.6 + 0.4) / 3.0));
        assert_eq!(robustness(&t), 1);
        let f = fragments(&t);
        assert_eq!(f.len(), 2);
        assert!(f[0].failed && !f[1].failed);
        assert_eq!(f[0].overlaps, vec![0.9, 0.8, 0.0]);
    }

    #[test]
    fn ar_robustness_cases() {
        assert_eq!(ar_robustness(0.0, 100, 100.0), 1.0);
        assert!((ar_robustness(2.0, 200, 100.0) - (-1.0f64).exp()).abs() < 1e-12);
        assert_eq!(ar_robustness(7.0, 10, 0.0), 1.0);
    }

    #[test]
    fn weighted_average_cases() {
        assert_eq!(
            weighted_average(&[Some(1.0), Some(0.0)], &[100, 100]).unwrap(),
            Some(0.5)
        );
        assert_eq!(
            weighted_average(&[Some(1.0), Some(0.0)], &[300, 100]).unwrap(),
            Some(0.75)
        );
        assert_eq!(
            weighted_average(&[None, Some(0.3)], &[300, 100]).unwrap(),
            Some(0.3)
        );
        assert_eq!(weighted_average(&[None, None], &[1, 1]).unwrap(), None);
        assert!(weighted_average(&[Some(1.0)], &[1, 2]).is_err());
    }

    #[test]
    fn trace_validation() {
        assert!(OverlapTrace::new(vec![]).is_err());
        assert!(OverlapTrace::new(vec![OverlapFrame::new(Tracked, Some(1.0))]).is_err());
        assert!(OverlapTrace::from_overlaps(&[1.5]).is_err());
        assert!(OverlapTrace::new(vec![
            OverlapFrame::new(Init, Some(1.0)),
            OverlapFrame::new(Skipped, None)
        ])
        .is_err());
    }
}
