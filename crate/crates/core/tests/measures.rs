use omnitrack::measures::{accuracy, eao, FrameKind, OverlapFrame, OverlapTrace};
use proptest::prelude::*;

/// Random valid trace: runs of tracked frames separated by failure, skip
/// and re-init.
fn trace_strategy() -> impl Strategy<Value = Vec<OverlapFrame>> {
    prop::collection::vec((0.01..1.0f64, 0..20u8), 2..60).prop_map(|cells| {
        let mut frames = vec![OverlapFrame::new(FrameKind::Init, Some(cells[0].0))];
        let mut skip = 0;
        for (o, roll) in cells.into_iter().skip(1) {
            if skip > 0 {
                skip -= 1;
                frames.push(OverlapFrame::new(
                    if skip == 0 {
                        FrameKind::Init
                    } else {
                        FrameKind::Skipped
                    },
                    (skip == 0).then_some(o),
                ));
                continue;
            }
            if roll == 0 {
                frames.push(OverlapFrame::new(FrameKind::Failure, Some(0.0)));
                skip = 3;
            } else {
                frames.push(OverlapFrame::new(FrameKind::Tracked, Some(o)));
            }
        }
        frames
    })
}

proptest! {
    #[test]
    fn decreasing_one_overlap_never_raises_scores(frames in trace_strategy(), pick in any::<prop::sample::Index>(), cut in 0.0..1.0f64) {
        let candidates: Vec<usize> = frames
            .iter()
            .enumerate()
            .filter(|(_, f)| matches!(f.kind, FrameKind::Init | FrameKind::Tracked))
            .map(|(i, _)| i)
            .collect();
        let i = candidates[pick.index(candidates.len())];
        let mut lower = frames.clone();
        lower[i].overlap = lower[i].overlap.map(|o| o * cut);
        let (a, b) = (OverlapTrace::new(frames.clone()).unwrap(), OverlapTrace::new(lower).unwrap());
        let len = frames.len();
        for burn in [0, 1, 3] {
            if let (Some(x), Some(y)) = (accuracy(&a, burn), accuracy(&b, burn)) {
                prop_assert!(y <= x + 1e-15);
            }
        }
        let (x, y) = (eao(&[a], 1, len).unwrap(), eao(&[b], 1, len).unwrap());
        if let (Some(x), Some(y)) = (x, y) {
            prop_assert!(y <= x + 1e-15);
        }
    }

    #[test]
    fn all_ones_without_failure_is_one(n in 1usize..200, lo in 1usize..50, width in 0usize..100) {
        let t = OverlapTrace::from_overlaps(&vec![1.0; n]).unwrap();
        let hi = (lo + width).min(n.max(lo));
        if lo <= n {
            prop_assert_eq!(eao(&[t], lo, hi).unwrap(), Some(1.0));
        }
    }
}
