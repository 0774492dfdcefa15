use std::collections::HashMap;

use serde::Serialize;

use super::MeasureError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankEntry {
    pub tracker: String,
    pub score: f64,
    /// 1 is best; ties share the mean of the ranks they span.
    pub rank: f64,
}

/// Trackers in descending score order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ranking {
    pub entries: Vec<RankEntry>,
}

impl Ranking {
    pub fn rank_of(&self, tracker: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.tracker == tracker)
            .map(|e| e.rank)
    }
}

pub fn rank_trackers(scores: &[(String, f64)]) -> Result<Ranking, MeasureError> {
    if scores.len() < 2 {
        return Err(MeasureError::TooFewTrackers(scores.len()));
    }
    let mut seen = std::collections::HashSet::new();
    for (name, s) in scores {
        if !seen.insert(name.as_str()) {
            return Err(MeasureError::DuplicateTracker(name.clone()));
        }
        if !s.is_finite() {
            return Err(MeasureError::NonFiniteScore(name.clone()));
        }
    }
    let mut sorted: Vec<&(String, f64)> = scores.iter().collect();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut entries = Vec::with_capacity(sorted.len());
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j].1 == sorted[i].1 {
            j += 1;
        }
        // positions i..j are tied; 1-based ranks i+1..=j
        let rank = (i + 1 + j) as f64 / 2.0;
        entries.extend(sorted[i..j].iter().map(|(t, s)| RankEntry {
            tracker: t.clone(),
            score: *s,
            rank,
        }));
        i = j;
    }
    Ok(Ranking { entries })
}

/// Kendall tau-b between two rankings of the same trackers.
pub fn rank_correlation(a: &Ranking, b: &Ranking) -> Result<f64, MeasureError> {
    let rb: HashMap<&str, f64> = b
        .entries
        .iter()
        .map(|e| (e.tracker.as_str(), e.rank))
        .collect();
    if a.entries.len() != rb.len() {
        return Err(MeasureError::TrackerSetMismatch);
    }
    let pairs: Vec<(f64, f64)> = a
        .entries
        .iter()
        .map(|e| rb.get(e.tracker.as_str()).map(|&r| (e.rank, r)))
        .collect::<Option<_>>()
        .ok_or(MeasureError::TrackerSetMismatch)?;
    if pairs.len() < 2 {
        return Err(MeasureError::TooFewTrackers(pairs.len()));
    }
    let (mut concordant, mut discordant, mut tie_a, mut tie_b, mut total) =
        (0i64, 0i64, 0i64, 0i64, 0i64);
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            total += 1;
            let dx = pairs[i].0 - pairs[j].0;
            let dy = pairs[i].1 - pairs[j].1;
            if dx == 0.0 {
                tie_a += 1;
            }
            if dy == 0.0 {
                tie_b += 1;
            }
            if dx * dy > 0.0 {
                concordant += 1;
            } else if dx * dy < 0.0 {
                discordant += 1;
            }
        }
    }
    let denom = (((total - tie_a) * (total - tie_b)) as f64).sqrt();
    if denom == 0.0 {
        return Err(MeasureError::AllTied);
    }
    Ok((concordant - discordant) as f64 / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranking(order: &[&str]) -> Ranking {
        let n = order.len() as f64;
        let scores: Vec<(String, f64)> = order
            .iter()
            .enumerate()
            .map(|(i, t)| (t.to_string(), n - i as f64))
            .collect();
        rank_trackers(&scores).unwrap()
    }

    #[test]
    fn identical_and_reversed() {
        let a = ranking(&["A", "B", "C", "D"]);
        assert_eq!(rank_correlation(&a, &a).unwrap(), 1.0);
        let r = ranking(&["D", "C", "B", "A"]);
        assert_eq!(rank_correlation(&a, &r).unwrap(), -1.0);
    }

    #[test]
    fn one_swap_of_three() {
        let tau = rank_correlation(&ranking(&["A", "B", "C"]), &ranking(&["A", "C", "B"])).unwrap();
        assert!((tau - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ties_share_mean_rank() {
        let r = rank_trackers(&[
            ("a".into(), 0.5),
            ("b".into(), 0.9),
            ("c".into(), 0.5),
            ("d".into(), 0.1),
        ])
        .unwrap();
        assert_eq!(r.rank_of("b"), Some(1.0));
        assert_eq!(r.rank_of("a"), Some(2.5));
        assert_eq!(r.rank_of("c"), Some(2.5));
        assert_eq!(r.rank_of("d"), Some(4.0));
    }

    #[test]
    fn tau_b_with_ties() {
        // x = (1, 2.5, 2.5, 4), y = (1, 2, 3, 4): C = 5, D = 0, one tie in x
        let x = rank_trackers(&[
            ("a".into(), 4.0),
            ("b".into(), 2.0),
            ("c".into(), 2.0),
            ("d".into(), 1.0),
        ])
        .unwrap();
        let y = ranking(&["a", "b", "c", "d"]);
        let tau = rank_correlation(&x, &y).unwrap();
        assert!((tau - 5.0 / (5.0f64 * 6.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mismatched_sets() {
        assert_eq!(
            rank_correlation(&ranking(&["A", "B"]), &ranking(&["A", "C"])),
            Err(MeasureError::TrackerSetMismatch)
        );
        assert_eq!(
            rank_correlation(&ranking(&["A", "B"]), &ranking(&["A", "B", "C"])),
            Err(MeasureError::TrackerSetMismatch)
        );
        assert!(rank_trackers(&[("A".into(), 1.0)]).is_err());
    }
}
