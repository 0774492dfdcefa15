//! Aggregation of run traces into per-pattern tables.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    accuracy, ar_robustness, eao, rank_trackers, robustness, weighted_average, MeasureError,
    OverlapTrace, Ranking,
};
use crate::controllers::Variant;

/// Pattern used as the reference column of the delta table.
pub const BASELINE_PATTERN: &str = "Eb";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportParams {
    pub burn_in: usize,
    /// Sensitivity of the A-R robustness transform.
    pub sensitivity: f64,
    /// EAO length range; `None` uses `[1, L]` per sequence.
    pub eao_range: Option<(usize, usize)>,
}

impl Default for ReportParams {
    fn default() -> Self {
        Self {
            burn_in: 10,
            sensitivity: 100.0,
            eao_range: None,
        }
    }
}

/// All repetitions of one tracker on one (pattern, sequence) pair.
#[derive(Debug, Clone)]
pub struct SequenceRuns {
    pub tracker: String,
    pub pattern: String,
    pub sequence: String,
    pub length: usize,
    pub traces: Vec<OverlapTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceScores {
    pub sequence: String,
    pub length: usize,
    pub repetitions: usize,
    /// Mean over repetitions with a defined accuracy.
    pub accuracy: Option<f64>,
    /// Mean failure count over repetitions.
    pub failures: f64,
    pub eao: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternScores {
    pub tracker: String,
    pub pattern: String,
    pub accuracy: Option<f64>,
    /// Failures summed over sequences.
    pub failures: f64,
    pub frames: usize,
    pub ar_robustness: f64,
    pub eao: Option<f64>,
    pub sequences: Vec<SequenceScores>,
}

/// Per-pattern mean over trackers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Difficulty {
    pub pattern: String,
    pub accuracy: Option<f64>,
    pub failures: f64,
    pub eao: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EaoReport {
    pub params: ReportParams,
    pub entries: Vec<PatternScores>,
}

fn pattern_order(name: &str) -> (usize, String) {
    let pos = name
        .parse::<Variant>()
        .ok()
        .and_then(|v| Variant::ALL.iter().position(|&x| x == v));
    (pos.unwrap_or(usize::MAX), name.to_string())
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn score_sequence(
    runs: &SequenceRuns,
    params: &ReportParams,
) -> Result<SequenceScores, MeasureError> {
    if runs.length == 0 {
        return Err(MeasureError::ZeroLength);
    }
    let (lo, hi) = params.eao_range.unwrap_or((1, runs.length));
    Ok(SequenceScores {
        sequence: runs.sequence.clone(),
        length: runs.length,
        repetitions: runs.traces.len(),
        accuracy: mean(
            runs.traces
                .iter()
                .filter_map(|t| accuracy(t, params.burn_in)),
        ),
        failures: mean(runs.traces.iter().map(|t| robustness(t) as f64)).unwrap_or(0.0),
        eao: eao(&runs.traces, lo, hi)?,
    })
}

impl EaoReport {
    pub fn compute(runs: &[SequenceRuns], params: ReportParams) -> Result<Self, MeasureError> {
        let mut groups: BTreeMap<(String, (usize, String)), Vec<&SequenceRuns>> = BTreeMap::new();
        for r in runs {
            groups
                .entry((r.tracker.clone(), pattern_order(&r.pattern)))
                .or_default()
                .push(r);
        }
        let mut entries = Vec::with_capacity(groups.len());
        for ((tracker, (_, pattern)), mut group) in groups {
            group.sort_by(|a, b| a.sequence.cmp(&b.sequence));
            let sequences = group
                .iter()
                .map(|r| score_sequence(r, &params))
                .collect::<Result<Vec<_>, _>>()?;
            let lengths: Vec<usize> = sequences.iter().map(|s| s.length).collect();
            let frames: usize = lengths.iter().sum();
            let failures: f64 = sequences.iter().map(|s| s.failures).sum();
            entries.push(PatternScores {
                tracker,
                pattern,
                accuracy: weighted_average(
                    &sequences.iter().map(|s| s.accuracy).collect::<Vec<_>>(),
                    &lengths,
                )?,
                failures,
                frames,
                ar_robustness: ar_robustness(failures, frames, params.sensitivity),
                eao: weighted_average(
                    &sequences.iter().map(|s| s.eao).collect::<Vec<_>>(),
                    &lengths,
                )?,
                sequences,
            });
        }
        Ok(Self { params, entries })
    }

    pub fn get(&self, tracker: &str, pattern: &str) -> Option<&PatternScores> {
        self.entries
            .iter()
            .find(|e| e.tracker == tracker && e.pattern == pattern)
    }

    pub fn trackers(&self) -> Vec<String> {
        let mut t: Vec<String> = self.entries.iter().map(|e| e.tracker.clone()).collect();
        t.dedup();
        t.sort();
        t.dedup();
        t
    }

    pub fn patterns(&self) -> Vec<String> {
        let mut p: Vec<(usize, String)> = self
            .entries
            .iter()
            .map(|e| pattern_order(&e.pattern))
            .collect();
        p.sort();
        p.dedup();
        p.into_iter().map(|(_, n)| n).collect()
    }

    /// Per-pattern averages over trackers, weighted by frames evaluated.
    pub fn difficulty(&self) -> Result<Vec<Difficulty>, MeasureError> {
        self.patterns()
            .into_iter()
            .map(|pattern| {
                let rows: Vec<&PatternScores> = self
                    .entries
                    .iter()
                    .filter(|e| e.pattern == pattern)
                    .collect();
                let lengths: Vec<usize> = rows.iter().map(|r| r.frames).collect();
                Ok(Difficulty {
                    accuracy: weighted_average(
                        &rows.iter().map(|r| r.accuracy).collect::<Vec<_>>(),
                        &lengths,
                    )?,
                    failures: mean(rows.iter().map(|r| r.failures)).unwrap_or(0.0),
                    eao: weighted_average(
                        &rows.iter().map(|r| r.eao).collect::<Vec<_>>(),
                        &lengths,
                    )?,
                    pattern,
                })
            })
            .collect()
    }

    /// Trackers ranked by EAO on one pattern; trackers without a defined
    /// EAO are left out.
    pub fn ranking(&self, pattern: &str) -> Result<Ranking, MeasureError> {
        let scores: Vec<(String, f64)> = self
            .entries
            .iter()
            .filter(|e| e.pattern == pattern)
            .filter_map(|e| e.eao.map(|s| (e.tracker.clone(), s)))
            .collect();
        rank_trackers(&scores)
    }

    /// Writes `per_pattern.csv`, `per_sequence.csv`, `ar_plot.csv`,
    /// `difficulty.csv`, `eao_delta.csv` and `report.json` into `dir`.
    pub fn write_tables(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let opt = |x: Option<f64>| x.map(|v| format!("{v}")).unwrap_or_default();

        let mut w = csv::Writer::from_path(dir.join("per_pattern.csv"))?;
        w.write_record([
            "tracker",
            "pattern",
            "accuracy",
            "failures",
            "frames",
            "ar_robustness",
            "eao",
        ])?;
        for e in &self.entries {
            w.write_record([
                e.tracker.clone(),
                e.pattern.clone(),
                opt(e.accuracy),
                format!("{}", e.failures),
                e.frames.to_string(),
                format!("{}", e.ar_robustness),
                opt(e.eao),
            ])?;
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(dir.join("per_sequence.csv"))?;
        w.write_record([
            "tracker",
            "pattern",
            "sequence",
            "length",
            "repetitions",
            "accuracy",
            "failures",
            "eao",
        ])?;
        for e in &self.entries {
            for s in &e.sequences {
                w.write_record([
                    e.tracker.clone(),
                    e.pattern.clone(),
                    s.sequence.clone(),
                    s.length.to_string(),
                    s.repetitions.to_string(),
                    opt(s.accuracy),
                    format!("{}", s.failures),
                    opt(s.eao),
                ])?;
            }
        }
        w.flush()?;

        let mut w = csv::Writer::from_path(dir.join("ar_plot.csv"))?;
        w.write_record(["tracker", "pattern", "accuracy", "ar_robustness"])?;
        for e in &self.entries {
            w.write_record([
                e.tracker.clone(),
                e.pattern.clone(),
                opt(e.accuracy),
                format!("{}", e.ar_robustness),
            ])?;
        }
        w.flush()?;

        let difficulty = self.difficulty().map_err(std::io::Error::other)?;
        let mut w = csv::Writer::from_path(dir.join("difficulty.csv"))?;
        w.write_record(["pattern", "accuracy", "failures", "eao"])?;
        for d in &difficulty {
            w.write_record([
                d.pattern.clone(),
                opt(d.accuracy),
                format!("{}", d.failures),
                opt(d.eao),
            ])?;
        }
        w.flush()?;

        let delta = self.delta_table();
        let mut w = csv::Writer::from_path(dir.join("eao_delta.csv"))?;
        let patterns = self.patterns();
        let mut header = vec!["tracker".to_string()];
        for p in &patterns {
            header.push(p.clone());
            header.push(format!("{p}_delta"));
        }
        header.extend(["average".to_string(), "average_delta".to_string()]);
        w.write_record(&header)?;
        for row in &delta {
            let mut rec = vec![row.tracker.clone()];
            for c in &row.cells {
                rec.push(opt(c.value));
                rec.push(opt(c.delta));
            }
            rec.push(opt(row.average.value));
            rec.push(opt(row.average.delta));
            w.write_record(&rec)?;
        }
        w.flush()?;

        let json = serde_json::json!({
            "params": self.params,
            "entries": self.entries,
            "difficulty": difficulty,
            "delta": delta,
        });
        let mut f = std::fs::File::create(dir.join("report.json"))?;
        serde_json::to_writer_pretty(&mut f, &json)?;
        f.write_all(b"\n")
    }

    /// EAO per tracker and pattern with the difference to the baseline
    /// column; the average excludes the baseline pattern.
    pub fn delta_table(&self) -> Vec<DeltaRow> {
        let patterns = self.patterns();
        self.trackers()
            .into_iter()
            .map(|tracker| {
                let base = self.get(&tracker, BASELINE_PATTERN).and_then(|e| e.eao);
                let diff = |v: Option<f64>| v.zip(base).map(|(v, b)| v - b);
                let cells: Vec<DeltaCell> = patterns
                    .iter()
                    .map(|p| {
                        let value = self.get(&tracker, p).and_then(|e| e.eao);
                        DeltaCell {
                            pattern: p.clone(),
                            value,
                            delta: diff(value),
                        }
                    })
                    .collect();
                let avg = mean(
                    cells
                        .iter()
                        .filter(|c| c.pattern != BASELINE_PATTERN)
                        .filter_map(|c| c.value),
                );
                DeltaRow {
                    tracker,
                    cells,
                    average: DeltaCell {
                        pattern: "average".into(),
                        value: avg,
                        delta: diff(avg),
                    },
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaCell {
    pub pattern: String,
    pub value: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaRow {
    pub tracker: String,
    pub cells: Vec<DeltaCell>,
    pub average: DeltaCell,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{FrameKind, OverlapFrame};

    fn runs(tracker: &str, pattern: &str, seq: &str, traces: Vec<OverlapTrace>) -> SequenceRuns {
        SequenceRuns {
            tracker: tracker.into(),
            pattern: pattern.into(),
            sequence: seq.into(),
            length: traces[0].len(),
            traces,
        }
    }

    #[test]
    fn hand_fixture_and_weights() {
        let hand = OverlapTrace::new(vec![
            OverlapFrame::new(FrameKind::Init, Some(0.5)),
            OverlapFrame::new(FrameKind::Tracked, Some(0.5)),
            OverlapFrame::new(FrameKind::Failure, Some(0.0)),
            OverlapFrame::new(FrameKind::Skipped, None),
        ])
        .unwrap();
        let ones = OverlapTrace::from_overlaps(&[1.0; 12]).unwrap();
        let report = EaoReport::compute(
            &[
                runs("t", "Eb", "a", vec![hand.clone()]),
                runs("t", "Er_s", "a", vec![hand]),
                runs("t", "Er_s", "b", vec![ones]),
            ],
            ReportParams {
                burn_in: 0,
                ..Default::default()
            },
        )
        .unwrap();
        let eb = report.get("t", "Eb").unwrap();
        assert!((eb.eao.unwrap() - 0.3958333333333333).abs() < 1e-9);
        assert_eq!(eb.failures, 1.0);
        assert!((eb.ar_robustness - (-25.0f64).exp()).abs() < 1e-18);
        let er = report.get("t", "Er_s").unwrap();
        let want = (0.3958333333333333 * 4.0 + 12.0) / 16.0;
        assert!((er.eao.unwrap() - want).abs() < 1e-12);
        assert_eq!(report.patterns(), vec!["Eb", "Er_s"]);
        let delta = report.delta_table();
        assert!((delta[0].cells[1].delta.unwrap() - (want - 0.3958333333333333)).abs() < 1e-12);
        assert_eq!(delta[0].average.value, er.eao);
    }

    #[test]
    fn tables_written() {
        let dir = tempfile::tempdir().unwrap();
        let ones = OverlapTrace::from_overlaps(&[1.0; 12]).unwrap();
        let report = EaoReport::compute(
            &[runs("echo", "Eb", "s", vec![ones])],
            ReportParams::default(),
        )
        .unwrap();
        report.write_tables(dir.path()).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("per_pattern.csv")).unwrap();
        assert_eq!(csv.lines().nth(1).unwrap(), "echo,Eb,1,0,12,1,1");
        for f in [
            "per_sequence.csv",
            "ar_plot.csv",
            "difficulty.csv",
            "eao_delta.csv",
            "report.json",
        ] {
            assert!(dir.path().join(f).exists());
        }
    }
}
