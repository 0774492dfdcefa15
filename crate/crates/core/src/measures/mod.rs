//! Overlap, accuracy, robustness, EAO, aggregation and ranking.
//!
//! Undefined results (no valid frames, no usable fragments) are `None`
//! rather than zero.

mod overlap;
mod ranking;
pub mod report;
mod scores;

pub use overlap::{polygon_iou, quad_overlap, Overlap};
pub use ranking::{rank_correlation, rank_trackers, RankEntry, Ranking};
pub use report::{EaoReport, PatternScores, ReportParams, SequenceRuns, SequenceScores};
pub use scores::{
    accuracy, ar_robustness, eao, eao_curve, fragments, robustness, weighted_average, Fragment,
    FrameKind, OverlapFrame, OverlapTrace,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("invalid trace: {0}")]
    Trace(String),
    #[error("length mismatch: {0} scores, {1} weights")]
    LengthMismatch(usize, usize),
    #[error("sequence length must be positive")]
    ZeroLength,
    #[error("rankings cover different trackers")]
    TrackerSetMismatch,
    #[error("ranking needs at least two trackers, got {0}")]
    TooFewTrackers(usize),
    #[error("duplicate tracker {0:?}")]
    DuplicateTracker(String),
    #[error("score for {0:?} is not finite")]
    NonFiniteScore(String),
    #[error("rank correlation undefined: one ranking is all ties")]
    AllTied,
    #[error("invalid range [{0}, {1}]")]
    Range(usize, usize),
}
