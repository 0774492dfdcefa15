//! Motion-attribute statistics of annotated datasets: MAC, FPA and INTER.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("dataset has no frames")]
    Empty,
    #[error("sequence {sequence:?} has no frames")]
    EmptySequence { sequence: String },
    #[error("sequence {sequence:?} frame {frame}: attribute {attribute:?} not in vocabulary")]
    UnknownAttribute {
        sequence: String,
        frame: usize,
        attribute: String,
    },
    #[error("invalid dataset JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeSequence {
    pub id: String,
    pub frames: Vec<Vec<String>>,
}

/// Per-frame motion attributes of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeDataset {
    pub vocabulary: Vec<String>,
    pub sequences: Vec<AttributeSequence>,
}

impl AttributeDataset {
    pub fn new(
        vocabulary: Vec<String>,
        sequences: Vec<AttributeSequence>,
    ) -> Result<Self, StatsError> {
        let d = Self {
            vocabulary,
            sequences,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn from_json(text: &str) -> Result<Self, StatsError> {
        let d: Self = serde_json::from_str(text)?;
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<(), StatsError> {
        let vocab: BTreeSet<&str> = self.vocabulary.iter().map(String::as_str).collect();
        for s in &self.sequences {
            if s.frames.is_empty() {
                return Err(StatsError::EmptySequence {
                    sequence: s.id.clone(),
                });
            }
            for (i, f) in s.frames.iter().enumerate() {
                if let Some(a) = f.iter().find(|a| !vocab.contains(a.as_str())) {
                    return Err(StatsError::UnknownAttribute {
                        sequence: s.id.clone(),
                        frame: i,
                        attribute: a.clone(),
                    });
                }
            }
        }
        if self.total_frames() == 0 {
            return Err(StatsError::Empty);
        }
        Ok(())
    }

    // Duplicate labels on one frame count once.
    fn frame_sets(&self) -> impl Iterator<Item = BTreeSet<&str>> {
        self.sequences
            .iter()
            .flat_map(|s| s.frames.iter())
            .map(|f| f.iter().map(String::as_str).collect())
    }

    pub fn total_frames(&self) -> usize {
        self.sequences.iter().map(|s| s.frames.len()).sum()
    }

    pub fn annotated_frames(&self) -> usize {
        self.frame_sets().filter(|f| !f.is_empty()).count()
    }
}

/// Percentage of frames with at least one motion attribute.
pub fn mac(d: &AttributeDataset) -> f64 {
    100.0 * d.annotated_frames() as f64 / d.total_frames() as f64
}

/// Effective frames per attribute. Each frame adds `1/k` to each of its `k`
/// attributes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fpa {
    pub per_attribute: BTreeMap<String, f64>,
    /// Mean over attributes present; `None` when no frame is annotated.
    pub mean: Option<f64>,
}

pub fn fpa(d: &AttributeDataset) -> Fpa {
    let mut per_attribute: BTreeMap<String, f64> = BTreeMap::new();
    for f in d.frame_sets() {
        let w = 1.0 / f.len() as f64;
        for a in f {
            *per_attribute.entry(a.to_string()).or_default() += w;
        }
    }
    let mean = (!per_attribute.is_empty())
        .then(|| per_attribute.values().sum::<f64>() / per_attribute.len() as f64);
    Fpa {
        per_attribute,
        mean,
    }
}

/// Percentage of annotated frames carrying two or more attributes.
pub fn inter(d: &AttributeDataset) -> Option<f64> {
    let annotated = d.annotated_frames();
    let multi = d.frame_sets().filter(|f| f.len() >= 2).count();
    (annotated > 0).then(|| 100.0 * multi as f64 / annotated as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub frames: usize,
    pub annotated_frames: usize,
    pub sequences: usize,
    pub mac: f64,
    pub fpa: Fpa,
    pub inter: Option<f64>,
}

pub fn dataset_stats(d: &AttributeDataset) -> DatasetStats {
    DatasetStats {
        frames: d.total_frames(),
        annotated_frames: d.annotated_frames(),
        sequences: d.sequences.len(),
        mac: mac(d),
        fpa: fpa(d),
        inter: inter(d),
    }
}
