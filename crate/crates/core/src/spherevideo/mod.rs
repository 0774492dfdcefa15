//! Source sequences: omnidirectional frames stored as cube-maps plus their
//! spherical ground truth.

mod cache;
mod cubemap;
mod equirect;
mod manifest;

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

pub use cache::FrameCache;
pub use cubemap::{face_coord_to_texel, sample_direction, texel_to_face_coord, CubeMapFrame, Face};
pub use equirect::{convert_equirect_to_cubemap, sample_equirect};
pub use manifest::{format_frame_path, load_manifest, DiskFrames, FaceLayout, SourceManifest};

use crate::annotations::{AnnotationError, GroundTruthTrack};

#[derive(Debug, Error)]
pub enum SourceError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },
    #[error("frame {index}: missing file {path}")]
    MissingFrame { index: usize, path: PathBuf },
    #[error("frame {index}: face size {found}, expected {expected}")]
    FaceSize {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("frame/annotation count mismatch: {frames} frames, {annotations} annotations")]
    Consistency { frames: usize, annotations: usize },
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("frame index {index} out of range (length {len})")]
    OutOfRange { index: usize, len: usize },
    #[error("annotations: {0}")]
    Annotations(#[from] AnnotationError),
}

impl SourceError {
    pub(crate) fn image(path: &Path, err: image::ImageError) -> Self {
        SourceError::Image {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }
}

/// Random-access provider of cube-map frames.
///
/// Implementations hand out shared frames so a cache may evict an entry while
/// a reader still holds it.
pub trait FrameSource: Send + Sync {
    fn len(&self) -> usize;

    fn face_size(&self) -> usize;

    fn frame(&self, index: usize) -> Result<Arc<CubeMapFrame>, SourceError>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Frames held in memory.
pub struct InMemoryFrames {
    frames: Vec<Arc<CubeMapFrame>>,
}

impl InMemoryFrames {
    pub fn new(frames: Vec<Arc<CubeMapFrame>>) -> Result<Self, SourceError> {
        let n = frames
            .first()
            .ok_or_else(|| SourceError::Format("no frames".into()))?
            .face_size();
        if let Some((index, f)) = frames.iter().enumerate().find(|(_, f)| f.face_size() != n) {
            return Err(SourceError::FaceSize {
                index,
                expected: n,
                found: f.face_size(),
            });
        }
        Ok(Self { frames })
    }

    /// The same frame repeated `len` times (static scene).
    pub fn repeated(frame: Arc<CubeMapFrame>, len: usize) -> Self {
        Self {
            frames: vec![frame; len],
        }
    }
}

impl FrameSource for InMemoryFrames {
    fn len(&self) -> usize {
        self.frames.len()
    }

    fn face_size(&self) -> usize {
        self.frames[0].face_size()
    }

    fn frame(&self, index: usize) -> Result<Arc<CubeMapFrame>, SourceError> {
        self.frames
            .get(index)
            .cloned()
            .ok_or(SourceError::OutOfRange {
                index,
                len: self.frames.len(),
            })
    }
}

/// An omnidirectional source sequence with per-frame spherical ground truth.
#[derive(Clone)]
pub struct SourceSequence {
    id: String,
    attribute: Option<String>,
    frames: Arc<dyn FrameSource>,
    track: Arc<GroundTruthTrack<f64>>,
}

impl fmt::Debug for SourceSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SourceSequence")
            .field("id", &self.id)
            .field("len", &self.len())
            .field("face_size", &self.frames.face_size())
            .finish()
    }
}

impl SourceSequence {
    pub fn new(
        id: impl Into<String>,
        frames: Arc<dyn FrameSource>,
        track: GroundTruthTrack<f64>,
    ) -> Result<Self, SourceError> {
        if frames.is_empty() || frames.len() != track.len() {
            return Err(SourceError::Consistency {
                frames: frames.len(),
                annotations: track.len(),
            });
        }
        Ok(Self {
            id: id.into(),
            attribute: None,
            frames,
            track: Arc::new(track),
        })
    }

    pub fn with_attribute(mut self, attribute: Option<String>) -> Self {
        self.attribute = attribute;
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn attribute(&self) -> Option<&str> {
        self.attribute.as_deref()
    }

    pub fn len(&self) -> usize {
        self.track.len()
    }

    pub fn is_empty(&self) -> bool {
        self.track.is_empty()
    }

    pub fn face_size(&self) -> usize {
        self.frames.face_size()
    }

    pub fn frame(&self, t: usize) -> Result<Arc<CubeMapFrame>, SourceError> {
        self.frames.frame(t)
    }

    pub fn track(&self) -> &GroundTruthTrack<f64> {
        &self.track
    }
}
