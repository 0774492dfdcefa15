use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{CubeMapFrame, Face, FrameCache, FrameSource, SourceError, SourceSequence};
use crate::annotations::parse_annotations;

const DEFAULT_CACHE_FRAMES: usize = 8;

/// How the six faces of a frame are stored on disk.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceLayout {
    /// One `6N x N` image with faces left to right in `+X,-X,+Y,-Y,+Z,-Z` order.
    #[default]
    Strip,
    /// Six `N x N` images; the face suffix (`_px`, `_nx`, ...) is inserted
    /// before the extension of the formatted frame path.
    Faces,
}

/// JSON description of one source sequence. Relative paths resolve against
/// the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceManifest {
    pub id: String,
    pub face_size: usize,
    /// printf-style pattern with one integer conversion, e.g. `frames/%05d.png`.
    pub frame_pattern: String,
    pub frame_count: usize,
    pub annotations: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
    #[serde(default)]
    pub layout: FaceLayout,
    #[serde(default)]
    pub first_index: usize,
}

/// Expands the single `%d`/`%0Nd`/`%Nd` conversion of `pattern`.
pub fn format_frame_path(pattern: &str, index: usize) -> Result<String, SourceError> {
    let mut out = String::with_capacity(pattern.len() + 8);
    let mut chars = pattern.chars().peekable();
    let mut used = false;
    while let Some(c) = chars.next() {
        if c != '%' {
            out.push(c);
            continue;
        }
        if chars.peek() == Some(&'%') {
            chars.next();
            out.push('%');
            continue;
        }
        let mut spec = String::new();
        while let Some(&d) = chars.peek() {
            if d.is_ascii_digit() {
                spec.push(d);
                chars.next();
            } else {
                break;
            }
        }
        match chars.next() {
            Some('d') | Some('u') if !used => {
                used = true;
                let zero = spec.starts_with('0');
                let width: usize = if spec.is_empty() {
                    0
                } else {
                    spec.parse().unwrap_or(0)
                };
                if zero {
                    out.push_str(&format!("{index:0width$}"));
                } else {
                    out.push_str(&format!("{index:width$}"));
                }
            }
            _ => {
                return Err(SourceError::Manifest(format!(
                    "frame_pattern {pattern:?} must contain exactly one integer conversion"
                )))
            }
        }
    }
    if !used {
        return Err(SourceError::Manifest(format!(
            "frame_pattern {pattern:?} has no integer conversion"
        )));
    }
    Ok(out)
}

fn face_path(base: &Path, face: Face) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}_{}.{}", face.suffix(), ext.to_string_lossy()),
        None => format!("{stem}_{}", face.suffix()),
    };
    base.with_file_name(name)
}

/// Frames read lazily from disk through a bounded cache.
pub struct DiskFrames {
    paths: Vec<PathBuf>,
    layout: FaceLayout,
    face_size: usize,
    cache: FrameCache,
}

impl DiskFrames {
    pub fn new(
        paths: Vec<PathBuf>,
        layout: FaceLayout,
        face_size: usize,
        cache_frames: usize,
    ) -> Self {
        Self {
            paths,
            layout,
            face_size,
            cache: FrameCache::new(cache_frames),
        }
    }

    fn files(&self, index: usize) -> Vec<PathBuf> {
        let base = &self.paths[index];
        match self.layout {
            FaceLayout::Strip => vec![base.clone()],
            FaceLayout::Faces => Face::ALL.iter().map(|&f| face_path(base, f)).collect(),
        }
    }

    /// Checks existence and header dimensions of every frame file.
    pub fn validate(&self) -> Result<(), SourceError> {
        let n = self.face_size as u32;
        for index in 0..self.paths.len() {
            for path in self.files(index) {
                if !path.is_file() {
                    return Err(SourceError::MissingFrame { index, path });
                }
                let (w, h) =
                    image::image_dimensions(&path).map_err(|e| SourceError::image(&path, e))?;
                let found = h as usize;
                let ok = match self.layout {
                    FaceLayout::Strip => w == 6 * h && h == n,
                    FaceLayout::Faces => w == h && h == n,
                };
                if !ok {
                    return Err(SourceError::FaceSize {
                        index,
                        expected: self.face_size,
                        found,
                    });
                }
            }
        }
        Ok(())
    }

    fn read(&self, index: usize) -> Result<CubeMapFrame, SourceError> {
        let open = |p: &Path| -> Result<image::RgbImage, SourceError> {
            Ok(image::open(p)
                .map_err(|e| SourceError::image(p, e))?
                .to_rgb8())
        };
        let files = self.files(index);
        let frame = match self.layout {
            FaceLayout::Strip => CubeMapFrame::from_strip(&open(&files[0])?)?,
            FaceLayout::Faces => {
                let faces = [0, 1, 2, 3, 4, 5].map(|k| open(&files[k]));
                let faces = faces.into_iter().collect::<Result<Vec<_>, _>>()?;
                let faces: [image::RgbImage; 6] = faces.try_into().expect("six faces");
                CubeMapFrame::from_faces(&faces)?
            }
        };
        if frame.face_size() != self.face_size {
            return Err(SourceError::FaceSize {
                index,
                expected: self.face_size,
                found: frame.face_size(),
            });
        }
        Ok(frame)
    }
}

impl FrameSource for DiskFrames {
    fn len(&self) -> usize {
        self.paths.len()
    }

    fn face_size(&self) -> usize {
        self.face_size
    }

    fn frame(&self, index: usize) -> Result<Arc<CubeMapFrame>, SourceError> {
        if index >= self.paths.len() {
            return Err(SourceError::OutOfRange {
                index,
                len: self.paths.len(),
            });
        }
        self.cache.get_or_load(index, || self.read(index))
    }
}

/// Loads and validates a source sequence manifest. Frame pixels are read on
/// demand.
pub fn load_manifest(path: &Path) -> Result<SourceSequence, SourceError> {
    let text = std::fs::read_to_string(path).map_err(|source| SourceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let manifest: SourceManifest = serde_json::from_str(&text)
        .map_err(|e| SourceError::Manifest(format!("{}: {e}", path.display())))?;
    let root = path.parent().unwrap_or_else(|| Path::new("."));
    sequence_from_manifest(&manifest, root)
}

pub(crate) fn sequence_from_manifest(
    m: &SourceManifest,
    root: &Path,
) -> Result<SourceSequence, SourceError> {
    if m.face_size < 2 {
        return Err(SourceError::Format(format!(
            "face_size {} below 2",
            m.face_size
        )));
    }
    let ann_path = root.join(&m.annotations);
    let text = std::fs::read_to_string(&ann_path).map_err(|source| SourceError::Io {
        path: ann_path.clone(),
        source,
    })?;
    let track = parse_annotations::<f64>(&text)?;
    if track.len() != m.frame_count {
        return Err(SourceError::Consistency {
            frames: m.frame_count,
            annotations: track.len(),
        });
    }
    let paths = (0..m.frame_count)
        .map(|i| format_frame_path(&m.frame_pattern, m.first_index + i).map(|p| root.join(p)))
        .collect::<Result<Vec<_>, _>>()?;
    let frames = DiskFrames::new(paths, m.layout, m.face_size, DEFAULT_CACHE_FRAMES);
    frames.validate()?;
    Ok(SourceSequence::new(m.id.clone(), Arc::new(frames), track)?
        .with_attribute(m.attribute.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printf_patterns() {
        assert_eq!(format_frame_path("f/%05d.png", 7).unwrap(), "f/00007.png");
        assert_eq!(format_frame_path("%d.ppm", 12).unwrap(), "12.ppm");
        assert_eq!(format_frame_path("a%%b%3d", 4).unwrap(), "a%b  4");
        assert!(format_frame_path("none.png", 1).is_err());
        assert!(format_frame_path("%d_%d.png", 1).is_err());
    }

    #[test]
    fn face_suffix_before_extension() {
        assert_eq!(
            face_path(Path::new("x/00001.png"), Face::NegY),
            PathBuf::from("x/00001_ny.png")
        );
    }

    #[test]
    fn unknown_manifest_keys_rejected() {
        let json = r#"{"id":"a","face_size":4,"frame_pattern":"%d.png","frame_count":1,"annotations":"a.txt","bogus":1}"#;
        assert!(serde_json::from_str::<SourceManifest>(json).is_err());
    }
}
