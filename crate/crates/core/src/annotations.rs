//! Viewpoint-agnostic ground truth: four-corner regions on the sphere.
//!
//! Annotation files are UTF-8 text with one region per line, eight
//! comma-separated radians `theta1,rho1,...,theta4,rho4`. Corners are
//! ordered top-left, top-right, bottom-right, bottom-left as seen from a
//! camera centered on the target. Lines starting with `#` are comments.

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{Direction, GeometryError, Mat3, SphericalPoint};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnnotationError {
    #[error("line {line}: expected 8 fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: field {field} is not a number: {text:?}")]
    NotANumber {
        line: usize,
        field: usize,
        text: String,
    },
    #[error("line {line}: {source}")]
    Coordinate { line: usize, source: GeometryError },
    #[error("line {line}: {reason}")]
    InvalidRegion { line: usize, reason: String },
    #[error("invalid region: {0}")]
    Region(String),
    #[error("degenerate region: corner mean has norm {0:e}")]
    Degenerate(f64),
    #[error("annotation track is empty")]
    Empty,
}

/// Four corners on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalRegion<T> {
    corners: [SphericalPoint<T>; 4],
    directions: [Direction<T>; 4],
}

impl<T: Scalar> SphericalRegion<T> {
    /// Validates that no two corners are antipodal and that the region spans
    /// less than a quarter turn.
    pub fn new(corners: [SphericalPoint<T>; 4]) -> Result<Self, AnnotationError> {
        let directions = corners.map(|c| c.to_direction());
        let limit = T::FRAC_PI_2();
        for i in 0..4 {
            for j in (i + 1)..4 {
                let a = directions[i].angle_to(&directions[j]);
                if a >= limit {
                    return Err(AnnotationError::Region(format!(
                        "corners {} and {} are {:.4} rad apart (limit pi/2)",
                        i + 1,
                        j + 1,
                        a.as_f64()
                    )));
                }
            }
        }
        Ok(Self {
            corners,
            directions,
        })
    }

    pub fn from_directions(dirs: [Direction<T>; 4]) -> Result<Self, AnnotationError> {
        Self::new(dirs.map(|d| d.to_spherical()))
    }

    /// Region spanned in the tangent plane of `center`.
    ///
    /// `half_width`/`half_height` are tangent-plane half extents (the tangent
    /// of the angular half size) along the local east and north directions,
    /// and `spin` turns the rectangle about `center` (positive turns the top
    /// edge toward east).
    pub fn from_tangent_rect(
        center: SphericalPoint<T>,
        half_width: T,
        half_height: T,
        spin: T,
    ) -> Result<Self, AnnotationError> {
        let c = center.to_direction().to_array();
        let (st, ct) = center.theta().sin_cos();
        let (sr, cr) = center.rho().sin_cos();
        let east = [-st, ct, T::zero()];
        let north = [-cr * ct, -cr * st, sr];
        let (ss, cs) = spin.sin_cos();
        let offsets = [
            (-half_width, half_height),
            (half_width, half_height),
            (half_width, -half_height),
            (-half_width, -half_height),
        ];
        let mut dirs = [center.to_direction(); 4];
        for (d, (x, y)) in dirs.iter_mut().zip(offsets) {
            // clockwise spin in the (east, north) plane
            let xe = cs * x + ss * y;
            let yn = -ss * x + cs * y;
            let v = [0, 1, 2].map(|k| c[k] + xe * east[k] + yn * north[k]);
            *d = Direction::from_array(v).map_err(|e| AnnotationError::Region(e.to_string()))?;
        }
        Self::from_directions(dirs)
    }

    pub fn corners(&self) -> &[SphericalPoint<T>; 4] {
        &self.corners
    }

    pub fn directions(&self) -> &[Direction<T>; 4] {
        &self.directions
    }

    /// Normalized mean of the corner directions.
    pub fn center_direction(&self) -> Result<Direction<T>, AnnotationError> {
        let mut sum = [T::zero(); 3];
        for d in &self.directions {
            for (s, v) in sum.iter_mut().zip(d.to_array()) {
                *s = *s + v;
            }
        }
        let quarter = T::lit(0.25);
        let mean = sum.map(|s| s * quarter);
        let norm = (mean[0] * mean[0] + mean[1] * mean[1] + mean[2] * mean[2]).sqrt();
        if norm < T::lit(1e-6) {
            return Err(AnnotationError::Degenerate(norm.as_f64()));
        }
        Direction::from_array(mean).map_err(|_| AnnotationError::Degenerate(norm.as_f64()))
    }

    pub fn center(&self) -> Result<SphericalPoint<T>, AnnotationError> {
        Ok(self.center_direction()?.to_spherical())
    }

    /// Larger of the great-circle angles between corners 1-3 and 2-4.
    pub fn angular_diagonal(&self) -> T {
        let d = &self.directions;
        d[0].angle_to(&d[2]).max(d[1].angle_to(&d[3]))
    }

    /// Applies a world rotation to every corner.
    pub fn rotated(&self, r: &Mat3<T>) -> Result<Self, AnnotationError> {
        let dirs = self.directions.map(|d| {
            Direction::from_array(r.apply(d.to_array())).expect("rotation preserves norm")
        });
        Self::from_directions(dirs)
    }
}

pub fn region_center<T: Scalar>(
    a: &SphericalRegion<T>,
) -> Result<SphericalPoint<T>, AnnotationError> {
    a.center()
}

pub fn region_angular_diagonal<T: Scalar>(a: &SphericalRegion<T>) -> T {
    a.angular_diagonal()
}

/// Per-frame ground truth of one source sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthTrack<T> {
    regions: Vec<SphericalRegion<T>>,
}

impl<T: Scalar> GroundTruthTrack<T> {
    pub fn new(regions: Vec<SphericalRegion<T>>) -> Result<Self, AnnotationError> {
        if regions.is_empty() {
            return Err(AnnotationError::Empty);
        }
        Ok(Self { regions })
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn get(&self, t: usize) -> Option<&SphericalRegion<T>> {
        self.regions.get(t)
    }

    pub fn regions(&self) -> &[SphericalRegion<T>] {
        &self.regions
    }
}

pub fn parse_annotations<T: Scalar>(text: &str) -> Result<GroundTruthTrack<T>, AnnotationError> {
    let mut regions = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 8 {
            return Err(AnnotationError::FieldCount {
                line,
                found: fields.len(),
            });
        }
        let mut values = [0.0_f64; 8];
        for (i, (slot, text)) in values.iter_mut().zip(&fields).enumerate() {
            *slot = text.parse().map_err(|_| AnnotationError::NotANumber {
                line,
                field: i + 1,
                text: text.to_string(),
            })?;
        }
        let mut corners = [SphericalPoint::new(T::zero(), T::zero()).expect("origin"); 4];
        for (k, c) in corners.iter_mut().enumerate() {
            *c = SphericalPoint::new(T::lit(values[2 * k]), T::lit(values[2 * k + 1]))
                .map_err(|source| AnnotationError::Coordinate { line, source })?;
        }
        let region = SphericalRegion::new(corners).map_err(|e| AnnotationError::InvalidRegion {
            line,
            reason: e.to_string(),
        })?;
        regions.push(region);
    }
    GroundTruthTrack::new(regions)
}

/// Writes a track in the annotation file format.
pub fn serialize_annotations<T: Scalar + std::fmt::Display>(track: &GroundTruthTrack<T>) -> String {
    let mut out = String::new();
    for region in track.regions() {
        let mut first = true;
        for c in region.corners() {
            for v in [c.theta(), c.rho()] {
                if !first {
                    out.push(',');
                }
                first = false;
                let _ = write!(out, "{v}");
            }
        }
        out.push('\n');
    }
    out
}
