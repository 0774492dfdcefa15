use serde::{Deserialize, Serialize};

use super::{CameraState, GeometryError};
use crate::annotations::SphericalRegion;
use crate::scalar::Scalar;

/// Continuous pixel coordinates. May lie outside the image.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ImagePoint<T> {
    pub u: T,
    pub v: T,
}

impl<T: Scalar> ImagePoint<T> {
    pub fn new(u: T, v: T) -> Self {
        Self { u, v }
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.u - other.u).hypot(self.v - other.v)
    }

    /// Rotates by `angle` about `center` with the usual
    /// `[[cos, -sin], [sin, cos]]` matrix applied to `(u, v)`. With `v`
    /// pointing down a positive angle is clockwise on screen.
    pub fn rotated_about(&self, center: &Self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let (du, dv) = (self.u - center.u, self.v - center.v);
        Self::new(center.u + c * du - s * dv, center.v + s * du + c * dv)
    }
}

/// Four-point image region, vertices in annotation order
/// (top-left, top-right, bottom-right, bottom-left).
///
/// Upright regions have positive signed area in `(u, v)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagePolygon<T> {
    vertices: [ImagePoint<T>; 4],
}

impl<T: Scalar> ImagePolygon<T> {
    /// Validates finiteness, non-zero area and absence of self-intersection.
    pub fn new(vertices: [ImagePoint<T>; 4]) -> Result<Self, GeometryError> {
        if vertices
            .iter()
            .any(|p| !p.u.is_finite() || !p.v.is_finite())
        {
            return Err(GeometryError::NonFinite);
        }
        let poly = Self { vertices };
        if poly.signed_area().abs() <= T::epsilon() {
            return Err(GeometryError::InvalidPolygon("zero area".into()));
        }
        if poly.self_intersects() {
            return Err(GeometryError::InvalidPolygon("self-intersecting".into()));
        }
        Ok(poly)
    }

    /// Axis-aligned rectangle `(x, y, w, h)` as a polygon.
    pub fn from_rect(x: T, y: T, w: T, h: T) -> Result<Self, GeometryError> {
        Self::new([
            ImagePoint::new(x, y),
            ImagePoint::new(x + w, y),
            ImagePoint::new(x + w, y + h),
            ImagePoint::new(x, y + h),
        ])
    }

    pub fn vertices(&self) -> &[ImagePoint<T>; 4] {
        &self.vertices
    }

    pub fn signed_area(&self) -> T {
        shoelace(&self.vertices)
    }

    pub fn area(&self) -> T {
        self.signed_area().abs()
    }

    /// Mean of the four vertices.
    pub fn vertex_mean(&self) -> ImagePoint<T> {
        let q = T::lit(0.25);
        let (su, sv) = self
            .vertices
            .iter()
            .fold((T::zero(), T::zero()), |(a, b), p| (a + p.u, b + p.v));
        ImagePoint::new(su * q, sv * q)
    }

    /// Longer of the two corner-pair distances (1-3 and 2-4).
    pub fn diagonal(&self) -> T {
        let v = &self.vertices;
        v[0].distance(&v[2]).max(v[1].distance(&v[3]))
    }

    pub fn is_inside(&self, camera: &CameraState<T>, margin: T) -> bool {
        self.vertices.iter().all(|p| camera.contains(p, margin))
    }

    pub fn map(&self, f: impl Fn(&ImagePoint<T>) -> ImagePoint<T>) -> Result<Self, GeometryError> {
        Self::new([
            f(&self.vertices[0]),
            f(&self.vertices[1]),
            f(&self.vertices[2]),
            f(&self.vertices[3]),
        ])
    }

    pub fn is_convex(&self) -> bool {
        let v = &self.vertices;
        let mut sign = 0;
        for i in 0..4 {
            let (a, b, c) = (v[i], v[(i + 1) % 4], v[(i + 2) % 4]);
            let cross = (b.u - a.u) * (c.v - b.v) - (b.v - a.v) * (c.u - b.u);
            let s = if cross > T::zero() {
                1
            } else if cross < T::zero() {
                -1
            } else {
                0
            };
            if s != 0 {
                if sign != 0 && s != sign {
                    return false;
                }
                sign = s;
            }
        }
        true
    }

    fn self_intersects(&self) -> bool {
        let v = &self.vertices;
        segments_cross(&v[0], &v[1], &v[2], &v[3]) || segments_cross(&v[1], &v[2], &v[3], &v[0])
    }
}

pub(crate) fn shoelace<T: Scalar>(pts: &[ImagePoint<T>]) -> T {
    let n = pts.len();
    if n < 3 {
        return T::zero();
    }
    let twice = (0..n).fold(T::zero(), |acc, i| {
        let (a, b) = (&pts[i], &pts[(i + 1) % n]);
        acc + a.u * b.v - b.u * a.v
    });
    twice * T::lit(0.5)
}

fn orient<T: Scalar>(a: &ImagePoint<T>, b: &ImagePoint<T>, c: &ImagePoint<T>) -> T {
    (b.u - a.u) * (c.v - a.v) - (b.v - a.v) * (c.u - a.u)
}

// Proper crossing only; shared endpoints and collinear touching do not count.
fn segments_cross<T: Scalar>(
    a: &ImagePoint<T>,
    b: &ImagePoint<T>,
    c: &ImagePoint<T>,
    d: &ImagePoint<T>,
) -> bool {
    let d1 = orient(a, b, c);
    let d2 = orient(a, b, d);
    let d3 = orient(c, d, a);
    let d4 = orient(c, d, b);
    let z = T::zero();
    ((d1 > z && d2 < z) || (d1 < z && d2 > z)) && ((d3 > z && d4 < z) || (d3 < z && d4 > z))
}

/// Why a spherical region has no valid image polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionFailure {
    /// A corner is at or behind the camera plane.
    Behind,
    /// The projected corners do not form a simple quadrilateral.
    Degenerate,
}

/// Projects the four corners of `region`, preserving their order.
pub fn project_region<T: Scalar>(
    region: &SphericalRegion<T>,
    camera: &CameraState<T>,
) -> Result<ImagePolygon<T>, ProjectionFailure> {
    let view = camera.view();
    let mut pts = [ImagePoint::default(); 4];
    for (p, corner) in pts.iter_mut().zip(region.directions().iter()) {
        *p = view.project(corner).ok_or(ProjectionFailure::Behind)?;
    }
    ImagePolygon::new(pts).map_err(|_| ProjectionFailure::Degenerate)
}
