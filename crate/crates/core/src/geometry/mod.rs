//! Spherical and pinhole geometry.
//!
//! World frame: right-handed, polar axis `+Z` up. A spherical point
//! `(theta, rho)` (azimuth, colatitude) maps to
//! `(sin rho cos theta, sin rho sin theta, cos rho)`.
//!
//! The identity camera looks along `+X`. Camera coordinates are
//! `x` forward, `y` right, `z` down, and a direction with camera coordinates
//! `(x, y, z)`, `x > 0`, lands on pixel `(cx + f y / x, cy + f z / x)` where
//! the principal point is `((w - 1) / 2, (h - 1) / 2)`.

mod camera;
mod polygon;
mod sphere;

pub use camera::{backproject_pixel, camera_rotation, project_direction, CameraState, Mat3};
pub(crate) use polygon::shoelace;
pub use polygon::{project_region, ImagePoint, ImagePolygon, ProjectionFailure};
pub use sphere::{direction_to_spherical, spherical_to_direction, Direction, SphericalPoint};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("polar angle {0} outside [0, pi]")]
    RhoOutOfRange(f64),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("zero-length direction vector")]
    ZeroVector,
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
}
