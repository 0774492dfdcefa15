use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::scalar::{wrap_angle, Scalar};

/// A point on the unit sphere: azimuth `theta` in `[-pi, pi)` and
/// colatitude `rho` in `[0, pi]`, both in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalPoint<T> {
    theta: T,
    rho: T,
}

impl<T: Scalar> SphericalPoint<T> {
    /// Builds a point, wrapping `theta` and rejecting `rho` outside `[0, pi]`.
    pub fn new(theta: T, rho: T) -> Result<Self, GeometryError> {
        if !theta.is_finite() || !rho.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if rho < T::zero() || rho > T::PI() {
            return Err(GeometryError::RhoOutOfRange(rho.as_f64()));
        }
        Ok(Self {
            theta: wrap_angle(theta),
            rho,
        })
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn to_direction(&self) -> Direction<T> {
        spherical_to_direction(*self)
    }
}

/// Unit vector in the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction<T> {
    x: T,
    y: T,
    z: T,
}

impl<T: Scalar> Direction<T> {
    /// Normalizes `(x, y, z)` into a direction.
    pub fn new(x: T, y: T, z: T) -> Result<Self, GeometryError> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let n = (x * x + y * y + z * z).sqrt();
        if n <= T::min_positive_value() {
            return Err(GeometryError::ZeroVector);
        }
        Ok(Self {
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    pub fn from_array(v: [T; 3]) -> Result<Self, GeometryError> {
        Self::new(v[0], v[1], v[2])
    }

    pub fn x(&self) -> T {
        self.x
    }

    pub fn y(&self) -> T {
        self.y
    }

    pub fn z(&self) -> T {
        self.z
    }

    pub fn to_array(&self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Great-circle angle to `other`, stable for nearly parallel vectors.
    pub fn angle_to(&self, other: &Self) -> T {
        let cx = self.y * other.z - self.z * other.y;
        let cy = self.z * other.x - self.x * other.z;
        let cz = self.x * other.y - self.y * other.x;
        let cross = (cx * cx + cy * cy + cz * cz).sqrt();
        cross.atan2(self.dot(other))
    }

    pub fn to_spherical(&self) -> SphericalPoint<T> {
        direction_to_spherical(*self)
    }
}

pub fn spherical_to_direction<T: Scalar>(p: SphericalPoint<T>) -> Direction<T> {
    let (st, ct) = p.theta.sin_cos();
    let (sr, cr) = p.rho.sin_cos();
    Direction {
        x: sr * ct,
        y: sr * st,
        z: cr,
    }
}

/// Inverse of [`spherical_to_direction`]. Poles map to `theta = 0`.
pub fn direction_to_spherical<T: Scalar>(d: Direction<T>) -> SphericalPoint<T> {
    let planar = (d.x * d.x + d.y * d.y).sqrt();
    let rho = planar.atan2(d.z);
    let theta = if planar == T::zero() {
        T::zero()
    } else {
        wrap_angle(d.y.atan2(d.x))
    };
    SphericalPoint { theta, rho }
}
