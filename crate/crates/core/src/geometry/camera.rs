use serde::{Deserialize, Serialize};

use super::{Direction, GeometryError, ImagePoint};
use crate::scalar::Scalar;

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

impl<T: Scalar> Mat3<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Mat3([[o, z, z], [z, o, z], [z, z, o]])
    }

    /// Rotation about `+X` by `a` (right-hand rule).
    pub fn rot_x(a: T) -> Self {
        let (s, c) = a.sin_cos();
        let (o, z) = (T::one(), T::zero());
        Mat3([[o, z, z], [z, c, -s], [z, s, c]])
    }

    pub fn rot_y(a: T) -> Self {
        let (s, c) = a.sin_cos();
        let (o, z) = (T::one(), T::zero());
        Mat3([[c, z, s], [z, o, z], [-s, z, c]])
    }

    pub fn rot_z(a: T) -> Self {
        let (s, c) = a.sin_cos();
        let (o, z) = (T::one(), T::zero());
        Mat3([[c, -s, z], [s, c, z], [z, z, o]])
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = [[T::zero(); 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).fold(T::zero(), |acc, k| acc + self.0[i][k] * rhs.0[k][j]);
            }
        }
        Mat3(out)
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn apply(&self, v: [T; 3]) -> [T; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// Applies the transpose (the inverse, for rotations).
    pub fn apply_transpose(&self, v: [T; 3]) -> [T; 3] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
            m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
            m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
        ]
    }

    pub fn determinant(&self) -> T {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

/// Virtual pinhole camera `[alpha, beta, gamma, f]` plus image size.
///
/// `alpha` is yaw about world `+Z` (toward increasing azimuth), `beta` is
/// pitch (positive tilts the optical axis toward `+Z`) and `gamma` is roll
/// about the optical axis (positive turns the camera clockwise, so image
/// content turns the other way).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraState<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub f: T,
    pub width: u32,
    pub height: u32,
}

impl<T: Scalar> CameraState<T> {
    pub fn new(
        alpha: T,
        beta: T,
        gamma: T,
        f: T,
        width: u32,
        height: u32,
    ) -> Result<Self, GeometryError> {
        let cam = Self {
            alpha,
            beta,
            gamma,
            f,
            width,
            height,
        };
        cam.validate()?;
        Ok(cam)
    }

    /// Identity orientation looking along `+X`.
    pub fn looking_forward(f: T, width: u32, height: u32) -> Result<Self, GeometryError> {
        Self::new(T::zero(), T::zero(), T::zero(), f, width, height)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let angles_ok = self.alpha.is_finite() && self.beta.is_finite() && self.gamma.is_finite();
        if !angles_ok || !self.f.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if self.f <= T::zero() {
            return Err(GeometryError::InvalidCamera(format!(
                "focal length must be positive, got {:?}",
                self.f
            )));
        }
        if self.width < 2 || self.height < 2 {
            return Err(GeometryError::InvalidCamera(format!(
                "image must be at least 2x2, got {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }

    pub fn principal_point(&self) -> ImagePoint<T> {
        ImagePoint::new(
            (T::lit(self.width as f64) - T::one()) / T::lit(2.0),
            (T::lit(self.height as f64) - T::one()) / T::lit(2.0),
        )
    }

    pub fn with_focal(mut self, f: T) -> Self {
        self.f = f;
        self
    }

    pub fn with_roll(mut self, gamma: T) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn rotation(&self) -> Mat3<T> {
        camera_rotation(self)
    }

    /// Whether `p` lies inside the image shrunk by `margin` on every side.
    pub fn contains(&self, p: &ImagePoint<T>, margin: T) -> bool {
        let max_u = T::lit(self.width as f64) - T::one() - margin;
        let max_v = T::lit(self.height as f64) - T::one() - margin;
        p.u >= margin && p.u <= max_u && p.v >= margin && p.v <= max_v
    }

    /// Projection context with the rotation evaluated once.
    pub fn view(&self) -> PinholeView<T> {
        let pp = self.principal_point();
        PinholeView {
            rotation: self.rotation(),
            f: self.f,
            cx: pp.u,
            cy: pp.v,
        }
    }
}

/// Rotation taking world vectors into the camera's (forward, right, up)
/// basis: `Roll(gamma) * Pitch(beta) * Yaw(alpha)`.
///
/// The returned matrix is a proper rotation. Camera coordinates with `z`
/// pointing down are obtained by negating its third output component.
pub fn camera_rotation<T: Scalar>(c: &CameraState<T>) -> Mat3<T> {
    Mat3::rot_x(c.gamma)
        .mul(&Mat3::rot_y(c.beta))
        .mul(&Mat3::rot_z(-c.alpha))
}

/// Cached projection parameters of one camera state.
#[derive(Debug, Clone, Copy)]
pub struct PinholeView<T> {
    pub rotation: Mat3<T>,
    pub f: T,
    pub cx: T,
    pub cy: T,
}

impl<T: Scalar> PinholeView<T> {
    /// Camera coordinates (forward, right, down) of a world vector.
    #[inline]
    pub fn to_camera(&self, v: [T; 3]) -> [T; 3] {
        let r = self.rotation.apply(v);
        [r[0], r[1], -r[2]]
    }

    #[inline]
    pub fn project(&self, d: &Direction<T>) -> Option<ImagePoint<T>> {
        let [x, y, z] = self.to_camera(d.to_array());
        if x > T::zero() {
            Some(ImagePoint::new(
                self.cx + self.f * y / x,
                self.cy + self.f * z / x,
            ))
        } else {
            None
        }
    }

    /// Unnormalized world ray through pixel `(u, v)`.
    #[inline]
    pub fn ray(&self, u: T, v: T) -> [T; 3] {
        let y = (u - self.cx) / self.f;
        let z = (v - self.cy) / self.f;
        self.rotation.apply_transpose([T::one(), y, -z])
    }

    pub fn backproject(&self, p: &ImagePoint<T>) -> Direction<T> {
        // the forward component is 1, so the ray is never zero
        Direction::from_array(self.ray(p.u, p.v)).expect("finite pixel")
    }
}

/// Projects a world direction, or `None` when it is behind the camera.
pub fn project_direction<T: Scalar>(d: &Direction<T>, c: &CameraState<T>) -> Option<ImagePoint<T>> {
    c.view().project(d)
}

/// World direction of the ray through pixel `p` (continuous, pixel-center
/// addressing).
pub fn backproject_pixel<T: Scalar>(p: &ImagePoint<T>, c: &CameraState<T>) -> Direction<T> {
    c.view().backproject(p)
}
