//! Camera controller: maps the spherical ground truth of a frame, a motion
//! pattern and the frame index to a camera state.

mod noise;
mod pattern;
mod solver;

use thiserror::Error;

pub use noise::{derive_seed, NoiseStream};
pub use pattern::{MotionPattern, PatternClass, PatternConfig, PatternParams, Variant};
pub use solver::{enforce_visibility, solve_focal_for_diagonal, solve_orientation};

use crate::annotations::{AnnotationError, SphericalRegion};
use crate::geometry::{CameraState, GeometryError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControllerError {
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("{what} solver did not converge (residual {residual:.3e} px)")]
    Solver { what: &'static str, residual: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error(transparent)]
    Region(#[from] AnnotationError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

const COUPLED_ITERATIONS: usize = 50;

/// Where the pattern wants the target at frame `t`, before visibility
/// enforcement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NominalPose {
    /// Target center offset from the principal point, pixels.
    pub offset: (f64, f64),
    pub roll: f64,
    pub diagonal: f64,
}

/// Mutable per-sequence controller state.
///
/// The noise generator is counter-addressed by frame index, so the state at
/// any `t` is a pure function of the seed and `t`.
#[derive(Debug, Clone)]
pub struct ControllerState {
    noise: NoiseStream,
    last_camera: Option<CameraState<f64>>,
}

impl ControllerState {
    pub fn new(seed: u64) -> Self {
        Self {
            noise: NoiseStream::new(seed),
            last_camera: None,
        }
    }

    pub fn last_camera(&self) -> Option<&CameraState<f64>> {
        self.last_camera.as_ref()
    }

    pub fn seed(&self) -> u64 {
        self.noise.seed()
    }
}

/// A motion pattern bound to an output image size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controller {
    pattern: MotionPattern,
    width: u32,
    height: u32,
}

impl Controller {
    /// Checks that the pattern can be realized at this image size.
    pub fn new(pattern: MotionPattern, width: u32, height: u32) -> Result<Self, ControllerError> {
        pattern.params.validate()?;
        if width < 2 || height < 2 {
            return Err(ControllerError::InvalidPattern(format!(
                "image size {width}x{height}"
            )));
        }
        let p = &pattern.params;
        let min_side = width.min(height) as f64;
        let max_diag = pattern.max_diagonal();
        if max_diag + 2.0 * p.margin > min_side {
            return Err(ControllerError::Infeasible(format!(
                "{}: diagonal {max_diag:.1} px with margin {} does not fit {width}x{height}",
                pattern.name(),
                p.margin
            )));
        }
        let radius = match pattern.class() {
            PatternClass::DisplacedRotation => p.displacement * min_side,
            PatternClass::PlanarMotion => p.orbit_radius * min_side,
            _ => 0.0,
        };
        let half_side = (min_side - 1.0) / 2.0;
        if radius + max_diag / 2.0 + p.margin > half_side {
            return Err(ControllerError::Infeasible(format!(
                "{}: offset {radius:.1} px puts the target outside the {width}x{height} view",
                pattern.name()
            )));
        }
        Ok(Self {
            pattern,
            width,
            height,
        })
    }

    pub fn pattern(&self) -> &MotionPattern {
        &self.pattern
    }

    pub fn size(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    /// Pattern law evaluated at frame `t`.
    pub fn nominal(&self, t: usize, state: &ControllerState) -> NominalPose {
        use std::f64::consts::TAU;
        let p = &self.pattern.params;
        let tf = t as f64;
        let min_side = self.width.min(self.height) as f64;
        let mut pose = NominalPose {
            offset: (0.0, 0.0),
            roll: 0.0,
            diagonal: p.target_diagonal,
        };
        match self.pattern.class() {
            PatternClass::Stabilized => {}
            PatternClass::CenteredRotation => pose.roll = tf * p.roll_rate,
            PatternClass::DisplacedRotation => {
                let gamma = tf * p.roll_rate;
                let d = p.displacement * min_side;
                // the offset turns with the image content, opposite to the roll
                pose.offset = (d * gamma.cos(), -d * gamma.sin());
                pose.roll = gamma;
            }
            PatternClass::ScaleChange => {
                pose.diagonal = p.target_diagonal
                    * (1.0 + p.scale_amplitude * (TAU * tf / p.scale_period).cos());
            }
            PatternClass::PlanarMotion => {
                let r = p.orbit_radius * min_side;
                let phase = TAU * tf / p.orbit_period;
                pose.offset = (r * phase.cos(), r * phase.sin());
            }
            PatternClass::TranslationNoise => {
                let (a, b) = state.noise.normal_pair(t as u64);
                pose.offset = (p.noise_sigma * a, p.noise_sigma * b);
            }
        }
        pose
    }

    /// Camera for frame `t` showing `region`.
    pub fn step(
        &self,
        region: &SphericalRegion<f64>,
        t: usize,
        state: &mut ControllerState,
    ) -> Result<CameraState<f64>, ControllerError> {
        let pose = self.nominal(t, state);
        let cam = self.realize(region, &pose)?;
        let cam = enforce_visibility(&cam, region, self.pattern.params.margin)?;
        state.last_camera = Some(cam);
        Ok(cam)
    }

    /// Solves orientation and focal length jointly for a nominal pose.
    pub fn realize(
        &self,
        region: &SphericalRegion<f64>,
        pose: &NominalPose,
    ) -> Result<CameraState<f64>, ControllerError> {
        let center = region.center()?;
        let delta = region.angular_diagonal();
        if !(delta > 0.0) {
            return Err(ControllerError::Precondition(
                "region has zero angular size".into(),
            ));
        }
        let mut f = pose.diagonal / (2.0 * (delta / 2.0).tan());
        let base = CameraState::looking_forward(f, self.width, self.height)?;
        // Fixed point of g(f) = focal solve after re-orienting at f. Plain
        // iteration contracts slowly for large off-center targets, so steps
        // use the secant on h(f) = g(f) - f once two samples exist.
        let g = |f: f64| -> Result<f64, ControllerError> {
            let cam = solve_orientation(&center, pose.offset, pose.roll, &base.with_focal(f))?;
            solve_focal_for_diagonal(region, &cam, pose.diagonal)
        };
        let mut converged = false;
        let mut prev: Option<(f64, f64)> = None;
        for _ in 0..COUPLED_ITERATIONS {
            let h = g(f)? - f;
            if h.abs() <= 1e-12 * f {
                f += h;
                converged = true;
                break;
            }
            let step = match prev {
                Some((f0, h0)) if h != h0 => -h * (f - f0) / (h - h0),
                _ => h,
            };
            prev = Some((f, h));
            f += step;
            if !(f > 0.0 && f.is_finite()) {
                break;
            }
        }
        if !converged {
            return Err(ControllerError::Solver {
                what: "joint orientation/focal",
                residual: f64::NAN,
            });
        }
        solve_orientation(&center, pose.offset, pose.roll, &base.with_focal(f))
    }
}

/// Free-function form of [`Controller::step`].
pub fn controller_step(
    controller: &Controller,
    region: &SphericalRegion<f64>,
    t: usize,
    state: &mut ControllerState,
) -> Result<CameraState<f64>, ControllerError> {
    controller.step(region, t, state)
}
