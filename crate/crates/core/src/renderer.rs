//! Pinhole views of cube-map frames and on-the-fly viewpoint sequences.

use image::RgbImage;
use thiserror::Error;

use crate::controllers::{
    derive_seed, Controller, ControllerError, ControllerState, MotionPattern,
};
use crate::geometry::{project_region, CameraState, ImagePolygon};
use crate::spherevideo::{CubeMapFrame, SourceError, SourceSequence};

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("frame {frame}: {source}")]
    Controller {
        frame: usize,
        #[source]
        source: ControllerError,
    },
    #[error("pattern rejected: {0}")]
    Pattern(#[source] ControllerError),
    #[error("frame {frame}: ground truth does not project to a valid polygon")]
    Projection { frame: usize },
    #[error("frame {frame} out of range (length {len})")]
    OutOfRange { frame: usize, len: usize },
    #[error(transparent)]
    Source(#[from] SourceError),
}

/// Renders the pinhole view of `frame` seen by `camera`. Pixel `(i, j)` is
/// sampled along the ray through its center; colours are rounded half up.
pub fn render_viewpoint(frame: &CubeMapFrame, camera: &CameraState<f64>) -> RgbImage {
    let view = camera.view();
    let (w, h) = (camera.width, camera.height);
    let mut out = vec![0u8; (w as usize) * (h as usize) * 3];
    for (j, row) in out.chunks_exact_mut(w as usize * 3).enumerate() {
        for (i, px) in row.chunks_exact_mut(3).enumerate() {
            let c = frame.sample_255(view.ray(i as f64, j as f64));
            for (o, v) in px.iter_mut().zip(c) {
                *o = (v + 0.5).floor().clamp(0.0, 255.0) as u8;
            }
        }
    }
    RgbImage::from_raw(w, h, out).expect("buffer matches dimensions")
}

/// One frame of a viewpoint sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewpointFrame {
    pub index: usize,
    /// Absent when the frame was generated without pixels.
    pub image: Option<RgbImage>,
    pub gt: ImagePolygon<f64>,
    pub camera: CameraState<f64>,
}

/// Viewpoint sequence of one source under one motion pattern.
///
/// Frames are generated on demand and any index can be produced in
/// isolation; the result does not depend on access order.
#[derive(Debug, Clone)]
pub struct SequenceGenerator {
    source: SourceSequence,
    controller: Controller,
    seed: u64,
}

impl SequenceGenerator {
    pub fn new(
        source: SourceSequence,
        pattern: MotionPattern,
        width: u32,
        height: u32,
    ) -> Result<Self, RenderError> {
        let controller = Controller::new(pattern, width, height).map_err(RenderError::Pattern)?;
        let seed = derive_seed(pattern.params.seed, &[source.id()]);
        Ok(Self {
            source,
            controller,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    pub fn source(&self) -> &SourceSequence {
        &self.source
    }

    pub fn pattern(&self) -> &MotionPattern {
        self.controller.pattern()
    }

    pub fn size(&self) -> (u32, u32) {
        self.controller.size()
    }

    /// Seed of the controller noise stream for this (source, pattern) pair.
    pub fn controller_seed(&self) -> u64 {
        self.seed
    }

    pub fn camera(&self, t: usize) -> Result<CameraState<f64>, RenderError> {
        let region = self.source.track().get(t).ok_or(RenderError::OutOfRange {
            frame: t,
            len: self.len(),
        })?;
        let mut state = ControllerState::new(self.seed);
        self.controller
            .step(region, t, &mut state)
            .map_err(|source| RenderError::Controller { frame: t, source })
    }

    pub fn frame(&self, t: usize, render: bool) -> Result<ViewpointFrame, RenderError> {
        let camera = self.camera(t)?;
        let region = &self.source.track().regions()[t];
        let gt =
            project_region(region, &camera).map_err(|_| RenderError::Projection { frame: t })?;
        let image = if render {
            let frame = self.source.frame(t)?;
            Some(render_viewpoint(&frame, &camera))
        } else {
            None
        };
        Ok(ViewpointFrame {
            index: t,
            image,
            gt,
            camera,
        })
    }

    pub fn iter(
        &self,
        render: bool,
    ) -> impl Iterator<Item = Result<ViewpointFrame, RenderError>> + '_ {
        (0..self.len()).map(move |t| self.frame(t, render))
    }

    /// Checks every frame's camera up front so infeasibility surfaces before
    /// evaluation starts.
    pub fn check_feasible(&self) -> Result<(), RenderError> {
        (0..self.len()).try_for_each(|t| self.camera(t).map(|_| ()))
    }
}

pub fn generate_sequence(
    source: SourceSequence,
    pattern: MotionPattern,
    width: u32,
    height: u32,
) -> Result<SequenceGenerator, RenderError> {
    SequenceGenerator::new(source, pattern, width, height)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::Variant;
    use crate::synthetic::SyntheticSpec;

    #[test]
    fn constant_cubemap_renders_constant() {
        let frame = CubeMapFrame::uniform(8, [17, 99, 230]).unwrap();
        let cam = CameraState::new(0.3, -0.4, 1.0, 90.0, 64, 48).unwrap();
        let img = render_viewpoint(&frame, &cam);
        assert!(img.pixels().all(|p| p.0 == [17, 99, 230]));
    }

    #[test]
    fn narrow_view_stays_on_front_face() {
        let colors: [[u8; 3]; 6] = [
            [200, 0, 0],
            [0, 200, 0],
            [0, 0, 200],
            [9, 9, 9],
            [50, 50, 50],
            [90, 90, 90],
        ];
        let data = colors.iter().flat_map(|c| c.repeat(16 * 16)).collect();
        let frame = CubeMapFrame::from_raw(16, data).unwrap();
        // 64 px wide at f = 64 gives well under 90 degrees of field of view
        let cam = CameraState::looking_forward(64.0, 64, 64).unwrap();
        let img = render_viewpoint(&frame, &cam);
        assert!(img.pixels().all(|p| p.0 == [200, 0, 0]));
    }

    #[test]
    fn generator_length_and_random_access() {
        let src = SyntheticSpec {
            frames: 12,
            face_size: 32,
            ..Default::default()
        }
        .build()
        .unwrap();
        let mut big = MotionPattern::with_defaults(Variant::Eb);
        big.params.target_diagonal = 110.0;
        let gen = SequenceGenerator::new(src, big, 160, 120).unwrap_err();
        assert!(matches!(gen, RenderError::Pattern(_)));

        let src = SyntheticSpec {
            frames: 12,
            face_size: 32,
            ..Default::default()
        }
        .build()
        .unwrap();
        let gen = SequenceGenerator::new(
            src,
            MotionPattern::with_defaults(Variant::EnSmall),
            320,
            240,
        )
        .unwrap();
        let streamed: Vec<_> = gen.iter(true).map(Result::unwrap).collect();
        assert_eq!(streamed.len(), 12);
        for t in [7, 0, 11, 3] {
            assert_eq!(gen.frame(t, true).unwrap(), streamed[t]);
        }
    }
}
