//! Procedural source sequences for tests, self-checks and demos.
//!
//! The scene is a smooth colour field on the sphere (static over time) and the
//! target is a tangent-plane rectangle drifting along the sphere while its
//! angular size oscillates.

use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::annotations::{serialize_annotations, GroundTruthTrack, SphericalRegion};
use crate::geometry::{Direction, SphericalPoint};
use crate::spherevideo::{
    CubeMapFrame, FaceLayout, InMemoryFrames, SourceError, SourceManifest, SourceSequence,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSpec {
    pub id: String,
    pub frames: usize,
    pub face_size: usize,
    /// Seeds the scene phases.
    pub seed: u64,
    /// Initial target azimuth and colatitude.
    pub theta0: f64,
    pub rho0: f64,
    /// Azimuth drift per frame.
    pub theta_rate: f64,
    /// Colatitude oscillation amplitude and period.
    pub rho_amplitude: f64,
    pub rho_period: f64,
    /// Tangent-plane half diagonal at nominal size.
    pub half_diagonal: f64,
    /// Relative angular size variation (0.5 means +-50%).
    pub size_variation: f64,
    pub size_period: f64,
    /// Width/height ratio of the target rectangle.
    pub aspect: f64,
    /// In-plane spin per frame.
    pub spin_rate: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            id: "synthetic".into(),
            frames: 100,
            face_size: 128,
            seed: 0,
            theta0: 0.3,
            rho0: 1.45,
            theta_rate: 0.004,
            rho_amplitude: 0.1,
            rho_period: 150.0,
            half_diagonal: 0.06,
            size_variation: 0.5,
            size_period: 120.0,
            aspect: 1.4,
            spin_rate: 0.0,
        }
    }
}

impl SyntheticSpec {
    /// Three stock sources with different motion on the sphere.
    pub fn stock(frames: usize, face_size: usize) -> Vec<SyntheticSpec> {
        vec![
            SyntheticSpec {
                id: "syn-drift".into(),
                frames,
                face_size,
                seed: 1,
                ..Default::default()
            },
            SyntheticSpec {
                id: "syn-spin".into(),
                frames,
                face_size,
                seed: 2,
                theta0: -2.0,
                rho0: 1.0,
                theta_rate: -0.01,
                rho_amplitude: 0.25,
                rho_period: 90.0,
                half_diagonal: 0.09,
                size_period: 70.0,
                aspect: 0.8,
                spin_rate: 0.02,
                size_variation: 0.5,
            },
            SyntheticSpec {
                id: "syn-fast".into(),
                frames,
                face_size,
                seed: 3,
                theta0: 2.9,
                rho0: 2.0,
                theta_rate: 0.03,
                rho_amplitude: 0.3,
                rho_period: 60.0,
                half_diagonal: 0.04,
                size_period: 45.0,
                aspect: 2.0,
                spin_rate: -0.01,
                size_variation: 0.5,
            },
        ]
    }

    pub fn region(&self, t: usize) -> Result<SphericalRegion<f64>, SourceError> {
        let tf = t as f64;
        let theta = self.theta0 + self.theta_rate * tf;
        let rho = self.rho0 + self.rho_amplitude * (TAU * tf / self.rho_period).sin();
        let center = SphericalPoint::new(theta, rho.clamp(0.05, PI - 0.05))
            .map_err(|e| SourceError::Format(e.to_string()))?;
        let half =
            self.half_diagonal * (1.0 + self.size_variation * (TAU * tf / self.size_period).sin());
        let norm = (self.aspect * self.aspect + 1.0).sqrt();
        let (hw, hh) = (half * self.aspect / norm, half / norm);
        Ok(SphericalRegion::from_tangent_rect(
            center,
            hw,
            hh,
            self.spin_rate * tf,
        )?)
    }

    pub fn track(&self) -> Result<GroundTruthTrack<f64>, SourceError> {
        let regions = (0..self.frames)
            .map(|t| self.region(t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GroundTruthTrack::new(regions)?)
    }

    /// Smooth scene colour along `d`, channels in `[0, 1]`.
    pub fn scene_color(&self, d: &Direction<f64>) -> [f64; 3] {
        let [x, y, z] = d.to_array();
        let p = (self.seed as f64 * 0.618_034).fract() * TAU;
        [
            0.5 + 0.4 * (3.0 * x + 2.0 * y + p).sin(),
            0.5 + 0.4 * (2.0 * y - 3.0 * z + 0.5 * p).sin(),
            0.5 + 0.4 * (3.0 * z - 2.0 * x + 1.3).cos(),
        ]
    }

    pub fn scene(&self) -> Result<CubeMapFrame, SourceError> {
        CubeMapFrame::from_fn(self.face_size, |d| {
            self.scene_color(&d)
                .map(|c| (c * 255.0 + 0.5).floor() as u8)
        })
    }

    pub fn build(&self) -> Result<SourceSequence, SourceError> {
        let scene = Arc::new(self.scene()?);
        let frames = InMemoryFrames::repeated(scene, self.frames);
        SourceSequence::new(self.id.clone(), Arc::new(frames), self.track()?)
    }

    /// Writes the sequence as a manifest, strip PNG frames and annotations
    /// under `dir`; returns the manifest path.
    pub fn write_dataset(&self, dir: &Path) -> Result<std::path::PathBuf, SourceError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| SourceError::Io { path, source }
        };
        let frame_dir = dir.join(&self.id);
        std::fs::create_dir_all(&frame_dir).map_err(io(&frame_dir))?;
        let scene = self.scene()?;
        for t in 0..self.frames {
            scene.save_strip(&frame_dir.join(format!("{t:05}.png")))?;
        }
        let ann = dir.join(format!("{}.txt", self.id));
        std::fs::write(&ann, serialize_annotations(&self.track()?)).map_err(io(&ann))?;
        let manifest = SourceManifest {
            id: self.id.clone(),
            face_size: self.face_size,
            frame_pattern: format!("{}/%05d.png", self.id),
            frame_count: self.frames,
            annotations: format!("{}.txt", self.id).into(),
            attribute: None,
            layout: FaceLayout::Strip,
            first_index: 0,
        };
        let path = dir.join(format!("{}.json", self.id));
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| SourceError::Manifest(e.to_string()))?;
        std::fs::write(&path, json).map_err(io(&path))?;
        Ok(path)
    }
}
