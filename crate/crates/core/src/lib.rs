//! Pinhole viewpoint sequences from annotated 360° video, with controlled
//! apparent camera motion, and a supervised tracker evaluation harness.
//!
//! Geometry and overlap code is generic over [`scalar::Scalar`] (`f32` or
//! `f64`); the pipeline from controllers onward runs in `f64`.

pub mod annotations;
pub mod controllers;
pub mod datasetstats;
pub mod evaluator;
pub mod geometry;
pub mod measures;
pub mod protocol;
pub mod renderer;
pub mod scalar;
pub mod spherevideo;
pub mod synthetic;

pub use scalar::Scalar;

pub type SphericalPoint64 = geometry::SphericalPoint<f64>;
pub type SphericalPoint32 = geometry::SphericalPoint<f32>;
pub type Direction64 = geometry::Direction<f64>;
pub type Direction32 = geometry::Direction<f32>;
pub type CameraState64 = geometry::CameraState<f64>;
pub type CameraState32 = geometry::CameraState<f32>;
pub type ImagePoint64 = geometry::ImagePoint<f64>;
pub type ImagePoint32 = geometry::ImagePoint<f32>;
pub type ImagePolygon64 = geometry::ImagePolygon<f64>;
pub type ImagePolygon32 = geometry::ImagePolygon<f32>;
pub type SphericalRegion64 = annotations::SphericalRegion<f64>;
pub type SphericalRegion32 = annotations::SphericalRegion<f32>;
pub type GroundTruthTrack64 = annotations::GroundTruthTrack<f64>;
