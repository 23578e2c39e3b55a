//! Procedural forest scenes rendered to RGB-D frames with dense,
//! automatically computed ground truth.
//!
//! A [`SceneSpec`] fully determines a scene: terrain, tree placement,
//! understorey, lighting and weather all derive from its seed. Frames are
//! rendered by a flat-shaded software rasterizer with a z-buffer; masks,
//! trunk-confined boxes, keypoints and occlusion fractions come from
//! per-instance solo re-renders against the full-scene depth test.

mod annotate;
mod camera;
mod generate;
mod render;
mod spawn;
mod terrain;

pub use annotate::{annotate, InstanceAnnotation, Keypoint2D};
pub use camera::{auto_frame_count, sample_camera_poses, CameraPose};
pub use generate::{
    annotation_to_record, generate_dataset, generate_from_manifest, FrameCount, GenerationManifest,
    ManifestImage, SynthError,
};
pub use render::{render, render_with_ids, Billboard, RenderTarget, RenderedFrame, SceneModel, SurfId};
pub use spawn::{spawn_trees, spawn_understorey, TreeInstance};
pub use terrain::{build_terrain, TerrainField};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::CameraIntrinsics;

/// Annotation rules fixed across the dataset: instances farther than 10 m
/// from the camera or with less than 30 % of their solo-render pixels
/// visible are not annotated.
pub const MAX_ANNOTATION_DISTANCE_M: f64 = 10.0;
pub const MAX_OCCLUSION: f64 = 0.70;

/// Height band above ground defining the "tree base" for base occlusion.
pub const BASE_BAND_M: f64 = 0.30;

/// Felling cut height above local ground.
pub const FELLING_CUT_HEIGHT_M: f64 = 0.10;

/// Spacing of the two inclination keypoints above the felling cut.
pub const INCLINATION_STEP_M: f64 = 0.90;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("{field}: range [{lo}, {hi}] is empty or non-finite")]
    EmptyRange { field: &'static str, lo: f64, hi: f64 },
    #[error("{field}: {value} out of bounds ({message})")]
    OutOfBounds { field: &'static str, value: f64, message: &'static str },
    #[error("camera: {0}")]
    Camera(String),
    #[error("cannot sample camera poses without trees")]
    NoTrees,
    #[error("frame count must be at least 1")]
    NoFrames,
}

/// How trees are distributed over the terrain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityProfile {
    /// Regular grid with positional jitter.
    Plantation,
    /// Poisson process thinned by a minimum-distance rule.
    Managed,
    /// Clustered (parent/child) Poisson process.
    Natural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lighting {
    Morning,
    Day,
    Evening,
    Night,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weather {
    Clear,
    Fog,
    Rain,
    Snow,
}

/// Camera and frame-geometry parameters: resolution, intrinsics, and the
/// pose-sampling ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraConfig {
    pub width: u32,
    pub height: u32,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Camera-to-target horizontal standoff range (meters).
    pub standoff_range: [f64; 2],
    /// Roll is sampled uniformly in ±roll_range_deg.
    pub roll_range_deg: f64,
    /// Pitch is sampled within ±pitch_range_deg (further restricted so the
    /// optical axis crosses the target trunk).
    pub pitch_range_deg: f64,
    /// Camera height above local terrain (meters).
    pub eye_height: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            width: 1280,
            height: 720,
            fx: 700.0,
            fy: 700.0,
            cx: 639.5,
            cy: 359.5,
            standoff_range: [2.0, 10.0],
            roll_range_deg: 10.0,
            pitch_range_deg: 10.0,
            eye_height: 1.7,
        }
    }
}

impl CameraConfig {
    /// The default camera rescaled to another resolution (intrinsics scale
    /// with the frame so the field of view is preserved).
    pub fn scaled_to(width: u32, height: u32) -> Self {
        let k = CameraIntrinsics::synthetic_for(width, height);
        CameraConfig { width, height, fx: k.fx, fy: k.fy, cx: k.cx, cy: k.cy, ..Default::default() }
    }

    pub fn intrinsics(&self) -> CameraIntrinsics {
        CameraIntrinsics { fx: self.fx, fy: self.fy, cx: self.cx, cy: self.cy }
    }

    fn validate(&self) -> Result<(), SpecError> {
        if self.width == 0 || self.height == 0 {
            return Err(SpecError::Camera(format!("resolution {}x{}", self.width, self.height)));
        }
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(SpecError::Camera(format!("focal lengths fx={} fy={}", self.fx, self.fy)));
        }
        let [lo, hi] = self.standoff_range;
        if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo <= hi) {
            return Err(SpecError::Camera(format!("standoff range [{lo}, {hi}]")));
        }
        if self.roll_range_deg < 0.0 || self.pitch_range_deg < 0.0 || self.eye_height <= 0.0 {
            return Err(SpecError::Camera("roll/pitch ranges and eye height must be non-negative".into()));
        }
        Ok(())
    }
}

/// Full description of one synthetic scene. The seed determines every
/// downstream random choice; two runs from the same spec are bit-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneSpec {
    pub seed: u64,
    /// Terrain side length in meters.
    pub terrain_size: f64,
    /// Trees per hectare.
    pub tree_density: f64,
    pub density_profile: DensityProfile,
    /// Understorey clutter amount in [0, 1].
    pub understorey_density: f64,
    pub lighting: Lighting,
    pub weather: Weather,
    /// Trunk radius range in meters.
    pub trunk_radius_range: [f64; 2],
    /// Tree height range in meters.
    pub tree_height_range: [f64; 2],
    /// Trees only spawn where the local slope stays below this (degrees).
    pub max_slope_spawn: f64,
    /// Terrain elevations span exactly this band (meters).
    pub altitude_band: [f64; 2],
    pub camera: CameraConfig,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            seed: 0,
            terrain_size: 100.0,
            tree_density: 400.0,
            density_profile: DensityProfile::Natural,
            understorey_density: 0.3,
            lighting: Lighting::Day,
            weather: Weather::Clear,
            trunk_radius_range: [0.10, 0.30],
            tree_height_range: [4.0, 14.0],
            max_slope_spawn: 30.0,
            altitude_band: [0.0, 6.0],
            camera: CameraConfig::default(),
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        let range = |field: &'static str, [lo, hi]: [f64; 2]| -> Result<(), SpecError> {
            if lo.is_finite() && hi.is_finite() && lo <= hi {
                Ok(())
            } else {
                Err(SpecError::EmptyRange { field, lo, hi })
            }
        };
        range("trunk_radius_range", self.trunk_radius_range)?;
        range("tree_height_range", self.tree_height_range)?;
        range("altitude_band", self.altitude_band)?;
        if self.trunk_radius_range[0] <= 0.0 {
            return Err(SpecError::OutOfBounds {
                field: "trunk_radius_range",
                value: self.trunk_radius_range[0],
                message: "radius must be positive",
            });
        }
        if self.tree_height_range[0] <= 0.0 {
            return Err(SpecError::OutOfBounds {
                field: "tree_height_range",
                value: self.tree_height_range[0],
                message: "height must be positive",
            });
        }
        if !(self.terrain_size.is_finite() && self.terrain_size > 0.0) {
            return Err(SpecError::OutOfBounds {
                field: "terrain_size",
                value: self.terrain_size,
                message: "must be positive",
            });
        }
        if !(self.tree_density.is_finite() && self.tree_density >= 0.0) {
            return Err(SpecError::OutOfBounds {
                field: "tree_density",
                value: self.tree_density,
                message: "must be non-negative",
            });
        }
        if !(0.0..=1.0).contains(&self.understorey_density) {
            return Err(SpecError::OutOfBounds {
                field: "understorey_density",
                value: self.understorey_density,
                message: "must be in [0, 1]",
            });
        }
        if !(0.0..=90.0).contains(&self.max_slope_spawn) {
            return Err(SpecError::OutOfBounds {
                field: "max_slope_spawn",
                value: self.max_slope_spawn,
                message: "must be in [0, 90] degrees",
            });
        }
        self.camera.validate()
    }
}
