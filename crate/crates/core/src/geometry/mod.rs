//! Pinhole camera geometry: backprojection of pixel keypoints plus depth
//! into metric quantities and errors.
//!
//! Camera frame convention: x right, y down, z forward (meters).

pub mod report;

pub use report::{
    diameter_from_keypoints, error_vs_distance, felling_cut_error, inclination_angle,
    keypoint_error_report, match_instances, DepthSource, DistanceFit, FcError, Inclination,
    InstanceError, KeypointErrorReport,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("focal lengths must be positive, got fx={fx}, fy={fy}")]
    BadIntrinsics { fx: f64, fy: f64 },
    #[error("depth must be positive and finite, got {0}")]
    BadDepth(f64),
    #[error("no resolvable depth at pixel ({u:.1}, {v:.1})")]
    MissingDepth { u: f64, v: f64 },
    #[error("inclination segment has zero length")]
    ZeroLengthSegment,
}

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    /// Synthetic default: fx = fy = 700 px with the principal point at the
    /// center of a 1280×720 frame.
    pub fn synthetic_default() -> Self {
        CameraIntrinsics { fx: 700.0, fy: 700.0, cx: 639.5, cy: 359.5 }
    }

    /// The synthetic default rescaled to another resolution.
    pub fn synthetic_for(width: u32, height: u32) -> Self {
        let sx = width as f64 / 1280.0;
        let sy = height as f64 / 720.0;
        CameraIntrinsics {
            fx: 700.0 * sx,
            fy: 700.0 * sy,
            cx: (width as f64 - 1.0) / 2.0,
            cy: (height as f64 - 1.0) / 2.0,
        }
    }

    pub fn validate(&self) -> Result<(), GeomError> {
        if self.fx > 0.0 && self.fy > 0.0 {
            Ok(())
        } else {
            Err(GeomError::BadIntrinsics { fx: self.fx, fy: self.fy })
        }
    }

    /// Lifts a pixel with known depth into the camera frame.
    pub fn backproject(&self, u: f64, v: f64, depth: f64) -> Result<Keypoint3D, GeomError> {
        if !(depth.is_finite() && depth > 0.0) {
            return Err(GeomError::BadDepth(depth));
        }
        Ok(Keypoint3D {
            x: (u - self.cx) * depth / self.fx,
            y: (v - self.cy) * depth / self.fy,
            z: depth,
        })
    }

    /// Projects a camera-frame point to pixel coordinates.
    pub fn project(&self, p: Keypoint3D) -> (f64, f64) {
        (p.x * self.fx / p.z + self.cx, p.y * self.fy / p.z + self.cy)
    }
}

/// A point in the camera frame (meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Keypoint3D {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}
