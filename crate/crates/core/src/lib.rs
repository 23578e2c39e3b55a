//! timberlens-core — a benchmark harness for vision-based tree perception.
//!
//! The crate covers the full loop needed to benchmark tree detectors without
//! depending on any learned model:
//!
//! 1. **synth** – procedural forest scenes rendered to RGB-D frames by a
//!    software rasterizer, with dense ground-truth annotations (trunk boxes,
//!    masks, five keypoints, occlusion fractions) computed automatically.
//! 2. **dataset** – COCO-style annotation JSON, run-length encoded masks,
//!    16-bit millimeter depth PNGs, and cross-validation fold splits.
//! 3. **eval** – IoU, greedy matching, precision–recall curves, AP and AR
//!    over boxes and masks at single and ranged IoU thresholds.
//! 4. **geometry** – pinhole backprojection turning pixel keypoints plus
//!    depth into metric errors: felling cut (cm), diameter (cm),
//!    inclination (degrees), and error-versus-distance fits.
//! 5. **analysis** – occlusion-stratified false-negative rates, dataset-size
//!    scaling fits, domain-transfer deltas, epoch generalization curves.
//! 6. **refpred** – reference prediction streams: a seeded noise model over
//!    ground truth and a naive depth-based trunk detector.

pub mod analysis;
pub mod dataset;
pub mod depth;
pub mod eval;
pub mod geometry;
pub mod mask;
pub mod math;
pub mod refpred;
pub mod rng;
pub mod stats;
pub mod synth;

pub use dataset::{AnnotationRecord, CategoryDef, DatasetIndex, FoldSplit, ImageRecord};
pub use depth::DepthMap;
pub use eval::{Detection, EvalSummary};
pub use geometry::{CameraIntrinsics, Keypoint3D, KeypointErrorReport};
pub use mask::Mask;
pub use synth::{InstanceAnnotation, RenderedFrame, SceneSpec};
