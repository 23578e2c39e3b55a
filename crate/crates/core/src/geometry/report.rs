//! Metric keypoint errors: felling cut position, diameter, inclination,
//! and their relation to camera distance.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{AnnotationRecord, DatasetIndex};
use crate::depth::DepthMap;
use crate::eval::matching::{match_greedy, DetOutcome, GroundTruth, MatchKind};
use crate::eval::Detection;
use crate::mask::Mask;
use crate::stats::{linear_fit, LinearFit};

use super::{CameraIntrinsics, GeomError, Keypoint3D};

/// Keypoint indices in the canonical order.
pub const KP_FELLING_CUT: usize = 0;
pub const KP_DIAMETER_LEFT: usize = 1;
pub const KP_DIAMETER_RIGHT: usize = 2;
pub const KP_INCLINATION_MID: usize = 3;
pub const KP_INCLINATION_TOP: usize = 4;

/// Annotations beyond this camera distance are excluded from keypoint
/// statistics, matching the harvester-reach cutoff used everywhere else.
pub const MAX_EVAL_DISTANCE_M: f64 = 10.0;

/// Depth lookup with the trunk-edge fallback: stereo-style depth at
/// silhouette pixels often lands on the background, so when the direct
/// sample is missing or clearly behind the instance, the median depth of
/// instance-mask pixels within a 5 px radius is used instead.
pub struct DepthSource<'a> {
    depth: &'a DepthMap,
    mask: Option<&'a Mask>,
    expected_distance_m: Option<f64>,
}

impl<'a> DepthSource<'a> {
    pub fn new(depth: &'a DepthMap, mask: Option<&'a Mask>, expected_distance_m: Option<f64>) -> Self {
        DepthSource { depth, mask, expected_distance_m }
    }

    fn accepts(&self, d: f32) -> bool {
        match self.expected_distance_m {
            Some(e) => (d as f64) <= e + 1.0,
            None => true,
        }
    }

    /// Resolves a depth for the pixel, applying the fallback; errors when
    /// no acceptable sample exists (the instance is then excluded and
    /// counted by the report).
    pub fn resolve(&self, u: f64, v: f64) -> Result<f64, GeomError> {
        let (px, py) = (u.round() as i64, v.round() as i64);
        if let Some(d) = self.depth.sample(px, py) {
            if self.accepts(d) {
                return Ok(d as f64);
            }
        }
        let mut vals: Vec<f32> = Vec::new();
        for dy in -5i64..=5 {
            for dx in -5i64..=5 {
                if dx * dx + dy * dy > 25 {
                    continue;
                }
                let (x, y) = (px + dx, py + dy);
                if let Some(m) = self.mask {
                    if x < 0 || y < 0 || x >= m.width() as i64 || y >= m.height() as i64 {
                        continue;
                    }
                    if !m.get(x as u32, y as u32) {
                        continue;
                    }
                }
                if let Some(d) = self.depth.sample(x, y) {
                    if self.accepts(d) {
                        vals.push(d);
                    }
                }
            }
        }
        if vals.is_empty() {
            return Err(GeomError::MissingDepth { u, v });
        }
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = vals.len();
        let median = if n % 2 == 1 {
            vals[n / 2] as f64
        } else {
            (vals[n / 2 - 1] as f64 + vals[n / 2] as f64) / 2.0
        };
        Ok(median)
    }
}

/// Felling cut error decomposed in the camera frame: dx is image-frame
/// horizontal (x right), dy image-frame vertical (y down), dz along the
/// optical axis. `error_cm² = dx² + dy² + dz²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcError {
    pub error_cm: f64,
    pub dx_cm: f64,
    pub dy_cm: f64,
    pub dz_cm: f64,
}

/// 3-D Euclidean distance between predicted and ground-truth felling cut
/// positions, both lifted through the depth image.
pub fn felling_cut_error(
    pred_uv: [f64; 2],
    gt_uv: [f64; 2],
    src: &DepthSource,
    k: &CameraIntrinsics,
) -> Result<FcError, GeomError> {
    let zp = src.resolve(pred_uv[0], pred_uv[1])?;
    let zg = src.resolve(gt_uv[0], gt_uv[1])?;
    let p = k.backproject(pred_uv[0], pred_uv[1], zp)?;
    let g = k.backproject(gt_uv[0], gt_uv[1], zg)?;
    let (dx, dy, dz) = (p.x - g.x, p.y - g.y, p.z - g.z);
    Ok(FcError {
        error_cm: 100.0 * (dx * dx + dy * dy + dz * dz).sqrt(),
        dx_cm: 100.0 * dx,
        dy_cm: 100.0 * dy,
        dz_cm: 100.0 * dz,
    })
}

/// Trunk diameter in meters from the left/right keypoint pair: pixel
/// separation scaled by the depth sampled at the midpoint pixel (the trunk
/// surface). Invariant under swapping left and right.
pub fn diameter_from_keypoints(
    kp_left: [f64; 2],
    kp_right: [f64; 2],
    src: &DepthSource,
    k: &CameraIntrinsics,
) -> Result<f64, GeomError> {
    let mid = [(kp_left[0] + kp_right[0]) / 2.0, (kp_left[1] + kp_right[1]) / 2.0];
    let z_mid = src.resolve(mid[0], mid[1])?;
    Ok((kp_right[0] - kp_left[0]).abs() * z_mid / k.fx)
}

/// Trunk lean angle from two keypoints along the stem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inclination {
    /// Angle between the backprojected 3-D segment and the camera-frame
    /// vertical, in [0°, 90°]. The primary measure.
    pub deg_3d: f64,
    /// Image-plane angle of the pixel segment from image vertical.
    pub deg_image: f64,
}

pub fn inclination_angle(
    kp_low: [f64; 2],
    kp_high: [f64; 2],
    src: &DepthSource,
    k: &CameraIntrinsics,
) -> Result<Inclination, GeomError> {
    let zl = src.resolve(kp_low[0], kp_low[1])?;
    let zh = src.resolve(kp_high[0], kp_high[1])?;
    let low = k.backproject(kp_low[0], kp_low[1], zl)?;
    let high = k.backproject(kp_high[0], kp_high[1], zh)?;
    let seg = Keypoint3D { x: high.x - low.x, y: high.y - low.y, z: high.z - low.z };
    let len = seg.norm();
    if len == 0.0 {
        return Err(GeomError::ZeroLengthSegment);
    }
    // Line (not ray) semantics: the angle from vertical is in [0, 90].
    let cos_v = (seg.y / len).abs();
    let deg_3d = cos_v.clamp(0.0, 1.0).acos().to_degrees();

    let (du, dv) = (kp_high[0] - kp_low[0], kp_high[1] - kp_low[1]);
    let deg_image = if du == 0.0 && dv == 0.0 { 0.0 } else { du.abs().atan2(dv.abs()).to_degrees() };
    Ok(Inclination { deg_3d, deg_image })
}

/// Greedy box-IoU pairing of predictions to ground truths at IoU ≥ 0.5.
/// Returns (prediction index, ground-truth index) pairs; unmatched
/// predictions take no part in keypoint statistics.
pub fn match_instances(preds: &[Detection], gts: &[&AnnotationRecord]) -> Vec<(usize, usize)> {
    let ground: Vec<GroundTruth> = gts
        .iter()
        .map(|a| GroundTruth { id: a.id, bbox: a.bbox, mask: None, iscrowd: a.iscrowd != 0 })
        .collect();
    let result =
        match_greedy(preds, &ground, 0.5, MatchKind::Box).expect("box matching cannot fail");
    result
        .det_outcomes
        .iter()
        .enumerate()
        .filter_map(|(di, o)| match o {
            DetOutcome::TruePositive(gi) => Some((di, *gi)),
            _ => None,
        })
        .collect()
}

/// Per-instance metric errors for one matched prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceError {
    pub annotation_id: u64,
    pub image_id: u64,
    pub distance_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fc: Option<FcError>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dia_error_cm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inc_error_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inc_error_image_deg: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorAggregates {
    pub fc_mean_cm: Option<f64>,
    pub fc_median_cm: Option<f64>,
    /// Median lateral component (x̃).
    pub fc_dx_median_cm: Option<f64>,
    /// Median vertical component (ỹ).
    pub fc_dy_median_cm: Option<f64>,
    pub dia_mean_cm: Option<f64>,
    pub dia_median_cm: Option<f64>,
    pub inc_mean_deg: Option<f64>,
    pub inc_median_deg: Option<f64>,
}

/// The full keypoint evaluation output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeypointErrorReport {
    pub instances: Vec<InstanceError>,
    pub aggregates: ErrorAggregates,
    /// Matched instances excluded because no depth could be resolved.
    pub excluded_depth: usize,
    /// Matched instances beyond the 10 m cutoff.
    pub excluded_distance: usize,
    pub matched: usize,
    pub unmatched_predictions: usize,
    pub unmatched_ground_truth: usize,
}

fn mean(vals: &[f64]) -> Option<f64> {
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

fn median(vals: &[f64]) -> Option<f64> {
    if vals.is_empty() {
        return None;
    }
    let mut v = vals.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

/// Computes per-instance metric keypoint errors over a whole dataset.
/// `depths` maps image id to its depth image; images without depth are
/// skipped (their instances counted as depth-excluded).
pub fn keypoint_error_report(
    index: &DatasetIndex,
    predictions: &[Detection],
    depths: &HashMap<u64, DepthMap>,
    k: &CameraIntrinsics,
) -> Result<KeypointErrorReport, GeomError> {
    k.validate()?;
    let mut preds_by_image: HashMap<u64, Vec<(usize, &Detection)>> = HashMap::new();
    for (i, d) in predictions.iter().enumerate() {
        preds_by_image.entry(d.image_id).or_default().push((i, d));
    }

    let mut instances = Vec::new();
    let mut excluded_depth = 0usize;
    let mut excluded_distance = 0usize;
    let mut matched = 0usize;
    let mut unmatched_predictions = 0usize;
    let mut unmatched_ground_truth = 0usize;

    let mut images: Vec<&crate::dataset::ImageRecord> = index.images.iter().collect();
    images.sort_by_key(|i| i.id);

    for img in images {
        let mut gts: Vec<&AnnotationRecord> =
            index.tree_annotations().into_iter().filter(|a| a.image_id == img.id).collect();
        gts.sort_by_key(|a| a.id);
        let empty = Vec::new();
        let preds = preds_by_image.get(&img.id).unwrap_or(&empty);
        let det_list: Vec<Detection> = preds.iter().map(|(_, d)| (*d).clone()).collect();
        let pairs = match_instances(&det_list, &gts);
        matched += pairs.len();
        unmatched_predictions += det_list.len() - pairs.len();
        unmatched_ground_truth += gts.len() - pairs.len();

        let Some(depth) = depths.get(&img.id) else {
            excluded_depth += pairs.len();
            continue;
        };

        for (pi, gi) in pairs {
            let det = &det_list[pi];
            let gt = gts[gi];
            let (Some(pred_kps), Some(_)) = (&det.keypoints, &gt.keypoints) else {
                continue;
            };
            let gt_mask = gt.mask(img.width, img.height).ok().flatten();
            let src = DepthSource::new(depth, gt_mask.as_ref(), gt.distance_m);

            let gt_kp = |i: usize| gt.keypoint(i).map(|(u, v, _)| [u, v]);
            let distance_m = match gt.distance_m {
                Some(d) => d,
                None => {
                    // Fall back to the lifted ground-truth felling cut.
                    match gt_kp(KP_FELLING_CUT)
                        .and_then(|uv| src.resolve(uv[0], uv[1]).ok().map(|z| (uv, z)))
                    {
                        Some((uv, z)) => k.backproject(uv[0], uv[1], z)?.norm(),
                        None => {
                            excluded_depth += 1;
                            continue;
                        }
                    }
                }
            };
            if distance_m > MAX_EVAL_DISTANCE_M {
                excluded_distance += 1;
                continue;
            }

            let fc = match gt_kp(KP_FELLING_CUT) {
                Some(g) => match felling_cut_error(pred_kps[KP_FELLING_CUT], g, &src, k) {
                    Ok(e) => Some(e),
                    Err(GeomError::MissingDepth { .. }) => None,
                    Err(e) => return Err(e),
                },
                None => None,
            };

            let dia_error_cm = match (gt_kp(KP_DIAMETER_LEFT), gt_kp(KP_DIAMETER_RIGHT)) {
                (Some(gl), Some(gr)) => {
                    let gt_dia = diameter_from_keypoints(gl, gr, &src, k);
                    let pred_dia = diameter_from_keypoints(
                        pred_kps[KP_DIAMETER_LEFT],
                        pred_kps[KP_DIAMETER_RIGHT],
                        &src,
                        k,
                    );
                    match (pred_dia, gt_dia) {
                        (Ok(p), Ok(g)) => Some(100.0 * (p - g).abs()),
                        _ => None,
                    }
                }
                _ => None,
            };

            let (inc_error_deg, inc_error_image_deg) =
                match (gt_kp(KP_INCLINATION_MID), gt_kp(KP_INCLINATION_TOP)) {
                    (Some(gl), Some(gh)) => {
                        let gt_inc = inclination_angle(gl, gh, &src, k);
                        let pred_inc = inclination_angle(
                            pred_kps[KP_INCLINATION_MID],
                            pred_kps[KP_INCLINATION_TOP],
                            &src,
                            k,
                        );
                        match (pred_inc, gt_inc) {
                            (Ok(p), Ok(g)) => {
                                (Some((p.deg_3d - g.deg_3d).abs()), Some((p.deg_image - g.deg_image).abs()))
                            }
                            _ => (None, None),
                        }
                    }
                    _ => (None, None),
                };

            if fc.is_none() && dia_error_cm.is_none() && inc_error_deg.is_none() {
                excluded_depth += 1;
                continue;
            }
            instances.push(InstanceError {
                annotation_id: gt.id,
                image_id: img.id,
                distance_m,
                fc,
                dia_error_cm,
                inc_error_deg,
                inc_error_image_deg,
            });
        }
    }

    let fc_errs: Vec<f64> = instances.iter().filter_map(|i| i.fc.map(|f| f.error_cm)).collect();
    let fc_dx: Vec<f64> = instances.iter().filter_map(|i| i.fc.map(|f| f.dx_cm)).collect();
    let fc_dy: Vec<f64> = instances.iter().filter_map(|i| i.fc.map(|f| f.dy_cm)).collect();
    let dia: Vec<f64> = instances.iter().filter_map(|i| i.dia_error_cm).collect();
    let inc: Vec<f64> = instances.iter().filter_map(|i| i.inc_error_deg).collect();

    let aggregates = ErrorAggregates {
        fc_mean_cm: mean(&fc_errs),
        fc_median_cm: median(&fc_errs),
        fc_dx_median_cm: median(&fc_dx),
        fc_dy_median_cm: median(&fc_dy),
        dia_mean_cm: mean(&dia),
        dia_median_cm: median(&dia),
        inc_mean_deg: mean(&inc),
        inc_median_deg: median(&inc),
    };

    Ok(KeypointErrorReport {
        instances,
        aggregates,
        excluded_depth,
        excluded_distance,
        matched,
        unmatched_predictions,
        unmatched_ground_truth,
    })
}

/// Binned means plus a least-squares line of error versus camera distance,
/// with a normal-approximation 95 % confidence band on the slope.
/// Instances beyond 10 m are excluded; absent with fewer than 3 points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceFit {
    pub fit: LinearFit,
    pub ci95_slope: (f64, f64),
    /// `(bin_lo_m, bin_hi_m, mean_error, count)` per 1 m bin up to 10 m.
    pub bins: Vec<(f64, f64, f64, usize)>,
    pub n: usize,
}

pub fn error_vs_distance(points: &[(f64, f64)]) -> Option<DistanceFit> {
    let kept: Vec<(f64, f64)> =
        points.iter().copied().filter(|(d, _)| *d <= MAX_EVAL_DISTANCE_M).collect();
    if kept.len() < 3 {
        return None;
    }
    let xs: Vec<f64> = kept.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = kept.iter().map(|p| p.1).collect();
    let fit = linear_fit(&xs, &ys)?;

    let mut bins = Vec::new();
    for b in 0..10 {
        let (lo, hi) = (b as f64, b as f64 + 1.0);
        let vals: Vec<f64> =
            kept.iter().filter(|(d, _)| *d >= lo && *d < hi).map(|(_, e)| *e).collect();
        if let Some(m) = mean(&vals) {
            bins.push((lo, hi, m, vals.len()));
        }
    }
    let ci = fit.slope_ci95();
    Some(DistanceFit { ci95_slope: ci, bins, n: kept.len(), fit })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_depth(w: u32, h: u32, z: f32) -> DepthMap {
        DepthMap::from_data(w, h, vec![z; (w * h) as usize])
    }

    #[test]
    fn identical_keypoints_zero_error() {
        let depth = flat_depth(64, 64, 5.0);
        let k = CameraIntrinsics { fx: 700.0, fy: 700.0, cx: 31.5, cy: 31.5 };
        let src = DepthSource::new(&depth, None, None);
        let e = felling_cut_error([20.0, 30.0], [20.0, 30.0], &src, &k).unwrap();
        assert_eq!((e.error_cm, e.dx_cm, e.dy_cm), (0.0, 0.0, 0.0));
    }

    #[test]
    fn vertical_offset_hand_arithmetic() {
        // gt at principal point, pred 70 px below, both at 5 m, fy = 700:
        // dy = 70 * 5 / 700 = 0.5 m.
        let depth = flat_depth(1280, 720, 5.0);
        let k = CameraIntrinsics::synthetic_default();
        let src = DepthSource::new(&depth, None, None);
        let e = felling_cut_error([k.cx, k.cy + 70.0], [k.cx, k.cy], &src, &k).unwrap();
        assert!((e.dy_cm - 50.0).abs() < 1e-9);
        assert_eq!(e.dx_cm, 0.0);
        assert!((e.error_cm - 50.0).abs() < 1e-9);
    }

    #[test]
    fn error_decomposition_is_consistent() {
        let depth = flat_depth(1280, 720, 4.0);
        let k = CameraIntrinsics::synthetic_default();
        let src = DepthSource::new(&depth, None, None);
        let e = felling_cut_error([500.0, 400.0], [520.0, 380.0], &src, &k).unwrap();
        let recomposed = (e.dx_cm.powi(2) + e.dy_cm.powi(2) + e.dz_cm.powi(2)).sqrt();
        assert!((e.error_cm.powi(2) - recomposed.powi(2)).abs() < 1e-9);
    }

    #[test]
    fn diameter_hand_arithmetic() {
        // 70 px apart, z_mid = 4 m, fx = 700 → 0.40 m.
        let depth = flat_depth(1280, 720, 4.0);
        let k = CameraIntrinsics::synthetic_default();
        let src = DepthSource::new(&depth, None, None);
        let d = diameter_from_keypoints([600.0, 400.0], [670.0, 400.0], &src, &k).unwrap();
        assert_eq!(d, 0.4);
        // Left/right swap leaves it unchanged.
        let swapped = diameter_from_keypoints([670.0, 400.0], [600.0, 400.0], &src, &k).unwrap();
        assert_eq!(d, swapped);
        // Coincident keypoints → 0.
        let zero = diameter_from_keypoints([600.0, 400.0], [600.0, 400.0], &src, &k).unwrap();
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn metric_error_scales_linearly_with_depth() {
        let k = CameraIntrinsics::synthetic_default();
        for (z, expected) in [(2.0f32, 0.2), (4.0, 0.4), (8.0, 0.8)] {
            let depth = flat_depth(1280, 720, z);
            let src = DepthSource::new(&depth, None, None);
            let d = diameter_from_keypoints([600.0, 400.0], [670.0, 400.0], &src, &k).unwrap();
            assert!((d - expected).abs() < 1e-12, "doubling depth doubles the estimate");
        }
    }

    #[test]
    fn inclination_vertical_and_45_degrees() {
        let depth = flat_depth(1280, 720, 5.0);
        let k = CameraIntrinsics::synthetic_default();
        let src = DepthSource::new(&depth, None, None);
        let v = inclination_angle([400.0, 500.0], [400.0, 300.0], &src, &k).unwrap();
        assert!(v.deg_3d.abs() < 1e-9);
        assert!(v.deg_image.abs() < 1e-9);
        // Equal depth, Δx = Δy in camera frame → 45°.
        let d = inclination_angle([400.0, 500.0], [540.0, 360.0], &src, &k).unwrap();
        assert!((d.deg_3d - 45.0).abs() < 1e-9, "got {}", d.deg_3d);
        assert!((d.deg_image - 45.0).abs() < 1e-9);
    }

    #[test]
    fn zero_length_segment_rejected() {
        let depth = flat_depth(64, 64, 5.0);
        let k = CameraIntrinsics { fx: 700.0, fy: 700.0, cx: 31.5, cy: 31.5 };
        let src = DepthSource::new(&depth, None, None);
        assert!(matches!(
            inclination_angle([10.0, 10.0], [10.0, 10.0], &src, &k),
            Err(GeomError::ZeroLengthSegment)
        ));
    }

    #[test]
    fn depth_fallback_uses_mask_median() {
        let mut depth = flat_depth(32, 32, 5.0);
        depth.set(16, 16, f32::INFINITY); // hole at the keypoint
        let mask = Mask::from_fn(32, 32, |x, y| (14..19).contains(&x) && (14..19).contains(&y));
        let src = DepthSource::new(&depth, Some(&mask), Some(5.0));
        assert_eq!(src.resolve(16.0, 16.0).unwrap(), 5.0);
        // Background rejection: depth far beyond the instance is replaced.
        let mut bg = flat_depth(32, 32, 12.0);
        for y in 14..19 {
            for x in 14..19 {
                if (x, y) != (16, 16) {
                    bg.set(x, y, 5.0);
                }
            }
        }
        let src = DepthSource::new(&bg, Some(&mask), Some(5.0));
        assert_eq!(src.resolve(16.0, 16.0).unwrap(), 5.0);
    }

    #[test]
    fn unresolvable_depth_is_an_error() {
        let depth = DepthMap::new(16, 16); // all missing
        let src = DepthSource::new(&depth, None, None);
        assert!(matches!(src.resolve(8.0, 8.0), Err(GeomError::MissingDepth { .. })));
    }

    #[test]
    fn distance_fit_constant_error_zero_slope() {
        let pts: Vec<(f64, f64)> = (0..20).map(|i| (0.5 * i as f64, 3.0)).collect();
        let fit = error_vs_distance(&pts).unwrap();
        assert!(fit.fit.slope.abs() < 1e-12);
        assert!((fit.fit.intercept - 3.0).abs() < 1e-12);
    }

    #[test]
    fn distance_fit_exact_line() {
        let pts: Vec<(f64, f64)> = (1..=18).map(|i| (i as f64 * 0.5, 0.5 * (i as f64 * 0.5))).collect();
        let fit = error_vs_distance(&pts).unwrap();
        assert!((fit.fit.slope - 0.5).abs() < 1e-9);
        // Points beyond 10 m are ignored.
        let mut with_far = pts.clone();
        with_far.push((15.0, 99.0));
        let fit2 = error_vs_distance(&with_far).unwrap();
        assert_eq!(fit.fit.slope, fit2.fit.slope);
        assert_eq!(fit2.n, pts.len());
    }

    #[test]
    fn distance_fit_needs_three_points() {
        assert!(error_vs_distance(&[(1.0, 2.0), (2.0, 3.0)]).is_none());
    }
}
