//! Detection metrics: IoU, greedy matching, precision–recall curves, and
//! AP / AR over boxes and masks at single and ranged IoU thresholds.

pub mod iou;
pub mod matching;
pub mod pr;

pub use iou::{iou_box, iou_mask};
pub use matching::{match_greedy, DetOutcome, GroundTruth, MatchKind, MatchResult};
pub use pr::{ap_range, average_precision, average_recall, pr_curve, ImageInstances, PRCurve, PrPoint};

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{DatasetIndex, Segmentation};
use crate::mask::Mask;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("mask dimensions differ: {a:?} vs {b:?}")]
    MaskDimensionMismatch { a: (u32, u32), b: (u32, u32) },
    #[error("predictions reference unknown image ids: {0:?}")]
    UnknownImageIds(Vec<u64>),
    #[error("invalid predictions: {}", .0.join("; "))]
    InvalidPredictions(Vec<String>),
    #[error("IoU thresholds must be strictly increasing within (0, 1], got {0:?}")]
    BadThresholds(Vec<f64>),
    #[error("{path}: {message}")]
    PredictionFile { path: String, message: String },
    #[error(transparent)]
    Dataset(#[from] crate::dataset::DatasetError),
}

/// One predicted instance.
#[derive(Debug, Clone)]
pub struct Detection {
    pub image_id: u64,
    /// `[x, y, w, h]` in pixels.
    pub bbox: [f64; 4],
    pub mask: Option<Mask>,
    /// Five (u, v) pixel positions in the canonical keypoint order.
    pub keypoints: Option<[[f64; 2]; 5]>,
    /// Confidence in [0, 1].
    pub score: f64,
}

/// Serialized form of a detection; masks travel as polygons or RLE and
/// keypoints as a flat `[u0, v0, ..., u4, v4]` list of ten numbers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub image_id: u64,
    pub bbox: [f64; 4],
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segmentation: Option<Segmentation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keypoints: Option<Vec<f64>>,
}

/// An ordered set of IoU thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IouThresholds {
    pub values: Vec<f64>,
}

impl IouThresholds {
    /// The standard range 0.50:0.05:0.95 (ten thresholds).
    pub fn canonical() -> Self {
        IouThresholds { values: (10..=19).map(|i| i as f64 * 5.0 / 100.0).collect() }
    }

    pub fn single(t: f64) -> Self {
        IouThresholds { values: vec![t] }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let ok = !self.values.is_empty()
            && self.values.iter().all(|&v| v > 0.0 && v <= 1.0)
            && self.values.windows(2).all(|w| w[0] < w[1]);
        if ok {
            Ok(())
        } else {
            Err(EvalError::BadThresholds(self.values.clone()))
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    /// Cap on detections per image (top scores kept). `None` = unlimited,
    /// the default; `Some(k)` reproduces COCO's maxDets convention.
    pub max_dets: Option<usize>,
}

/// A PR curve tagged with the IoU threshold that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCurve {
    pub threshold: f64,
    pub curve: PRCurve,
}

/// The eight headline metrics (percentages) plus per-threshold PR curves.
/// Mask metrics are absent when predictions carry no masks; every metric is
/// absent when the dataset has no ground truth to measure against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub ap50_bb: Option<f64>,
    pub ap5095_bb: Option<f64>,
    pub ap50_seg: Option<f64>,
    pub ap5095_seg: Option<f64>,
    pub ar50_bb: Option<f64>,
    pub ar5095_bb: Option<f64>,
    pub ar50_seg: Option<f64>,
    pub ar5095_seg: Option<f64>,
    pub pr_curves_bb: Vec<ThresholdCurve>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pr_curves_seg: Vec<ThresholdCurve>,
}

impl EvalSummary {
    /// Metric values in the fixed column order used by reports.
    pub fn metric_row(&self) -> [Option<f64>; 8] {
        [
            self.ap50_bb,
            self.ap5095_bb,
            self.ap50_seg,
            self.ap5095_seg,
            self.ar50_bb,
            self.ar5095_bb,
            self.ar50_seg,
            self.ar5095_seg,
        ]
    }

    pub const METRIC_NAMES: [&'static str; 8] =
        ["AP_bb_50", "AP_bb_50:95", "AP_seg_50", "AP_seg_50:95", "AR_bb_50", "AR_bb_50:95", "AR_seg_50", "AR_seg_50:95"];
}

/// Loads a prediction file (JSON array of [`DetectionRecord`]) and converts
/// it to dense detections, validating every record. All offenses are
/// reported together.
pub fn load_predictions(path: &Path, index: &DatasetIndex) -> Result<Vec<Detection>, EvalError> {
    let text = fs::read_to_string(path)
        .map_err(|e| EvalError::PredictionFile { path: path.display().to_string(), message: e.to_string() })?;
    let records: Vec<DetectionRecord> = serde_json::from_str(&text)
        .map_err(|e| EvalError::PredictionFile { path: path.display().to_string(), message: e.to_string() })?;
    detections_from_records(&records, index)
}

pub fn save_predictions(path: &Path, records: &[DetectionRecord]) -> Result<(), EvalError> {
    let json = serde_json::to_string_pretty(records)
        .map_err(|e| EvalError::PredictionFile { path: path.display().to_string(), message: e.to_string() })?;
    fs::write(path, json)
        .map_err(|e| EvalError::PredictionFile { path: path.display().to_string(), message: e.to_string() })
}

pub fn detections_from_records(
    records: &[DetectionRecord],
    index: &DatasetIndex,
) -> Result<Vec<Detection>, EvalError> {
    let dims: HashMap<u64, (u32, u32)> = index.images.iter().map(|i| (i.id, (i.width, i.height))).collect();
    let mut issues = Vec::new();
    let mut unknown = Vec::new();
    let mut out = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        let Some(&(w, h)) = dims.get(&rec.image_id) else {
            unknown.push(rec.image_id);
            continue;
        };
        if !rec.score.is_finite() || !(0.0..=1.0).contains(&rec.score) {
            issues.push(format!("record {i}: score {} outside [0,1]", rec.score));
            continue;
        }
        if rec.bbox[2] <= 0.0 || rec.bbox[3] <= 0.0 || rec.bbox.iter().any(|v| !v.is_finite()) {
            issues.push(format!("record {i}: bad bbox {:?}", rec.bbox));
            continue;
        }
        let keypoints = match &rec.keypoints {
            None => None,
            Some(k) if k.len() == 10 => {
                let mut arr = [[0.0f64; 2]; 5];
                for j in 0..5 {
                    arr[j] = [k[2 * j], k[2 * j + 1]];
                }
                Some(arr)
            }
            Some(k) => {
                issues.push(format!("record {i}: keypoint arity: expected 10 numbers, got {}", k.len()));
                continue;
            }
        };
        let mask = match &rec.segmentation {
            None => None,
            Some(seg) => match seg.to_mask(w, h) {
                Ok(m) => Some(m),
                Err(e) => {
                    issues.push(format!("record {i}: segmentation: {e}"));
                    continue;
                }
            },
        };
        out.push(Detection { image_id: rec.image_id, bbox: rec.bbox, mask, keypoints, score: rec.score });
    }
    unknown.sort_unstable();
    unknown.dedup();
    if !unknown.is_empty() {
        return Err(EvalError::UnknownImageIds(unknown));
    }
    if !issues.is_empty() {
        return Err(EvalError::InvalidPredictions(issues));
    }
    Ok(out)
}

/// Turns ground truth annotations into a prediction stream (score 1.0),
/// useful for identity checks.
pub fn ground_truth_as_predictions(index: &DatasetIndex) -> Vec<DetectionRecord> {
    index
        .tree_annotations()
        .iter()
        .filter(|a| a.iscrowd == 0)
        .map(|a| DetectionRecord {
            image_id: a.image_id,
            bbox: a.bbox,
            score: 1.0,
            segmentation: a.segmentation.clone(),
            keypoints: a.keypoints.as_ref().map(|k| {
                (0..5).flat_map(|i| [k[3 * i], k[3 * i + 1]]).collect()
            }),
        })
        .collect()
}

/// Groups detections and ground truths per image, in deterministic order.
/// Ground truths are ordered by annotation id; detections keep their input
/// order (their insertion index is a tie-break key during pooling).
pub fn group_by_image(
    index: &DatasetIndex,
    predictions: &[Detection],
    opts: &EvalOptions,
    decode_gt_masks: bool,
) -> Result<Vec<ImageInstances>, EvalError> {
    let known: HashSet<u64> = index.images.iter().map(|i| i.id).collect();
    let mut unknown: Vec<u64> = predictions
        .iter()
        .map(|d| d.image_id)
        .filter(|id| !known.contains(id))
        .collect();
    if !unknown.is_empty() {
        unknown.sort_unstable();
        unknown.dedup();
        return Err(EvalError::UnknownImageIds(unknown));
    }

    let mut images: Vec<ImageInstances> = Vec::with_capacity(index.images.len());
    let mut slot: HashMap<u64, usize> = HashMap::new();
    let mut sorted_images: Vec<&crate::dataset::ImageRecord> = index.images.iter().collect();
    sorted_images.sort_by_key(|i| i.id);
    for img in &sorted_images {
        slot.insert(img.id, images.len());
        images.push(ImageInstances { image_id: img.id, dets: vec![], gts: vec![] });
    }

    let dims: HashMap<u64, (u32, u32)> = index.images.iter().map(|i| (i.id, (i.width, i.height))).collect();
    let mut anns = index.tree_annotations();
    anns.sort_by_key(|a| a.id);
    for ann in anns {
        let mask = if decode_gt_masks {
            let (w, h) = dims[&ann.image_id];
            ann.mask(w, h)?
        } else {
            None
        };
        images[slot[&ann.image_id]].gts.push(GroundTruth {
            id: ann.id,
            bbox: ann.bbox,
            mask,
            iscrowd: ann.iscrowd != 0,
        });
    }
    for det in predictions {
        images[slot[&det.image_id]].dets.push(det.clone());
    }

    if let Some(cap) = opts.max_dets {
        for img in &mut images {
            if img.dets.len() > cap {
                let mut order: Vec<usize> = (0..img.dets.len()).collect();
                order.sort_by(|&a, &b| {
                    img.dets[b]
                        .score
                        .partial_cmp(&img.dets[a].score)
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(a.cmp(&b))
                });
                let keep: HashSet<usize> = order.into_iter().take(cap).collect();
                let mut idx = 0;
                img.dets.retain(|_| {
                    let k = keep.contains(&idx);
                    idx += 1;
                    k
                });
            }
        }
    }
    Ok(images)
}

/// Runs the full metric suite over a dataset: the eight headline numbers
/// plus per-threshold PR curves. Mask metrics are computed only when at
/// least one prediction carries a mask.
pub fn evaluate(
    index: &DatasetIndex,
    predictions: &[Detection],
    opts: &EvalOptions,
) -> Result<EvalSummary, EvalError> {
    let thresholds = IouThresholds::canonical();
    let seg_enabled = predictions.iter().any(|d| d.mask.is_some());
    let images = group_by_image(index, predictions, opts, seg_enabled)?;

    let pct = |v: Option<f64>| v.map(|x| x * 100.0);

    let run = |kind: MatchKind| -> Result<(Option<f64>, Option<f64>, Option<f64>, Option<f64>, Vec<ThresholdCurve>), EvalError> {
        let prepared = pr::PreparedImages::prepare(&images, kind)?;
        let mut curves = Vec::with_capacity(thresholds.values.len());
        for &t in &thresholds.values {
            curves.push(ThresholdCurve { threshold: t, curve: prepared.pr_curve_at(t) });
        }
        if prepared.gt_total() == 0 {
            return Ok((None, None, None, None, curves));
        }
        let ap50 = Some(curves[0].curve.average_precision());
        let ap5095 =
            Some(curves.iter().map(|c| c.curve.average_precision()).sum::<f64>() / curves.len() as f64);
        let ar50 = prepared.max_recall_at(thresholds.values[0]);
        let ar5095 = {
            let sum: f64 = thresholds.values.iter().map(|&t| prepared.max_recall_at(t).unwrap_or(0.0)).sum();
            Some(sum / thresholds.values.len() as f64)
        };
        Ok((ap50, ap5095, ar50, ar5095, curves))
    };

    let (ap50_bb, ap5095_bb, ar50_bb, ar5095_bb, pr_curves_bb) = run(MatchKind::Box)?;
    let (ap50_seg, ap5095_seg, ar50_seg, ar5095_seg, pr_curves_seg) = if seg_enabled {
        run(MatchKind::Mask)?
    } else {
        (None, None, None, None, vec![])
    };

    Ok(EvalSummary {
        ap50_bb: pct(ap50_bb),
        ap5095_bb: pct(ap5095_bb),
        ap50_seg: pct(ap50_seg),
        ap5095_seg: pct(ap5095_seg),
        ar50_bb: pct(ar50_bb),
        ar5095_bb: pct(ar5095_bb),
        ar50_seg: pct(ar50_seg),
        ar5095_seg: pct(ar5095_seg),
        pr_curves_bb,
        pr_curves_seg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{encode_rle, AnnotationRecord, CategoryDef, ImageRecord};

    fn toy_index() -> DatasetIndex {
        let mask = Mask::from_fn(32, 24, |x, y| (4..12).contains(&x) && (2..20).contains(&y));
        let rle = encode_rle(&mask);
        DatasetIndex {
            images: vec![ImageRecord {
                id: 1,
                file_name: "a.png".into(),
                depth_file_name: None,
                width: 32,
                height: 24,
            }],
            annotations: vec![AnnotationRecord {
                id: 1,
                image_id: 1,
                category_id: 1,
                bbox: [4.0, 2.0, 8.0, 18.0],
                area: mask.count_ones() as f64,
                segmentation: Some(Segmentation::Rle(rle)),
                keypoints: Some(vec![8.0, 19.0, 2.0, 4.0, 19.0, 2.0, 11.0, 19.0, 2.0, 8.0, 10.0, 2.0, 8.0, 3.0, 2.0]),
                num_keypoints: Some(5),
                occlusion_tree: Some(0.0),
                occlusion_base: Some(0.0),
                distance_m: Some(5.0),
                iscrowd: 0,
            }],
            categories: vec![CategoryDef::tree()],
        }
    }

    #[test]
    fn ground_truth_scores_all_hundreds() {
        let index = toy_index();
        let records = ground_truth_as_predictions(&index);
        let dets = detections_from_records(&records, &index).unwrap();
        let summary = evaluate(&index, &dets, &EvalOptions::default()).unwrap();
        for (name, v) in EvalSummary::METRIC_NAMES.iter().zip(summary.metric_row()) {
            assert_eq!(v, Some(100.0), "{name}");
        }
    }

    #[test]
    fn unknown_image_id_is_reported() {
        let index = toy_index();
        let det = Detection { image_id: 99, bbox: [0.0, 0.0, 4.0, 4.0], mask: None, keypoints: None, score: 0.5 };
        match evaluate(&index, &[det], &EvalOptions::default()) {
            Err(EvalError::UnknownImageIds(ids)) => assert_eq!(ids, vec![99]),
            other => panic!("expected UnknownImageIds, got {other:?}"),
        }
    }

    #[test]
    fn mask_metrics_absent_without_prediction_masks() {
        let index = toy_index();
        let det = Detection { image_id: 1, bbox: [4.0, 2.0, 8.0, 18.0], mask: None, keypoints: None, score: 0.9 };
        let summary = evaluate(&index, &[det], &EvalOptions::default()).unwrap();
        assert_eq!(summary.ap50_bb, Some(100.0));
        assert_eq!(summary.ap50_seg, None);
        assert!(summary.pr_curves_seg.is_empty());
    }

    #[test]
    fn canonical_thresholds_are_exact() {
        let t = IouThresholds::canonical();
        assert_eq!(t.values.len(), 10);
        assert_eq!(t.values[0], 0.5);
        assert_eq!(t.values[2], 0.6);
        assert_eq!(t.values[9], 0.95);
        t.validate().unwrap();
    }

    #[test]
    fn ap50_never_below_ap5095() {
        let index = toy_index();
        let det = Detection { image_id: 1, bbox: [5.0, 2.0, 8.0, 18.0], mask: None, keypoints: None, score: 0.7 };
        let s = evaluate(&index, &[det], &EvalOptions::default()).unwrap();
        assert!(s.ap50_bb.unwrap() >= s.ap5095_bb.unwrap());
    }
}
