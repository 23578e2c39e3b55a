//! Precision–recall curves, average precision, and average recall.
//!
//! Scores are pooled dataset-wide before curve construction; the pooled
//! order is fixed to (score descending, image id, insertion index) so
//! results never depend on input shuffling or thread count.

use serde::{Deserialize, Serialize};

use super::matching::{compute_overlaps, match_with_overlaps, DetOutcome, GroundTruth, GtMeta, MatchKind, PairOverlaps};
use super::{Detection, EvalError, IouThresholds};

/// Detections and ground truths of a single image.
#[derive(Debug, Clone, Default)]
pub struct ImageInstances {
    pub image_id: u64,
    pub dets: Vec<Detection>,
    pub gts: Vec<GroundTruth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
    /// Confidence of the detection that produced this point.
    pub score: f64,
}

/// Number of equally spaced recall levels {0, 0.01, ..., 1}.
pub const RECALL_LEVELS: usize = 101;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PRCurve {
    /// One point per pooled detection, recall non-decreasing.
    pub points: Vec<PrPoint>,
    /// Interpolated precision at each recall level: the maximum precision
    /// attained at recall ≥ the level. Non-increasing, length 101.
    pub interpolated: Vec<f64>,
}

impl PRCurve {
    /// Mean of the interpolated precision samples.
    pub fn average_precision(&self) -> f64 {
        self.interpolated.iter().sum::<f64>() / self.interpolated.len() as f64
    }
}

/// One pooled detection with its match outcome at a fixed IoU threshold.
struct PooledEntry {
    score: f64,
    tp: bool,
    ignored: bool,
}

struct PreparedImage {
    image_id: u64,
    scores: Vec<f64>,
    gts: Vec<GtMeta>,
    overlaps: PairOverlaps,
}

/// Per-image overlap matrices computed once and reused across all IoU
/// thresholds; the expensive part of evaluation for mask matching.
pub struct PreparedImages {
    images: Vec<PreparedImage>,
    gt_total: usize,
}

impl PreparedImages {
    pub fn prepare(images: &[ImageInstances], kind: MatchKind) -> Result<Self, EvalError> {
        let mut prepared = Vec::with_capacity(images.len());
        let mut gt_total = 0usize;
        for img in images {
            gt_total += img.gts.iter().filter(|g| !g.iscrowd).count();
            prepared.push(PreparedImage {
                image_id: img.image_id,
                scores: img.dets.iter().map(|d| d.score).collect(),
                gts: img.gts.iter().map(|g| GtMeta { id: g.id, iscrowd: g.iscrowd }).collect(),
                overlaps: compute_overlaps(&img.dets, &img.gts, kind)?,
            });
        }
        Ok(PreparedImages { images: prepared, gt_total })
    }

    pub fn gt_total(&self) -> usize {
        self.gt_total
    }

    fn pooled(&self, threshold: f64) -> Vec<PooledEntry> {
        let mut entries: Vec<(f64, u64, usize, bool, bool)> = Vec::new();
        for img in &self.images {
            let result = match_with_overlaps(&img.overlaps, &img.scores, &img.gts, threshold);
            for (idx, outcome) in result.det_outcomes.iter().enumerate() {
                let (tp, ignored) = match outcome {
                    DetOutcome::TruePositive(_) => (true, false),
                    DetOutcome::FalsePositive => (false, false),
                    DetOutcome::Ignored => (false, true),
                };
                entries.push((img.scores[idx], img.image_id, idx, tp, ignored));
            }
        }
        entries.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });
        entries.into_iter().map(|(score, _, _, tp, ignored)| PooledEntry { score, tp, ignored }).collect()
    }

    /// PR curve at one threshold; see [`pr_curve`].
    pub fn pr_curve_at(&self, threshold: f64) -> PRCurve {
        build_curve(self.pooled(threshold), self.gt_total)
    }

    /// Max recall over confidence cutoffs with nonzero precision.
    pub fn max_recall_at(&self, threshold: f64) -> Option<f64> {
        if self.gt_total == 0 {
            return None;
        }
        let mut best = 0.0f64;
        let mut tp = 0u64;
        for e in self.pooled(threshold) {
            if e.ignored {
                continue;
            }
            if e.tp {
                tp += 1;
                best = best.max(tp as f64 / self.gt_total as f64);
            }
        }
        Some(best)
    }
}

/// Builds the pooled PR curve at one IoU threshold. With zero ground
/// truths the curve is empty and metrics derived from it are undefined.
pub fn pr_curve(images: &[ImageInstances], threshold: f64, kind: MatchKind) -> Result<PRCurve, EvalError> {
    let prepared = PreparedImages::prepare(images, kind)?;
    let (pooled, gt_total) = (prepared.pooled(threshold), prepared.gt_total);
    Ok(build_curve(pooled, gt_total))
}

fn build_curve(pooled: Vec<PooledEntry>, gt_total: usize) -> PRCurve {
    let mut points = Vec::with_capacity(pooled.len());
    let (mut tp, mut fp) = (0u64, 0u64);
    for e in &pooled {
        if e.ignored {
            continue;
        }
        if e.tp {
            tp += 1;
        } else {
            fp += 1;
        }
        if gt_total > 0 {
            points.push(PrPoint {
                recall: tp as f64 / gt_total as f64,
                precision: tp as f64 / (tp + fp) as f64,
                score: e.score,
            });
        }
    }

    // Suffix max of precision; points with recall ≥ r form a suffix.
    let mut suffix_max = vec![0.0f64; points.len()];
    let mut running: f64 = 0.0;
    for (i, p) in points.iter().enumerate().rev() {
        running = running.max(p.precision);
        suffix_max[i] = running;
    }
    let mut interpolated = vec![0.0f64; RECALL_LEVELS];
    let mut cursor = 0usize;
    for (li, slot) in interpolated.iter_mut().enumerate() {
        let level = li as f64 / (RECALL_LEVELS - 1) as f64;
        while cursor < points.len() && points[cursor].recall < level {
            cursor += 1;
        }
        if cursor < points.len() {
            *slot = suffix_max[cursor];
        }
    }
    PRCurve { points, interpolated }
}

/// Average precision at one IoU threshold: the mean of the 101
/// interpolated-precision samples. `None` when there is no ground truth.
pub fn average_precision(
    images: &[ImageInstances],
    threshold: f64,
    kind: MatchKind,
) -> Result<Option<f64>, EvalError> {
    let gt_total: usize = images.iter().map(|i| i.gts.iter().filter(|g| !g.iscrowd).count()).sum();
    if gt_total == 0 {
        return Ok(None);
    }
    Ok(Some(pr_curve(images, threshold, kind)?.average_precision()))
}

/// Mean of average precision over a threshold range.
pub fn ap_range(
    images: &[ImageInstances],
    thresholds: &IouThresholds,
    kind: MatchKind,
) -> Result<Option<f64>, EvalError> {
    let prepared = PreparedImages::prepare(images, kind)?;
    if prepared.gt_total() == 0 {
        return Ok(None);
    }
    let mut sum = 0.0;
    for &t in &thresholds.values {
        sum += prepared.pr_curve_at(t).average_precision();
    }
    Ok(Some(sum / thresholds.values.len() as f64))
}

/// Average recall: for each IoU threshold, the maximum recall over
/// confidence cutoffs restricted to cutoffs with nonzero precision, then
/// the mean across thresholds. `None` when there is no ground truth.
pub fn average_recall(
    images: &[ImageInstances],
    thresholds: &IouThresholds,
    kind: MatchKind,
) -> Result<Option<f64>, EvalError> {
    let prepared = PreparedImages::prepare(images, kind)?;
    let mut sum = 0.0;
    for &t in &thresholds.values {
        match prepared.max_recall_at(t) {
            Some(r) => sum += r,
            None => return Ok(None),
        }
    }
    Ok(Some(sum / thresholds.values.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(bbox: [f64; 4], score: f64) -> Detection {
        Detection { image_id: 1, bbox, mask: None, keypoints: None, score }
    }

    fn gt(id: u64, bbox: [f64; 4]) -> GroundTruth {
        GroundTruth { id, bbox, mask: None, iscrowd: false }
    }

    fn single_image(dets: Vec<Detection>, gts: Vec<GroundTruth>) -> Vec<ImageInstances> {
        vec![ImageInstances { image_id: 1, dets, gts }]
    }

    #[test]
    fn perfect_predictions_give_ap_one_everywhere() {
        let boxes = [[0.0, 0.0, 10.0, 20.0], [30.0, 5.0, 8.0, 16.0]];
        let imgs = single_image(
            boxes.iter().map(|&b| det(b, 1.0)).collect(),
            boxes.iter().enumerate().map(|(i, &b)| gt(i as u64, b)).collect(),
        );
        for t in IouThresholds::canonical().values {
            assert_eq!(average_precision(&imgs, t, MatchKind::Box).unwrap(), Some(1.0));
        }
    }

    #[test]
    fn no_detections_ap_zero() {
        let imgs = single_image(vec![], vec![gt(1, [0.0, 0.0, 5.0, 5.0])]);
        assert_eq!(average_precision(&imgs, 0.5, MatchKind::Box).unwrap(), Some(0.0));
    }

    #[test]
    fn zero_gt_is_absent_not_zero() {
        let imgs = single_image(vec![det([0.0, 0.0, 5.0, 5.0], 0.8)], vec![]);
        assert_eq!(average_precision(&imgs, 0.5, MatchKind::Box).unwrap(), None);
        assert_eq!(average_recall(&imgs, &IouThresholds::single(0.5), MatchKind::Box).unwrap(), None);
    }

    #[test]
    fn hand_computed_pr_table() {
        // Three images, one GT each. Detections pooled by score:
        //   score .9 TP, .8 FP, .7 TP, .6 FP, .5 TP
        // Recall:     1/3, 1/3, 2/3, 2/3, 3/3
        // Precision:  1/1, 1/2, 2/3, 2/4, 3/5
        // p_interp: levels ≤ 1/3 → max(1, …) = 1.0
        //           levels in (1/3, 2/3] → max(2/3, 2/4, 3/5) = 2/3
        //           levels in (2/3, 1]   → 3/5
        // AP = (34·1.0 + 33·(2/3) + 34·0.6) / 101
        let g = [0.0, 0.0, 10.0, 10.0];
        let far = [50.0, 50.0, 10.0, 10.0];
        let imgs = vec![
            ImageInstances { image_id: 1, dets: vec![det(g, 0.9), det(far, 0.8)], gts: vec![gt(1, g)] },
            ImageInstances { image_id: 2, dets: vec![det(g, 0.7), det(far, 0.6)], gts: vec![gt(2, g)] },
            ImageInstances { image_id: 3, dets: vec![det(g, 0.5)], gts: vec![gt(3, g)] },
        ];
        let expected = (34.0 * 1.0 + 33.0 * (2.0 / 3.0) + 34.0 * 0.6) / 101.0;
        let ap = average_precision(&imgs, 0.5, MatchKind::Box).unwrap().unwrap();
        assert!((ap - expected).abs() < 1e-12, "ap = {ap}, expected {expected}");
    }

    #[test]
    fn ap_range_counts_thresholds_below_iou() {
        // Detections at IoU exactly 0.6 against every GT.
        let imgs = single_image(
            vec![det([0.0, 0.0, 10.0, 6.0], 0.9)],
            vec![gt(1, [0.0, 0.0, 10.0, 10.0])],
        );
        let ap = ap_range(&imgs, &IouThresholds::canonical(), MatchKind::Box).unwrap().unwrap();
        assert!((ap - 0.3).abs() < 1e-12, "thresholds {{.5,.55,.6}} pass → 3/10, got {ap}");
    }

    #[test]
    fn ar_recall_ceiling() {
        // 4 GTs, 3 detected perfectly, no FPs → AR_50 = 0.75.
        let boxes: Vec<[f64; 4]> = (0..4).map(|i| [20.0 * i as f64, 0.0, 10.0, 10.0]).collect();
        let imgs = single_image(
            boxes[..3].iter().map(|&b| det(b, 0.9)).collect(),
            boxes.iter().enumerate().map(|(i, &b)| gt(i as u64, b)).collect(),
        );
        let ar = average_recall(&imgs, &IouThresholds::single(0.5), MatchKind::Box).unwrap().unwrap();
        assert_eq!(ar, 0.75);
    }

    #[test]
    fn curve_monotonicity_invariants() {
        let g = [0.0, 0.0, 10.0, 10.0];
        let imgs = single_image(
            vec![det(g, 0.9), det([2.0, 0.0, 10.0, 10.0], 0.7), det([40.0, 40.0, 4.0, 4.0], 0.6)],
            vec![gt(1, g), gt(2, [15.0, 0.0, 10.0, 10.0])],
        );
        let curve = pr_curve(&imgs, 0.5, MatchKind::Box).unwrap();
        assert_eq!(curve.interpolated.len(), RECALL_LEVELS);
        for w in curve.points.windows(2) {
            assert!(w[0].recall <= w[1].recall);
        }
        for w in curve.interpolated.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }
}
