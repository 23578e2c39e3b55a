//! Greedy detection-to-ground-truth matching within one image.

use crate::mask::Mask;

use super::iou::{intersection_over_first, iou_box, iou_mask};
use super::{Detection, EvalError};

/// Which overlap measure drives the matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchKind {
    Box,
    Mask,
}

/// A ground-truth instance prepared for matching.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    /// Tie-break key: lower id wins when two candidates have equal IoU.
    pub id: u64,
    pub bbox: [f64; 4],
    pub mask: Option<Mask>,
    pub iscrowd: bool,
}

/// Slim ground-truth view used once overlaps are precomputed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GtMeta {
    pub id: u64,
    pub iscrowd: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetOutcome {
    /// Matched the ground truth at this index (into the provided slice).
    TruePositive(usize),
    FalsePositive,
    /// Overlaps a crowd region; excluded from both TP and FP counting.
    Ignored,
}

/// Match result at a single IoU threshold.
#[derive(Debug, Clone)]
pub struct MatchResult {
    pub threshold: f64,
    /// One outcome per detection, in the order detections were provided.
    pub det_outcomes: Vec<DetOutcome>,
    /// For each ground truth: the index of the matching detection.
    pub gt_matches: Vec<Option<usize>>,
    /// Unmatched non-crowd ground truths.
    pub false_negatives: usize,
}

impl MatchResult {
    pub fn true_positives(&self) -> usize {
        self.det_outcomes.iter().filter(|o| matches!(o, DetOutcome::TruePositive(_))).count()
    }
}

/// Pairwise overlaps between all detections and ground truths of one image,
/// computed once and reused across IoU thresholds. `main` holds the
/// matching measure for non-crowd ground truths; `crowd` holds the
/// crowd-region measure (intersection over detection area for boxes).
#[derive(Debug, Clone)]
pub(crate) struct PairOverlaps {
    n_gts: usize,
    main: Vec<f64>,
    crowd: Vec<f64>,
}

impl PairOverlaps {
    #[inline]
    fn main_at(&self, det: usize, gt: usize) -> f64 {
        self.main[det * self.n_gts + gt]
    }

    #[inline]
    fn crowd_at(&self, det: usize, gt: usize) -> f64 {
        self.crowd[det * self.n_gts + gt]
    }
}

pub(crate) fn compute_overlaps(
    dets: &[Detection],
    gts: &[GroundTruth],
    kind: MatchKind,
) -> Result<PairOverlaps, EvalError> {
    let n_gts = gts.len();
    let mut main = vec![0.0; dets.len() * n_gts];
    let mut crowd = vec![0.0; dets.len() * n_gts];
    for (di, det) in dets.iter().enumerate() {
        for (gi, gt) in gts.iter().enumerate() {
            let v = match kind {
                MatchKind::Box => iou_box(det.bbox, gt.bbox),
                MatchKind::Mask => match (&det.mask, &gt.mask) {
                    (Some(d), Some(g)) => iou_mask(d, g)?,
                    // A missing mask on either side can never reach a threshold.
                    _ => 0.0,
                },
            };
            if gt.iscrowd {
                crowd[di * n_gts + gi] = match kind {
                    MatchKind::Box => intersection_over_first(det.bbox, gt.bbox),
                    MatchKind::Mask => v,
                };
            } else {
                main[di * n_gts + gi] = v;
            }
        }
    }
    Ok(PairOverlaps { n_gts, main, crowd })
}

/// Core greedy rule on precomputed overlaps. Detections are processed in
/// descending score (ties by insertion order); each claims the still
/// unmatched non-crowd ground truth with the highest IoU at or above the
/// threshold, ties broken by lower ground-truth id. An otherwise-unmatched
/// detection whose overlap with a crowd region reaches the threshold is
/// ignored rather than counted as a false positive.
pub(crate) fn match_with_overlaps(
    overlaps: &PairOverlaps,
    scores: &[f64],
    gts: &[GtMeta],
    threshold: f64,
) -> MatchResult {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b].partial_cmp(&scores[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });

    let mut gt_matches: Vec<Option<usize>> = vec![None; gts.len()];
    let mut det_outcomes = vec![DetOutcome::FalsePositive; scores.len()];

    for &di in &order {
        let mut best: Option<(f64, usize)> = None;
        for (gi, gt) in gts.iter().enumerate() {
            if gt.iscrowd || gt_matches[gi].is_some() {
                continue;
            }
            let v = overlaps.main_at(di, gi);
            if v < threshold {
                continue;
            }
            let better = match best {
                None => true,
                Some((bv, bgi)) => v > bv || (v == bv && gt.id < gts[bgi].id),
            };
            if better {
                best = Some((v, gi));
            }
        }
        match best {
            Some((_, gi)) => {
                gt_matches[gi] = Some(di);
                det_outcomes[di] = DetOutcome::TruePositive(gi);
            }
            None => {
                let hits_crowd = gts
                    .iter()
                    .enumerate()
                    .any(|(gi, gt)| gt.iscrowd && overlaps.crowd_at(di, gi) >= threshold);
                if hits_crowd {
                    det_outcomes[di] = DetOutcome::Ignored;
                }
            }
        }
    }

    let false_negatives =
        gts.iter().zip(&gt_matches).filter(|(gt, m)| !gt.iscrowd && m.is_none()).count();

    MatchResult { threshold, det_outcomes, gt_matches, false_negatives }
}

/// Greedy matching of one image's detections against its ground truths.
pub fn match_greedy(
    dets: &[Detection],
    gts: &[GroundTruth],
    threshold: f64,
    kind: MatchKind,
) -> Result<MatchResult, EvalError> {
    let overlaps = compute_overlaps(dets, gts, kind)?;
    let scores: Vec<f64> = dets.iter().map(|d| d.score).collect();
    let meta: Vec<GtMeta> = gts.iter().map(|g| GtMeta { id: g.id, iscrowd: g.iscrowd }).collect();
    Ok(match_with_overlaps(&overlaps, &scores, &meta, threshold))
}
