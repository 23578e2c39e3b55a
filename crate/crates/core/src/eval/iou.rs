//! Intersection-over-union for boxes and masks.

use crate::mask::Mask;

use super::EvalError;

/// IoU of two `[x, y, w, h]` boxes: intersection area over union area.
/// Symmetric, 1 for identical boxes, 0 for disjoint ones.
pub fn iou_box(a: [f64; 4], b: [f64; 4]) -> f64 {
    let inter = intersection_area(a, b);
    let union = a[2] * a[3] + b[2] * b[3] - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Intersection area over the area of `a` alone; COCO's crowd-region
/// overlap measure.
pub fn intersection_over_first(a: [f64; 4], b: [f64; 4]) -> f64 {
    let area = a[2] * a[3];
    if area <= 0.0 {
        0.0
    } else {
        intersection_area(a, b) / area
    }
}

fn intersection_area(a: [f64; 4], b: [f64; 4]) -> f64 {
    let x0 = a[0].max(b[0]);
    let y0 = a[1].max(b[1]);
    let x1 = (a[0] + a[2]).min(b[0] + b[2]);
    let y1 = (a[1] + a[3]).min(b[1] + b[3]);
    (x1 - x0).max(0.0) * (y1 - y0).max(0.0)
}

/// Mask IoU: |a ∧ b| / |a ∨ b|, 0 when both masks are empty.
pub fn iou_mask(a: &Mask, b: &Mask) -> Result<f64, EvalError> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(EvalError::MaskDimensionMismatch {
            a: (a.width(), a.height()),
            b: (b.width(), b.height()),
        });
    }
    let union = a.union_count(b);
    if union == 0 {
        return Ok(0.0);
    }
    Ok(a.intersection_count(b) as f64 / union as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_boxes() {
        assert_eq!(iou_box([2.0, 3.0, 10.0, 4.0], [2.0, 3.0, 10.0, 4.0]), 1.0);
    }

    #[test]
    fn disjoint_boxes() {
        assert_eq!(iou_box([0.0, 0.0, 5.0, 5.0], [10.0, 10.0, 5.0, 5.0]), 0.0);
    }

    #[test]
    fn half_overlap_hand_geometry() {
        // (0,0,10,10) vs (5,0,10,10): intersection 50, union 150.
        let v = iou_box([0.0, 0.0, 10.0, 10.0], [5.0, 0.0, 10.0, 10.0]);
        assert!((v - 50.0 / 150.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric() {
        let a = [1.0, 2.0, 7.0, 3.0];
        let b = [4.0, 1.0, 5.0, 9.0];
        assert_eq!(iou_box(a, b), iou_box(b, a));
    }

    #[test]
    fn mask_identical_and_disjoint() {
        let a = Mask::from_fn(8, 8, |x, _| x < 4);
        let b = Mask::from_fn(8, 8, |x, _| x >= 4);
        assert_eq!(iou_mask(&a, &a).unwrap(), 1.0);
        assert_eq!(iou_mask(&a, &b).unwrap(), 0.0);
        // Both empty: 0 by convention.
        assert_eq!(iou_mask(&Mask::new(4, 4), &Mask::new(4, 4)).unwrap(), 0.0);
    }

    #[test]
    fn mask_dimension_mismatch() {
        assert!(iou_mask(&Mask::new(4, 4), &Mask::new(4, 5)).is_err());
    }

    #[test]
    fn mask_iou_matches_pixel_loop() {
        use rand::Rng;
        let mut rng = crate::rng::rng_for(5, crate::rng::Stream::NoiseJitter, 0, 0);
        for _ in 0..20 {
            let a = Mask::from_fn(16, 16, |_, _| rng.random::<f64>() < 0.4);
            let b = Mask::from_fn(16, 16, |_, _| rng.random::<f64>() < 0.4);
            let (mut inter, mut union) = (0u32, 0u32);
            for y in 0..16 {
                for x in 0..16 {
                    inter += (a.get(x, y) && b.get(x, y)) as u32;
                    union += (a.get(x, y) || b.get(x, y)) as u32;
                }
            }
            let expected = if union == 0 { 0.0 } else { inter as f64 / union as f64 };
            assert_eq!(iou_mask(&a, &b).unwrap(), expected);
        }
    }
}
