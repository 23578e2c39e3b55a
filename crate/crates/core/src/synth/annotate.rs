//! Dense per-instance ground truth from rendered frames.
//!
//! Occlusion comes from a per-instance solo re-render: the tree (trunk plus
//! its own crown) is rasterized alone from the same pose, and the fraction
//! of its trunk pixels that survive the full-scene depth test gives the
//! visible fraction. Base occlusion restricts the same computation to the
//! 0–30 cm-above-ground band. Only in-frame pixels count on both sides of
//! the ratio.

use serde::{Deserialize, Serialize};

use crate::mask::Mask;
use crate::math::Vec3;

use super::camera::CameraPose;
use super::render::{raster_pass, RenderTarget, RenderedFrame, SceneModel, SurfId};
use super::spawn::TreeInstance;
use super::{BASE_BAND_M, FELLING_CUT_HEIGHT_M, INCLINATION_STEP_M, MAX_ANNOTATION_DISTANCE_M, MAX_OCCLUSION};

/// One keypoint: pixel position plus a COCO-style visibility flag
/// (0 unlabeled, 1 labeled-but-occluded, 2 visible).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint2D {
    pub u: f64,
    pub v: f64,
    pub flag: u8,
}

/// Ground truth for one tree in one frame. Keypoint order is fixed:
/// felling cut, diameter left, diameter right, inclination mid,
/// inclination top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceAnnotation {
    pub tree_id: u32,
    /// Tight `[x, y, w, h]` hull of the mask, trunk only.
    pub bbox: [f64; 4],
    /// Trunk pixels that survive the full-scene depth test.
    pub mask: Mask,
    pub keypoints: [Keypoint2D; 5],
    /// 1 − (visible trunk pixels / solo-render trunk pixels).
    pub occlusion_tree: f64,
    /// Same ratio restricted to the 0–30 cm band above the base; 1.0 when
    /// the band has no in-frame solo pixels at all.
    pub occlusion_base: f64,
    /// Camera-to-trunk-base distance (meters), always ≤ 10.
    pub distance_m: f64,
}

/// Computes annotations for every tree that passes the range and
/// visibility rules. `frame` must have been rendered from the same scene
/// and pose (caller's contract); its depth buffer drives the keypoint
/// visibility test while surface ids are re-derived internally.
pub fn annotate(scene: &SceneModel, pose: &CameraPose, frame: &RenderedFrame) -> Vec<InstanceAnnotation> {
    let mut full = RenderTarget::new(frame.width, frame.height);
    raster_pass(scene, pose, None, &mut full);
    annotate_with_ids(scene, pose, &full.idbuf, frame)
}

pub(crate) fn annotate_with_ids(
    scene: &SceneModel,
    pose: &CameraPose,
    full_ids: &[SurfId],
    frame: &RenderedFrame,
) -> Vec<InstanceAnnotation> {
    let (w, h) = (frame.width, frame.height);
    let mut solo = RenderTarget::new(w, h);
    let basis = pose.basis();
    let mut out = Vec::new();

    for (tidx, tree) in scene.trees.iter().enumerate() {
        let distance_m = (pose.position - tree.base_position).norm();
        if distance_m > MAX_ANNOTATION_DISTANCE_M {
            continue;
        }

        raster_pass(scene, pose, Some(tidx), &mut solo);
        let trunk = SurfId::trunk(tree.id);
        let base_z = tree.base_position.z;

        let mut solo_total = 0usize;
        let mut solo_base = 0usize;
        let mut vis_total = 0usize;
        let mut vis_base = 0usize;
        for py in 0..h {
            for px in 0..w {
                let idx = (py as usize) * w as usize + px as usize;
                if solo.idbuf[idx] != trunk {
                    continue;
                }
                solo_total += 1;
                // World height of the solo surface point at this pixel.
                let z = solo.zbuf[idx];
                let cx = (px as f64 + 0.5 - pose.intrinsics.cx) * z / pose.intrinsics.fx;
                let cy = (py as f64 + 0.5 - pose.intrinsics.cy) * z / pose.intrinsics.fy;
                let world_z = pose.position.z + basis.right.z * cx + basis.down.z * cy + basis.forward.z * z;
                let in_base = (world_z - base_z) <= BASE_BAND_M && (world_z - base_z) >= -0.05;
                if in_base {
                    solo_base += 1;
                }
                if full_ids[idx] == trunk {
                    vis_total += 1;
                    if in_base {
                        vis_base += 1;
                    }
                }
            }
        }
        if solo_total == 0 {
            continue;
        }
        let occlusion_tree = 1.0 - vis_total as f64 / solo_total as f64;
        if occlusion_tree > MAX_OCCLUSION + 1e-12 {
            continue;
        }
        let occlusion_base =
            if solo_base > 0 { 1.0 - vis_base as f64 / solo_base as f64 } else { 1.0 };

        let mask = Mask::from_fn(w, h, |x, y| {
            full_ids[(y as usize) * w as usize + x as usize] == trunk
        });
        let Some(bbox) = mask.tight_bbox() else { continue };

        let keypoints = compute_keypoints(tree, pose, &solo, frame);
        out.push(InstanceAnnotation {
            tree_id: tree.id,
            bbox,
            mask,
            keypoints,
            occlusion_tree: occlusion_tree.clamp(0.0, 1.0),
            occlusion_base: occlusion_base.clamp(0.0, 1.0),
            distance_m,
        });
    }
    out
}

fn compute_keypoints(
    tree: &TreeInstance,
    pose: &CameraPose,
    solo: &RenderTarget,
    frame: &RenderedFrame,
) -> [Keypoint2D; 5] {
    let s_fc = tree.arc_for_height(FELLING_CUT_HEIGHT_M);
    let p_fc = tree.axis_point(s_fc);
    let r_fc = tree.radius_at(s_fc);

    // Silhouette edge direction: perpendicular to both the trunk axis and
    // the view ray, so the two diameter points project onto the left/right
    // silhouette at the felling-cut height.
    let view = (p_fc - pose.position).normalized();
    let mut edge = tree.lean.cross(view);
    if edge.norm() < 1e-9 {
        edge = Vec3::new(1.0, 0.0, 0.0);
    }
    let edge = edge.normalized();

    let s_top_max = tree.height;
    let s_top = (s_fc + 2.0 * INCLINATION_STEP_M).min(s_top_max);
    let s_mid = (s_fc + INCLINATION_STEP_M).min((s_fc + s_top) / 2.0);

    let axis_depth = |s: f64| tree.radius_at(s);
    let points = [
        (p_fc, axis_depth(s_fc)),
        (p_fc + edge * r_fc, 0.0),
        (p_fc - edge * r_fc, 0.0),
        (tree.axis_point(s_mid), axis_depth(s_mid)),
        (tree.axis_point(s_top), axis_depth(s_top)),
    ];

    let mut kps = [Keypoint2D { u: 0.0, v: 0.0, flag: 0 }; 5];
    for (i, (p, surface_offset)) in points.iter().enumerate() {
        let c = pose.world_to_camera(*p);
        if c.z <= 0.05 {
            kps[i] = Keypoint2D { u: 0.0, v: 0.0, flag: 0 };
            continue;
        }
        let u = pose.intrinsics.fx * c.x / c.z + pose.intrinsics.cx;
        let v = pose.intrinsics.fy * c.y / c.z + pose.intrinsics.cy;
        let flag = visibility_flag(u, v, c.z - surface_offset, solo, frame);
        kps[i] = Keypoint2D { u, v, flag };
    }
    // Order the diameter pair left/right by u.
    if kps[1].u > kps[2].u {
        kps.swap(1, 2);
    }
    kps
}

/// Visible (2) when, near the keypoint's pixel, the full render still shows
/// a surface at the trunk's depth; occluded (1) otherwise, including
/// off-frame keypoints.
fn visibility_flag(u: f64, v: f64, expected_z: f64, solo: &RenderTarget, frame: &RenderedFrame) -> u8 {
    let (w, h) = (frame.width as i64, frame.height as i64);
    let (px, py) = (u.round() as i64, v.round() as i64);
    if px < 0 || py < 0 || px >= w || py >= h {
        return 1;
    }
    for dy in -1i64..=1 {
        for dx in -1i64..=1 {
            let (x, y) = (px + dx, py + dy);
            if x < 0 || y < 0 || x >= w || y >= h {
                continue;
            }
            let idx = (y as usize) * w as usize + x as usize;
            let solo_z = solo.zbuf[idx];
            // Only pixels where the solo render put this tree's surface.
            if !solo_z.is_finite() || (solo_z - expected_z).abs() > 0.5 {
                continue;
            }
            let full_z = frame.depth.get(x as u32, y as u32);
            if full_z.is_finite() && (full_z as f64) >= solo_z - 0.05 {
                return 2;
            }
        }
    }
    1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::render::{render, Billboard, SceneModel};
    use crate::synth::{SceneSpec, TerrainField};

    fn fixture_scene(trees: Vec<TreeInstance>, occluders: Vec<Billboard>) -> SceneModel {
        let spec = SceneSpec {
            tree_density: 0.0,
            understorey_density: 0.0,
            altitude_band: [0.0, 0.0],
            ..Default::default()
        };
        let terrain = TerrainField::flat(spec.terrain_size, 1.0, 0.0);
        SceneModel::assemble(spec, terrain, trees, occluders)
    }

    fn test_tree() -> TreeInstance {
        TreeInstance {
            id: 0,
            base_position: Vec3::new(50.0, 50.0, 0.0),
            trunk_radius: 0.25,
            height: 6.0,
            lean: Vec3::UP,
            taper: 0.0,
            appearance_id: 3,
        }
    }

    fn front_pose(scene: &SceneModel) -> CameraPose {
        CameraPose {
            position: Vec3::new(44.0, 50.0, 1.6),
            roll: 0.0,
            pitch: 0.0,
            yaw: 0.0,
            intrinsics: scene.spec.camera.intrinsics(),
        }
    }

    #[test]
    fn unobstructed_tree_has_zero_occlusion() {
        let scene = fixture_scene(vec![test_tree()], vec![]);
        let pose = front_pose(&scene);
        let frame = render(&scene, &pose);
        let anns = annotate(&scene, &pose, &frame);
        assert_eq!(anns.len(), 1);
        let a = &anns[0];
        assert_eq!(a.occlusion_tree, 0.0);
        assert_eq!(a.occlusion_base, 0.0);
        assert!((a.distance_m - 6.0).abs() < 0.3);
        // Mask/bbox consistency.
        assert_eq!(Some(a.bbox), a.mask.tight_bbox());
    }

    #[test]
    fn full_frame_occluder_drops_the_annotation() {
        let tree = test_tree();
        let wall = Billboard {
            position: Vec3::new(45.5, 50.0, 0.0),
            width: 40.0,
            height: 30.0,
            appearance_id: 0,
        };
        let scene = fixture_scene(vec![tree], vec![wall]);
        let pose = front_pose(&scene);
        let frame = render(&scene, &pose);
        assert!(annotate(&scene, &pose, &frame).is_empty(), "occlusion > 70 % must drop");
    }

    #[test]
    fn half_occluder_measures_half_occlusion() {
        let tree = test_tree();
        let scene = fixture_scene(vec![tree.clone()], vec![]);
        let pose = front_pose(&scene);

        // Silhouette of the solo render, to size an occluder covering
        // exactly its left half (independent pixel-count oracle).
        let mut solo = RenderTarget::new(scene.spec.camera.width, scene.spec.camera.height);
        raster_pass(&scene, &pose, Some(0), &mut solo);
        let trunk = SurfId::trunk(0);
        let mut xs: Vec<u32> = Vec::new();
        let (mut y_min, mut y_max) = (u32::MAX, 0u32);
        for py in 0..scene.spec.camera.height {
            for px in 0..scene.spec.camera.width {
                if solo.idbuf[(py as usize) * scene.spec.camera.width as usize + px as usize] == trunk {
                    xs.push(px);
                    y_min = y_min.min(py);
                    y_max = y_max.max(py);
                }
            }
        }
        xs.sort_unstable();
        let cutoff = xs[xs.len() / 2]; // column splitting pixels in half
        let oracle_covered =
            xs.iter().filter(|&&x| x < cutoff).count() as f64 / xs.len() as f64;

        // Place a camera-facing occluder at 3 m covering columns < cutoff
        // over the full silhouette height.
        let k = scene.spec.camera.intrinsics();
        let zb = 3.0;
        let u_lo = 0.0;
        let u_hi = cutoff as f64; // left edge of the cutoff column
        let x_lo = (u_lo - k.cx) * zb / k.fx;
        let x_hi = (u_hi - k.cx) * zb / k.fx;
        let center_u = (x_lo + x_hi) / 2.0;
        let width = x_hi - x_lo;
        // Pose looks along +x, so camera-right is world −y.
        let pos = pose.position;
        let occluder = Billboard {
            position: Vec3::new(pos.x + zb, pos.y - center_u, 0.0),
            width,
            height: 25.0,
            appearance_id: 1,
        };
        let scene2 = fixture_scene(vec![tree], vec![occluder]);
        let frame = render(&scene2, &pose);
        let anns = annotate(&scene2, &pose, &frame);
        assert_eq!(anns.len(), 1);
        let measured = anns[0].occlusion_tree;
        assert!(
            (measured - oracle_covered).abs() < 0.02,
            "measured {measured:.3} vs oracle {oracle_covered:.3}"
        );
        assert!((measured - 0.5).abs() < 0.03, "half cover, got {measured:.3}");
    }

    #[test]
    fn adding_an_occluder_never_decreases_occlusion() {
        let tree = test_tree();
        let scene_clear = fixture_scene(vec![tree.clone()], vec![]);
        let pose = front_pose(&scene_clear);
        let frame_clear = render(&scene_clear, &pose);
        let base = &annotate(&scene_clear, &pose, &frame_clear)[0];

        let blocker = Billboard {
            position: Vec3::new(47.0, 49.6, 0.0),
            width: 0.5,
            height: 3.0,
            appearance_id: 0,
        };
        let scene_blocked = fixture_scene(vec![tree], vec![blocker]);
        let frame_blocked = render(&scene_blocked, &pose);
        let anns = annotate(&scene_blocked, &pose, &frame_blocked);
        if let Some(a) = anns.first() {
            assert!(a.occlusion_tree >= base.occlusion_tree);
            assert!(a.occlusion_base >= base.occlusion_base);
        }
    }

    #[test]
    fn keypoints_are_ordered_and_on_the_trunk() {
        let scene = fixture_scene(vec![test_tree()], vec![]);
        let pose = front_pose(&scene);
        let frame = render(&scene, &pose);
        let a = &annotate(&scene, &pose, &frame)[0];
        let [fc, dl, dr, mid, top] = a.keypoints;
        assert!(dl.u < dr.u, "diameter keypoints ordered left/right");
        // Felling cut sits between the diameter pair.
        assert!(fc.u > dl.u && fc.u < dr.u);
        // Straight tree seen level: inclination keypoints above (smaller v).
        assert!(mid.v < fc.v && top.v < mid.v);
        for kp in a.keypoints {
            assert_eq!(kp.flag, 2, "unoccluded fixture keypoints visible");
        }
        // Diameter separation reproduces the trunk width via the pinhole
        // relation within 5 % (fronto-parallel, unoccluded).
        let z_mid = frame.depth.get(fc.u.round() as u32, fc.v.round() as u32) as f64;
        let estimate = (dr.u - dl.u) * z_mid / scene.spec.camera.fx;
        let truth = 2.0 * 0.25;
        assert!((estimate - truth).abs() / truth < 0.05, "estimate {estimate:.4} vs {truth}");
    }

    #[test]
    fn far_trees_are_not_annotated() {
        let mut tree = test_tree();
        tree.base_position = Vec3::new(70.0, 50.0, 0.0); // 26 m away
        let scene = fixture_scene(vec![tree], vec![]);
        let pose = front_pose(&scene);
        let frame = render(&scene, &pose);
        assert!(annotate(&scene, &pose, &frame).is_empty());
    }
}
