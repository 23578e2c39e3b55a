//! Camera poses: tree-to-tree sampling with bounded roll and pitch.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::CameraIntrinsics;
use crate::math::Vec3;
use crate::rng::{rng_for, Stream};

use super::spawn::TreeInstance;
use super::terrain::TerrainField;
use super::{SceneSpec, SpecError};

/// Per-scene frame budget when no explicit count is given: two frames per
/// tree, clamped to the 200–1000 band.
pub const FRAMES_PER_TREE: f64 = 2.0;
pub const MIN_AUTO_FRAMES: usize = 200;
pub const MAX_AUTO_FRAMES: usize = 1000;

pub fn auto_frame_count(n_trees: usize, per_tree: f64) -> usize {
    ((n_trees as f64 * per_tree).round() as usize).clamp(MIN_AUTO_FRAMES, MAX_AUTO_FRAMES)
}

/// Camera placement plus intrinsics. Angles are radians; yaw rotates about
/// world up, pitch positive looks up, roll rotates about the optical axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub position: Vec3,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub intrinsics: CameraIntrinsics,
}

/// Orthonormal camera basis: x right, y down, z forward.
#[derive(Debug, Clone, Copy)]
pub struct CamBasis {
    pub right: Vec3,
    pub down: Vec3,
    pub forward: Vec3,
}

impl CameraPose {
    pub fn basis(&self) -> CamBasis {
        let (sp, cp) = self.pitch.sin_cos();
        let (sy, cy) = self.yaw.sin_cos();
        let forward = Vec3::new(cp * cy, cp * sy, sp);
        let right0 = forward.cross(Vec3::UP).normalized();
        let down0 = forward.cross(right0);
        let (sr, cr) = self.roll.sin_cos();
        let right = right0 * cr + down0 * sr;
        let down = right0 * (-sr) + down0 * cr;
        CamBasis { right, down, forward }
    }

    pub fn world_to_camera(&self, p: Vec3) -> Vec3 {
        let b = self.basis();
        let d = p - self.position;
        Vec3::new(d.dot(b.right), d.dot(b.down), d.dot(b.forward))
    }

    /// Level camera looking along the direction to `target` (roll 0);
    /// convenient for fixture scenes.
    pub fn looking_at(position: Vec3, target: Vec3, intrinsics: CameraIntrinsics) -> Self {
        let d = target - position;
        let yaw = d.y.atan2(d.x);
        let pitch = d.z.atan2((d.x * d.x + d.y * d.y).sqrt());
        CameraPose { position, roll: 0.0, pitch, yaw, intrinsics }
    }
}

/// Samples `n` poses by moving from tree to tree: a random approach
/// azimuth and standoff, eye height above the terrain, pitch restricted to
/// both the configured ±range and the window that keeps the optical axis
/// on the target trunk, and yaw aimed at the trunk axis.
pub fn sample_camera_poses(
    trees: &[TreeInstance],
    terrain: &TerrainField,
    n: usize,
    spec: &SceneSpec,
) -> Result<Vec<CameraPose>, SpecError> {
    if trees.is_empty() {
        return Err(SpecError::NoTrees);
    }
    if n == 0 {
        return Err(SpecError::NoFrames);
    }
    let cam = &spec.camera;
    let size = terrain.size();

    // Visit order: a seeded shuffle so consecutive frames hop between trees.
    let mut order: Vec<usize> = (0..trees.len()).collect();
    use rand::seq::SliceRandom;
    order.shuffle(&mut rng_for(spec.seed, Stream::SceneOrder, 0, 0));

    let pitch_cap = cam.pitch_range_deg.to_radians();
    let mut poses = Vec::with_capacity(n);
    for frame in 0..n {
        let mut rng = rng_for(spec.seed, Stream::Camera, frame as u64, 0);
        let tree = &trees[order[frame % trees.len()]];
        let azimuth = rng.random_range(0.0..std::f64::consts::TAU);
        let [d_lo, d_hi] = cam.standoff_range;
        let standoff = if d_lo == d_hi { d_lo } else { rng.random_range(d_lo..d_hi) };

        let x = (tree.base_position.x + standoff * azimuth.cos()).clamp(0.0, size);
        let y = (tree.base_position.y + standoff * azimuth.sin()).clamp(0.0, size);
        let z = terrain.height_at(x, y) + cam.eye_height;
        let position = Vec3::new(x, y, z);

        let base = tree.base_position;
        let dxy_base = {
            let (dx, dy) = (base.x - x, base.y - y);
            (dx * dx + dy * dy).sqrt().max(0.3)
        };
        // Height (above the base) the optical axis will cross the trunk at.
        // First estimate the reachable window from the pitch cap, then pin
        // the exact pitch by aiming at a point on the (possibly leaning)
        // trunk axis; the axis then passes through that point exactly.
        let max_dz = (tree.height * tree.lean.z - 0.05).max(0.01);
        let win_lo = (z - dxy_base * pitch_cap.tan() - base.z).max(0.01);
        let win_hi = (z + dxy_base * pitch_cap.tan() - base.z).min(max_dz);
        let dz0 = if win_lo < win_hi { rng.random_range(win_lo..win_hi) } else { win_lo.min(max_dz) };

        let mut aim = tree.axis_point(tree.arc_for_height(dz0));
        let mut pitch = 0.0;
        for _ in 0..3 {
            let (dx, dy) = (aim.x - x, aim.y - y);
            let dxy_aim = (dx * dx + dy * dy).sqrt().max(0.3);
            pitch = ((aim.z - z) / dxy_aim).atan();
            if pitch.abs() <= pitch_cap {
                break;
            }
            pitch = pitch.clamp(-pitch_cap, pitch_cap);
            let dz = (z + dxy_aim * pitch.tan() - base.z).clamp(0.01, max_dz);
            aim = tree.axis_point(tree.arc_for_height(dz));
        }
        pitch = pitch.clamp(-pitch_cap, pitch_cap);
        let yaw = (aim.y - y).atan2(aim.x - x);

        let roll_cap = cam.roll_range_deg.to_radians();
        let roll = if roll_cap == 0.0 { 0.0 } else { rng.random_range(-roll_cap..roll_cap) };

        poses.push(CameraPose { position, roll, pitch, yaw, intrinsics: cam.intrinsics() });
    }
    Ok(poses)
}

/// Whether the pose's optical axis crosses the (tapered) trunk cylinder.
pub fn axis_hits_trunk(pose: &CameraPose, tree: &TreeInstance) -> bool {
    let b = pose.basis();
    // Sample the ray densely and test against the trunk axis distance.
    let mut t = 0.25;
    while t < 30.0 {
        let p = pose.position + b.forward * t;
        // Closest point on trunk axis segment.
        let rel = p - tree.base_position;
        let s = rel.dot(tree.lean).clamp(0.0, tree.height);
        let axis_pt = tree.axis_point(s);
        let dist = (p - axis_pt).norm();
        if dist <= tree.radius_at(s) {
            return true;
        }
        t += 0.02;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{build_terrain, spawn_trees};

    fn one_tree_scene() -> (SceneSpec, TerrainField, Vec<TreeInstance>) {
        let spec = SceneSpec { altitude_band: [0.0, 0.0], tree_density: 0.0, ..Default::default() };
        let terrain = build_terrain(&spec).unwrap();
        let tree = TreeInstance {
            id: 0,
            base_position: Vec3::new(50.0, 50.0, 0.0),
            trunk_radius: 0.2,
            height: 8.0,
            lean: Vec3::UP,
            taper: 0.01,
            appearance_id: 0,
        };
        (spec, terrain, vec![tree])
    }

    #[test]
    fn empty_tree_list_is_an_error() {
        let (spec, terrain, _) = one_tree_scene();
        assert!(matches!(sample_camera_poses(&[], &terrain, 5, &spec), Err(SpecError::NoTrees)));
    }

    #[test]
    fn single_pose_targets_the_trunk() {
        let (spec, terrain, trees) = one_tree_scene();
        let poses = sample_camera_poses(&trees, &terrain, 1, &spec).unwrap();
        assert_eq!(poses.len(), 1);
        assert!(axis_hits_trunk(&poses[0], &trees[0]), "optical axis must cross the trunk");
    }

    #[test]
    fn many_poses_all_target_trunks_and_respect_ranges() {
        let spec = SceneSpec { seed: 3, ..Default::default() };
        let terrain = build_terrain(&spec).unwrap();
        let trees = spawn_trees(&terrain, &spec);
        let poses = sample_camera_poses(&trees, &terrain, 500, &spec).unwrap();
        let cap = spec.camera.roll_range_deg.to_radians() + 1e-12;
        let pcap = spec.camera.pitch_range_deg.to_radians() + 1e-12;
        for p in &poses {
            assert!(p.roll.abs() <= cap, "roll {} out of range", p.roll.to_degrees());
            assert!(p.pitch.abs() <= pcap, "pitch {} out of range", p.pitch.to_degrees());
            assert!(p.position.z > terrain.height_at(p.position.x, p.position.y));
        }
        let mut order: Vec<usize> = (0..trees.len()).collect();
        use rand::seq::SliceRandom;
        order.shuffle(&mut crate::rng::rng_for(spec.seed, crate::rng::Stream::SceneOrder, 0, 0));
        let hits = poses
            .iter()
            .enumerate()
            .filter(|(i, p)| axis_hits_trunk(p, &trees[order[i % trees.len()]]))
            .count();
        assert!(hits as f64 >= 0.95 * poses.len() as f64, "{hits}/{} poses on target", poses.len());
    }

    #[test]
    fn basis_is_orthonormal() {
        let pose = CameraPose {
            position: Vec3::ZERO,
            roll: 0.1,
            pitch: -0.05,
            yaw: 2.3,
            intrinsics: CameraIntrinsics::synthetic_default(),
        };
        let b = pose.basis();
        assert!((b.right.norm() - 1.0).abs() < 1e-12);
        assert!((b.down.norm() - 1.0).abs() < 1e-12);
        assert!((b.forward.norm() - 1.0).abs() < 1e-12);
        assert!(b.right.dot(b.down).abs() < 1e-12);
        assert!(b.right.cross(b.down).dot(b.forward) > 0.999);
    }

    #[test]
    fn looking_at_points_forward() {
        let pose = CameraPose::looking_at(
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(5.0, 0.0, 1.0),
            CameraIntrinsics::synthetic_default(),
        );
        let c = pose.world_to_camera(Vec3::new(5.0, 0.0, 1.0));
        assert!((c.x.abs() < 1e-9) && (c.y.abs() < 1e-9) && (c.z - 5.0).abs() < 1e-9);
    }
}
