//! Flat-shaded software rasterizer with a z-buffer.
//!
//! Geometry is tessellated to world-space triangles once per scene
//! (terrain heightfield mesh, tapered leaned trunk cylinders, occlusion-only
//! crown cones); understorey quads face the camera and are rebuilt per
//! pose. The depth buffer stores camera-frame z in meters. Lighting and
//! weather are deterministic image-space transforms.

use serde::{Deserialize, Serialize};

use crate::depth::DepthMap;
use crate::math::Vec3;
use crate::rng::{rng_for, Stream};

use super::camera::CameraPose;
use super::spawn::TreeInstance;
use super::terrain::TerrainField;
use super::{Lighting, SceneSpec, Weather};

/// Trunk ring tessellation; 32 segments keep the silhouette within 0.5 % of
/// the true cylinder radius.
const TRUNK_SEGMENTS: usize = 32;
const TRUNK_SLICES: usize = 6;
const CROWN_SEGMENTS: usize = 16;
const NEAR_PLANE: f64 = 0.05;
/// Depth ties resolve to the lower surface id.
const Z_TIE_EPS: f64 = 1e-9;

/// Per-pixel surface identity, encoded so that ordering is deterministic:
/// terrain < trunks (by tree id) < crowns < billboards < none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SurfId(pub u32);

impl SurfId {
    pub const NONE: SurfId = SurfId(u32::MAX);

    pub fn terrain() -> Self {
        SurfId(0)
    }

    pub fn trunk(tree_id: u32) -> Self {
        SurfId(0x0100_0000 | tree_id)
    }

    pub fn crown(tree_id: u32) -> Self {
        SurfId(0x0200_0000 | tree_id)
    }

    pub fn billboard(i: u32) -> Self {
        SurfId(0x0300_0000 | i)
    }

    pub fn as_trunk(self) -> Option<u32> {
        (self.0 & 0xFF00_0000 == 0x0100_0000).then_some(self.0 & 0x00FF_FFFF)
    }
}

/// A camera-facing understorey quad anchored on the ground.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Billboard {
    pub position: Vec3,
    pub width: f64,
    pub height: f64,
    pub appearance_id: u32,
}

/// One RGB-D frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedFrame {
    pub width: u32,
    pub height: u32,
    /// Row-major RGB, 3 bytes per pixel.
    pub rgb: Vec<u8>,
    /// Camera-frame z in meters; +∞ for sky.
    pub depth: DepthMap,
}

#[derive(Debug, Clone, Copy)]
struct Tri {
    v: [Vec3; 3],
    id: SurfId,
    color: [f32; 3],
}

/// A fully assembled scene: spec, terrain, trees, understorey, and the
/// tessellated static geometry.
pub struct SceneModel {
    pub spec: SceneSpec,
    pub terrain: TerrainField,
    pub trees: Vec<TreeInstance>,
    pub understorey: Vec<Billboard>,
    static_tris: Vec<Tri>,
    /// Per-tree (start, end) range of its trunk+crown triangles.
    tree_ranges: Vec<(usize, usize)>,
}

impl SceneModel {
    /// Assembles a scene from its spec: terrain, spawned trees, understorey,
    /// and all static meshes.
    pub fn build(spec: &SceneSpec) -> Result<SceneModel, super::SpecError> {
        let terrain = super::build_terrain(spec)?;
        let trees = super::spawn_trees(&terrain, spec);
        let understorey = super::spawn_understorey(&terrain, spec);
        Ok(SceneModel::assemble(spec.clone(), terrain, trees, understorey))
    }

    /// Assembles a scene from explicit parts; fixture scenes use this to
    /// place hand-positioned trees and occluders.
    pub fn assemble(
        spec: SceneSpec,
        terrain: TerrainField,
        trees: Vec<TreeInstance>,
        understorey: Vec<Billboard>,
    ) -> SceneModel {
        let sun = sun_direction(spec.lighting);
        let mut static_tris = Vec::new();
        mesh_terrain(&terrain, sun, &mut static_tris);
        let mut tree_ranges = Vec::with_capacity(trees.len());
        for tree in &trees {
            let start = static_tris.len();
            mesh_trunk(tree, sun, &mut static_tris);
            mesh_crown(tree, sun, &mut static_tris);
            tree_ranges.push((start, static_tris.len()));
        }
        SceneModel { spec, terrain, trees, understorey, static_tris, tree_ranges }
    }
}

fn sun_direction(lighting: Lighting) -> Vec3 {
    match lighting {
        Lighting::Morning => Vec3::new(0.8, 0.2, 0.45).normalized(),
        Lighting::Day => Vec3::new(0.15, 0.1, 1.0).normalized(),
        Lighting::Evening => Vec3::new(-0.8, -0.1, 0.35).normalized(),
        Lighting::Night => Vec3::new(0.0, 0.0, 1.0),
    }
}

fn shade(base: [f32; 3], normal: Vec3, sun: Vec3) -> [f32; 3] {
    let diffuse = normal.dot(sun).max(0.0) as f32;
    let l = 0.45 + 0.55 * diffuse;
    [base[0] * l, base[1] * l, base[2] * l]
}

fn tri_normal(v: [Vec3; 3]) -> Vec3 {
    (v[1] - v[0]).cross(v[2] - v[0]).normalized()
}

fn push_tri(tris: &mut Vec<Tri>, v: [Vec3; 3], id: SurfId, base: [f32; 3], sun: Vec3) {
    let mut n = tri_normal(v);
    if n.z < 0.0 {
        n = n * -1.0;
    }
    tris.push(Tri { v, id, color: shade(base, n, sun) });
}

fn appearance_tone(appearance_id: u32) -> f32 {
    0.8 + 0.4 * (appearance_id as f32 % 17.0) / 17.0
}

fn mesh_terrain(terrain: &TerrainField, sun: Vec3, out: &mut Vec<Tri>) {
    let (nx, ny) = terrain.grid_dims();
    let cell = terrain.cell_size();
    let heights = terrain.heights();
    let at = |ix: usize, iy: usize| {
        Vec3::new(ix as f64 * cell, iy as f64 * cell, heights[iy * nx + ix])
    };
    let (lo, hi) = heights.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = (hi - lo).max(1e-9);
    for iy in 0..ny - 1 {
        for ix in 0..nx - 1 {
            let p00 = at(ix, iy);
            let p10 = at(ix + 1, iy);
            let p01 = at(ix, iy + 1);
            let p11 = at(ix + 1, iy + 1);
            // Soil low, grass high.
            let t = (((p00.z - lo) / span) as f32).clamp(0.0, 1.0);
            let base = [0.32 + 0.08 * (1.0 - t), 0.30 + 0.22 * t, 0.16 + 0.06 * t];
            push_tri(out, [p00, p10, p11], SurfId::terrain(), base, sun);
            push_tri(out, [p00, p11, p01], SurfId::terrain(), base, sun);
        }
    }
}

fn trunk_frame(tree: &TreeInstance) -> (Vec3, Vec3) {
    let e1 = {
        let c = tree.lean.cross(Vec3::UP);
        if c.norm() < 1e-9 {
            Vec3::new(1.0, 0.0, 0.0)
        } else {
            c.normalized()
        }
    };
    let e2 = tree.lean.cross(e1).normalized();
    (e1, e2)
}

fn mesh_trunk(tree: &TreeInstance, sun: Vec3, out: &mut Vec<Tri>) {
    let (e1, e2) = trunk_frame(tree);
    let tone = appearance_tone(tree.appearance_id);
    let base = [0.42 * tone, 0.30 * tone, 0.20 * tone];
    let id = SurfId::trunk(tree.id);
    let ring = |s: f64| -> Vec<Vec3> {
        let c = tree.axis_point(s);
        let r = tree.radius_at(s);
        (0..TRUNK_SEGMENTS)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / TRUNK_SEGMENTS as f64;
                c + e1 * (r * a.cos()) + e2 * (r * a.sin())
            })
            .collect()
    };
    let mut prev = ring(0.0);
    for m in 1..=TRUNK_SLICES {
        let s = tree.height * m as f64 / TRUNK_SLICES as f64;
        let cur = ring(s);
        for k in 0..TRUNK_SEGMENTS {
            let k2 = (k + 1) % TRUNK_SEGMENTS;
            push_tri(out, [prev[k], prev[k2], cur[k2]], id, base, sun);
            push_tri(out, [prev[k], cur[k2], cur[k]], id, base, sun);
        }
        prev = cur;
    }
    // Top cap fan.
    let top_center = tree.axis_point(tree.height);
    for k in 0..TRUNK_SEGMENTS {
        let k2 = (k + 1) % TRUNK_SEGMENTS;
        push_tri(out, [prev[k], prev[k2], top_center], id, base, sun);
    }
}

fn mesh_crown(tree: &TreeInstance, sun: Vec3, out: &mut Vec<Tri>) {
    let tone = appearance_tone(tree.appearance_id);
    let base = [0.10 * tone, 0.32 * tone, 0.12 * tone];
    let id = SurfId::crown(tree.id);
    let (e1, e2) = trunk_frame(tree);
    let s0 = 0.55 * tree.height;
    let apex = tree.axis_point(1.08 * tree.height);
    let radius = (0.12 * tree.height).clamp(0.5, 2.5);
    let c = tree.axis_point(s0);
    let ring: Vec<Vec3> = (0..CROWN_SEGMENTS)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / CROWN_SEGMENTS as f64;
            c + e1 * (radius * a.cos()) + e2 * (radius * a.sin())
        })
        .collect();
    for k in 0..CROWN_SEGMENTS {
        let k2 = (k + 1) % CROWN_SEGMENTS;
        push_tri(out, [ring[k], ring[k2], apex], id, base, sun);
        push_tri(out, [ring[k], ring[k2], c], id, base, sun);
    }
}

fn billboard_tris(b: &Billboard, idx: u32, pose: &CameraPose, sun: Vec3, out: &mut Vec<Tri>) {
    let basis = pose.basis();
    // Cylindrical billboarding: horizontal camera right, world up.
    let mut right = Vec3::new(basis.right.x, basis.right.y, 0.0);
    if right.norm() < 1e-9 {
        right = Vec3::new(1.0, 0.0, 0.0);
    }
    let right = right.normalized();
    let half = right * (b.width / 2.0);
    let top = Vec3::UP * b.height;
    let p0 = b.position - half;
    let p1 = b.position + half;
    let p2 = p1 + top;
    let p3 = p0 + top;
    let tone = appearance_tone(b.appearance_id);
    let base = [0.14 * tone, 0.30 * tone, 0.10 * tone];
    let id = SurfId::billboard(idx);
    push_tri(out, [p0, p1, p2], id, base, sun);
    push_tri(out, [p0, p2, p3], id, base, sun);
}

/// Reusable rasterization buffers.
pub struct RenderTarget {
    pub width: u32,
    pub height: u32,
    pub zbuf: Vec<f64>,
    pub idbuf: Vec<SurfId>,
    pub colbuf: Vec<[f32; 3]>,
}

impl RenderTarget {
    pub fn new(width: u32, height: u32) -> Self {
        let n = (width as usize) * (height as usize);
        RenderTarget {
            width,
            height,
            zbuf: vec![f64::INFINITY; n],
            idbuf: vec![SurfId::NONE; n],
            colbuf: vec![[0.0; 3]; n],
        }
    }

    pub fn clear(&mut self) {
        self.zbuf.fill(f64::INFINITY);
        self.idbuf.fill(SurfId::NONE);
        self.colbuf.fill([0.0; 3]);
    }
}

fn rasterize_tri(target: &mut RenderTarget, pose: &CameraPose, basis: &super::camera::CamBasis, tri: &Tri) {
    let to_cam = |p: Vec3| {
        let d = p - pose.position;
        Vec3::new(d.dot(basis.right), d.dot(basis.down), d.dot(basis.forward))
    };
    let cam = [to_cam(tri.v[0]), to_cam(tri.v[1]), to_cam(tri.v[2])];

    // Clip against the near plane (Sutherland–Hodgman, one plane; a
    // triangle clips to at most 4 vertices).
    let mut poly = [Vec3::ZERO; 4];
    let mut len = 0usize;
    for i in 0..3 {
        let a = cam[i];
        let b = cam[(i + 1) % 3];
        let (ain, bin) = (a.z >= NEAR_PLANE, b.z >= NEAR_PLANE);
        if ain {
            poly[len] = a;
            len += 1;
        }
        if ain != bin {
            let t = (NEAR_PLANE - a.z) / (b.z - a.z);
            poly[len] = a + (b - a) * t;
            len += 1;
        }
    }
    if len < 3 {
        return;
    }

    let k = &pose.intrinsics;
    let project = |p: Vec3| -> (f64, f64, f64) {
        (k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy, 1.0 / p.z)
    };

    let first = project(poly[0]);
    for i in 1..len - 1 {
        let b = project(poly[i]);
        let c = project(poly[i + 1]);
        fill_screen_tri(target, first, b, c, tri.id, tri.color);
    }
}

fn fill_screen_tri(
    target: &mut RenderTarget,
    a: (f64, f64, f64),
    b: (f64, f64, f64),
    c: (f64, f64, f64),
    id: SurfId,
    color: [f32; 3],
) {
    let (w, h) = (target.width as i64, target.height as i64);
    let area = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    if area == 0.0 || !area.is_finite() {
        return;
    }
    // Orient counter-clockwise so the inside test is w ≥ 0 for all edges.
    let (b, c) = if area < 0.0 { (c, b) } else { (b, c) };
    let area = area.abs();

    let min_x = a.0.min(b.0).min(c.0).floor().max(0.0) as i64;
    let max_x = a.0.max(b.0).max(c.0).ceil().min(w as f64 - 1.0) as i64;
    let min_y = a.1.min(b.1).min(c.1).floor().max(0.0) as i64;
    let max_y = a.1.max(b.1).max(c.1).ceil().min(h as f64 - 1.0) as i64;
    if min_x > max_x || min_y > max_y {
        return;
    }

    for py in min_y..=max_y {
        let y = py as f64 + 0.5;
        let row = (py as usize) * target.width as usize;
        for px in min_x..=max_x {
            let x = px as f64 + 0.5;
            let w0 = (c.0 - b.0) * (y - b.1) - (c.1 - b.1) * (x - b.0);
            if w0 < 0.0 {
                continue;
            }
            let w1 = (a.0 - c.0) * (y - c.1) - (a.1 - c.1) * (x - c.0);
            if w1 < 0.0 {
                continue;
            }
            let w2 = (b.0 - a.0) * (y - a.1) - (b.1 - a.1) * (x - a.0);
            if w2 < 0.0 {
                continue;
            }
            let inv_z = (w0 * a.2 + w1 * b.2 + w2 * c.2) / area;
            if inv_z <= 0.0 {
                continue;
            }
            let z = 1.0 / inv_z;
            let idx = row + px as usize;
            let cur = target.zbuf[idx];
            let closer = z < cur - Z_TIE_EPS || ((z - cur).abs() <= Z_TIE_EPS && id < target.idbuf[idx]);
            if closer {
                target.zbuf[idx] = z;
                target.idbuf[idx] = id;
                target.colbuf[idx] = color;
            }
        }
    }
}

/// Rasterizes the scene's geometry (optionally restricted to one tree)
/// into `target`.
pub(crate) fn raster_pass(scene: &SceneModel, pose: &CameraPose, solo_tree: Option<usize>, target: &mut RenderTarget) {
    target.clear();
    let basis = pose.basis();
    let sun = sun_direction(scene.spec.lighting);
    match solo_tree {
        Some(tidx) => {
            let (start, end) = scene.tree_ranges[tidx];
            for tri in &scene.static_tris[start..end] {
                rasterize_tri(target, pose, &basis, tri);
            }
        }
        None => {
            for tri in &scene.static_tris {
                rasterize_tri(target, pose, &basis, tri);
            }
            let mut quad = Vec::with_capacity(2);
            for (i, b) in scene.understorey.iter().enumerate() {
                quad.clear();
                billboard_tris(b, i as u32, pose, sun, &mut quad);
                for tri in &quad {
                    rasterize_tri(target, pose, &basis, tri);
                }
            }
        }
    }
}

fn sky_color(lighting: Lighting, weather: Weather) -> [f32; 3] {
    let base = match lighting {
        Lighting::Morning => [0.75, 0.78, 0.85],
        Lighting::Day => [0.55, 0.70, 0.92],
        Lighting::Evening => [0.85, 0.60, 0.45],
        Lighting::Night => [0.04, 0.05, 0.10],
    };
    match weather {
        Weather::Clear => base,
        _ => [base[0] * 0.8 + 0.12, base[1] * 0.8 + 0.12, base[2] * 0.8 + 0.12],
    }
}

fn lighting_gain(lighting: Lighting) -> [f32; 3] {
    match lighting {
        Lighting::Morning => [1.02, 0.98, 0.90],
        Lighting::Day => [1.0, 1.0, 1.0],
        Lighting::Evening => [0.95, 0.80, 0.66],
        Lighting::Night => [0.16, 0.18, 0.26],
    }
}

fn fog_density(weather: Weather) -> f32 {
    match weather {
        Weather::Clear => 0.002,
        Weather::Fog => 0.12,
        Weather::Rain => 0.02,
        Weather::Snow => 0.03,
    }
}

/// Deterministic per-pose hash used to seed weather particles, so
/// re-rendering the same inputs is bit-identical.
fn pose_hash(pose: &CameraPose) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    let mut mix = |v: f64| {
        h ^= v.to_bits();
        h = h.wrapping_mul(0x1000_0000_01b3);
    };
    mix(pose.position.x);
    mix(pose.position.y);
    mix(pose.position.z);
    mix(pose.roll);
    mix(pose.pitch);
    mix(pose.yaw);
    h
}

fn compose_rgb(scene: &SceneModel, pose: &CameraPose, target: &RenderTarget) -> Vec<u8> {
    use rand::Rng;
    let (w, h) = (target.width as usize, target.height as usize);
    let lighting = scene.spec.lighting;
    let weather = scene.spec.weather;
    let sky = sky_color(lighting, weather);
    let gain = lighting_gain(lighting);
    let beta = fog_density(weather);
    let fog_col = {
        let s = sky_color(lighting, Weather::Fog);
        [s[0] * gain[0], s[1] * gain[1], s[2] * gain[2]]
    };

    let mut out = vec![0u8; w * h * 3];
    for i in 0..w * h {
        let (mut r, mut g, mut b) = if target.idbuf[i] == SurfId::NONE {
            (sky[0], sky[1], sky[2])
        } else {
            let c = target.colbuf[i];
            (c[0], c[1], c[2])
        };
        r *= gain[0];
        g *= gain[1];
        b *= gain[2];
        let depth = if target.zbuf[i].is_finite() { target.zbuf[i] as f32 } else { 200.0 };
        let f = 1.0 - (-beta * depth.min(200.0)).exp();
        r = r * (1.0 - f) + fog_col[0] * f;
        g = g * (1.0 - f) + fog_col[1] * f;
        b = b * (1.0 - f) + fog_col[2] * f;
        out[3 * i] = (r.clamp(0.0, 1.0) * 255.0) as u8;
        out[3 * i + 1] = (g.clamp(0.0, 1.0) * 255.0) as u8;
        out[3 * i + 2] = (b.clamp(0.0, 1.0) * 255.0) as u8;
    }

    // Particle streaks: seeded by (scene seed, pose), independent of
    // everything else.
    let mut rng = rng_for(scene.spec.seed ^ pose_hash(pose), Stream::Weather, 0, 0);
    let mut brighten = |x: i64, y: i64, amount: u8| {
        if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
            let i = 3 * (y as usize * w + x as usize);
            for c in 0..3 {
                out[i + c] = out[i + c].saturating_add(amount);
            }
        }
    };
    match weather {
        Weather::Rain => {
            let count = w * h / 700;
            for _ in 0..count {
                let x = rng.random_range(0..w as i64);
                let y = rng.random_range(0..h as i64);
                let len = rng.random_range(6..18);
                let slant = rng.random_range(-2..3);
                for t in 0..len {
                    brighten(x + slant * t / len, y + t, 28);
                }
            }
        }
        Weather::Snow => {
            let count = w * h / 350;
            for _ in 0..count {
                let x = rng.random_range(0..w as i64);
                let y = rng.random_range(0..h as i64);
                brighten(x, y, 70);
                brighten(x + 1, y, 45);
                brighten(x, y + 1, 45);
            }
        }
        _ => {}
    }
    out
}

/// Renders one frame, returning the RGB-D buffers together with the
/// per-pixel surface ids the annotator consumes.
pub fn render_with_ids(scene: &SceneModel, pose: &CameraPose) -> (RenderedFrame, Vec<SurfId>) {
    let (w, h) = (scene.spec.camera.width, scene.spec.camera.height);
    let mut target = RenderTarget::new(w, h);
    raster_pass(scene, pose, None, &mut target);
    let rgb = compose_rgb(scene, pose, &target);
    let depth_data: Vec<f32> = target
        .zbuf
        .iter()
        .map(|&z| if z.is_finite() { z as f32 } else { f32::INFINITY })
        .collect();
    let frame = RenderedFrame { width: w, height: h, rgb, depth: DepthMap::from_data(w, h, depth_data) };
    (frame, target.idbuf.clone())
}

/// Renders one frame. Pure function of (scene, pose): repeated calls
/// produce identical buffers.
pub fn render(scene: &SceneModel, pose: &CameraPose) -> RenderedFrame {
    render_with_ids(scene, pose).0
}
