//! Tree and understorey placement under altitude, slope, and density rules.

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::math::Vec3;
use crate::rng::{rng_for, Stream};

use super::render::Billboard;
use super::terrain::TerrainField;
use super::{DensityProfile, SceneSpec};

/// Maximum sampled trunk tilt from vertical (degrees). Annotations assume
/// leans stay well below 25°.
pub const MAX_LEAN_DEG: f64 = 12.0;

/// Number of appearance (bark/foliage texture) variants.
pub const APPEARANCE_VARIANTS: u32 = 17;

/// One placed tree: a tapered, leaned cylinder plus an occlusion-only crown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeInstance {
    pub id: u32,
    /// Trunk base on the terrain surface (world frame, meters).
    pub base_position: Vec3,
    pub trunk_radius: f64,
    pub height: f64,
    /// Unit trunk-axis direction, within `MAX_LEAN_DEG` of vertical.
    pub lean: Vec3,
    /// Radius reduction per meter along the axis, in [0, radius/height].
    pub taper: f64,
    pub appearance_id: u32,
}

impl TreeInstance {
    /// Trunk radius at arc length `s` along the axis.
    pub fn radius_at(&self, s: f64) -> f64 {
        (self.trunk_radius - self.taper * s).max(1e-4)
    }

    /// Point on the trunk axis at arc length `s`.
    pub fn axis_point(&self, s: f64) -> Vec3 {
        self.base_position + self.lean * s
    }

    /// Arc length along the (leaned) axis reaching `dz` meters above the base.
    pub fn arc_for_height(&self, dz: f64) -> f64 {
        dz / self.lean.z
    }

    /// Tilt from vertical in degrees.
    pub fn tilt_deg(&self) -> f64 {
        self.lean.z.clamp(-1.0, 1.0).acos().to_degrees()
    }
}

fn poisson_count(rng: &mut impl Rng, lambda: f64) -> usize {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).map(|p| p.sample(rng) as usize).unwrap_or(0)
}

/// Candidate ground positions per density profile, before spawn rules.
fn candidate_positions(terrain: &TerrainField, spec: &SceneSpec) -> Vec<(f64, f64)> {
    let size = terrain.size();
    let area_ha = size * size / 10_000.0;
    let expected = spec.tree_density * area_ha;
    if expected <= 0.0 {
        return Vec::new();
    }
    let mut rng = rng_for(spec.seed, Stream::TreeSpawn, 0, 0);
    match spec.density_profile {
        DensityProfile::Plantation => {
            let spacing = (10_000.0 / spec.tree_density).sqrt();
            let cells = (size / spacing).floor() as i64;
            let mut out = Vec::new();
            for j in 0..cells {
                for i in 0..cells {
                    let jitter = 0.3 * spacing;
                    let x = (i as f64 + 0.5) * spacing + rng.random_range(-jitter..jitter);
                    let y = (j as f64 + 0.5) * spacing + rng.random_range(-jitter..jitter);
                    out.push((x.clamp(0.0, size), y.clamp(0.0, size)));
                }
            }
            out
        }
        DensityProfile::Managed => {
            // Matérn-style thinning loses ~21 % of candidates at this radius;
            // oversample to land near the requested density.
            let spacing = (10_000.0 / spec.tree_density).sqrt();
            let r_min = 0.4 * spacing;
            let n = poisson_count(&mut rng, expected * 1.27);
            let cand: Vec<(f64, f64)> =
                (0..n).map(|_| (rng.random_range(0.0..size), rng.random_range(0.0..size))).collect();
            let mut kept: Vec<(f64, f64)> = Vec::with_capacity(cand.len());
            for (x, y) in cand {
                let ok = kept.iter().all(|&(kx, ky)| {
                    let (dx, dy) = (x - kx, y - ky);
                    dx * dx + dy * dy >= r_min * r_min
                });
                if ok {
                    kept.push((x, y));
                }
            }
            kept
        }
        DensityProfile::Natural => {
            // Thomas cluster process: Poisson parents with Gaussian-scattered
            // children. Parents extend past the border so edge density stays
            // uniform.
            let mean_children = 1.2;
            let scatter = 2.5;
            let margin = 3.0 * scatter;
            let ext = size + 2.0 * margin;
            let parent_lambda = expected / mean_children * (ext * ext) / (size * size);
            let n_parents = poisson_count(&mut rng, parent_lambda);
            let normal = Normal::new(0.0, scatter).unwrap();
            let mut out = Vec::new();
            for _ in 0..n_parents {
                let px = rng.random_range(-margin..size + margin);
                let py = rng.random_range(-margin..size + margin);
                let kids = poisson_count(&mut rng, mean_children);
                for _ in 0..kids {
                    let x = px + normal.sample(&mut rng);
                    let y = py + normal.sample(&mut rng);
                    if (0.0..=size).contains(&x) && (0.0..=size).contains(&y) {
                        out.push((x, y));
                    }
                }
            }
            out
        }
    }
}

/// Places trees: candidates from the density profile, filtered by the
/// slope and altitude spawn rules, each assigned random dimensions, lean,
/// taper and appearance. May return an empty list.
pub fn spawn_trees(terrain: &TerrainField, spec: &SceneSpec) -> Vec<TreeInstance> {
    let [alt_lo, alt_hi] = spec.altitude_band;
    let mut trees = Vec::new();
    for (i, (x, y)) in candidate_positions(terrain, spec).into_iter().enumerate() {
        let z = terrain.height_at(x, y);
        if terrain.slope_deg_at(x, y) > spec.max_slope_spawn + 1e-9 {
            continue;
        }
        if z < alt_lo - 1e-9 || z > alt_hi + 1e-9 {
            continue;
        }
        let mut rng = rng_for(spec.seed, Stream::TreeSpawn, 1, i as u64);
        let [r_lo, r_hi] = spec.trunk_radius_range;
        let [h_lo, h_hi] = spec.tree_height_range;
        let radius = if r_lo == r_hi { r_lo } else { rng.random_range(r_lo..r_hi) };
        let height = if h_lo == h_hi { h_lo } else { rng.random_range(h_lo..h_hi) };
        let tilt = rng.random_range(0.0..MAX_LEAN_DEG).to_radians();
        let azimuth = rng.random_range(0.0..std::f64::consts::TAU);
        let lean = Vec3::new(tilt.sin() * azimuth.cos(), tilt.sin() * azimuth.sin(), tilt.cos());
        let taper = rng.random_range(0.0..0.5 * radius / height);
        let appearance_id = rng.random_range(0..APPEARANCE_VARIANTS);
        trees.push(TreeInstance {
            id: trees.len() as u32,
            base_position: Vec3::new(x, y, z),
            trunk_radius: radius,
            height,
            lean,
            taper,
            appearance_id,
        });
    }
    trees
}

/// Grass/shrub billboard clumps; the understorey density scales their count.
pub fn spawn_understorey(terrain: &TerrainField, spec: &SceneSpec) -> Vec<Billboard> {
    let size = terrain.size();
    let area_ha = size * size / 10_000.0;
    let count = (spec.understorey_density * area_ha * 2500.0).round() as usize;
    let mut rng = rng_for(spec.seed, Stream::Understorey, 0, 0);
    (0..count)
        .map(|_| {
            let x = rng.random_range(0.0..size);
            let y = rng.random_range(0.0..size);
            let z = terrain.height_at(x, y);
            Billboard {
                position: Vec3::new(x, y, z),
                width: rng.random_range(0.3..1.1),
                height: rng.random_range(0.3..1.2),
                appearance_id: rng.random_range(0..APPEARANCE_VARIANTS),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::build_terrain;

    #[test]
    fn zero_density_spawns_nothing() {
        let spec = SceneSpec { tree_density: 0.0, ..Default::default() };
        let t = build_terrain(&spec).unwrap();
        assert!(spawn_trees(&t, &spec).is_empty());
    }

    #[test]
    fn zero_slope_rule_on_rough_terrain() {
        let spec = SceneSpec {
            max_slope_spawn: 0.0,
            altitude_band: [0.0, 8.0],
            tree_density: 500.0,
            ..Default::default()
        };
        let t = build_terrain(&spec).unwrap();
        for tree in spawn_trees(&t, &spec) {
            let s = t.slope_deg_at(tree.base_position.x, tree.base_position.y);
            assert!(s <= 1e-9, "tree on slope {s}°");
        }
    }

    #[test]
    fn tree_attributes_within_ranges() {
        let spec = SceneSpec { seed: 5, ..Default::default() };
        let t = build_terrain(&spec).unwrap();
        let trees = spawn_trees(&t, &spec);
        assert!(!trees.is_empty());
        for tree in &trees {
            assert!(tree.trunk_radius >= spec.trunk_radius_range[0] && tree.trunk_radius <= spec.trunk_radius_range[1]);
            assert!(tree.height >= spec.tree_height_range[0] && tree.height <= spec.tree_height_range[1]);
            assert!(tree.tilt_deg() <= 25.0, "lean invariant");
            assert!(tree.taper >= 0.0 && tree.taper <= tree.trunk_radius / tree.height);
            assert!((tree.lean.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn plantation_is_roughly_regular() {
        let spec = SceneSpec {
            density_profile: DensityProfile::Plantation,
            tree_density: 400.0,
            altitude_band: [0.0, 0.0],
            ..Default::default()
        };
        let t = build_terrain(&spec).unwrap();
        let trees = spawn_trees(&t, &spec);
        let expected = 400.0;
        assert!(
            (trees.len() as f64) > 0.85 * expected && (trees.len() as f64) < 1.15 * expected,
            "count {} vs expected {expected}",
            trees.len()
        );
    }

    #[test]
    fn managed_density_is_approximate() {
        let mut counts = Vec::new();
        for seed in 0..20 {
            let spec = SceneSpec {
                seed,
                density_profile: DensityProfile::Managed,
                tree_density: 400.0,
                altitude_band: [0.0, 0.0],
                ..Default::default()
            };
            let t = build_terrain(&spec).unwrap();
            counts.push(spawn_trees(&t, &spec).len() as f64);
        }
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        assert!((mean - 400.0).abs() < 60.0, "mean managed count {mean}");
    }
}
