//! Seeded fractal value-noise heightfields.

use serde::{Deserialize, Serialize};

use super::{SceneSpec, SpecError};

/// Regular-grid heightfield with bilinear queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerrainField {
    nx: usize,
    ny: usize,
    cell_size: f64,
    heights: Vec<f64>,
}

impl TerrainField {
    pub fn flat(size: f64, cell_size: f64, height: f64) -> Self {
        let n = ((size / cell_size).round() as usize).max(1) + 1;
        TerrainField { nx: n, ny: n, cell_size, heights: vec![height; n * n] }
    }

    pub fn grid_dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    /// Side length in meters.
    pub fn size(&self) -> f64 {
        (self.nx - 1) as f64 * self.cell_size
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    fn at(&self, ix: usize, iy: usize) -> f64 {
        self.heights[iy * self.nx + ix]
    }

    /// Bilinear elevation query, clamped to the grid bounds.
    pub fn height_at(&self, x: f64, y: f64) -> f64 {
        let fx = (x / self.cell_size).clamp(0.0, (self.nx - 1) as f64);
        let fy = (y / self.cell_size).clamp(0.0, (self.ny - 1) as f64);
        let ix = (fx.floor() as usize).min(self.nx - 2);
        let iy = (fy.floor() as usize).min(self.ny - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let h00 = self.at(ix, iy);
        let h10 = self.at(ix + 1, iy);
        let h01 = self.at(ix, iy + 1);
        let h11 = self.at(ix + 1, iy + 1);
        h00 * (1.0 - tx) * (1.0 - ty) + h10 * tx * (1.0 - ty) + h01 * (1.0 - tx) * ty + h11 * tx * ty
    }

    /// Local slope in degrees from central differences at one cell size.
    pub fn slope_deg_at(&self, x: f64, y: f64) -> f64 {
        let d = self.cell_size;
        let dzdx = (self.height_at(x + d, y) - self.height_at(x - d, y)) / (2.0 * d);
        let dzdy = (self.height_at(x, y + d) - self.height_at(x, y - d)) / (2.0 * d);
        (dzdx * dzdx + dzdy * dzdy).sqrt().atan().to_degrees()
    }
}

fn hash2(seed: u64, xi: i64, yi: i64) -> f64 {
    let mut z = seed ^ (xi as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (yi as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

fn value_noise(seed: u64, x: f64, y: f64) -> f64 {
    let xi = x.floor() as i64;
    let yi = y.floor() as i64;
    let tx = smoothstep(x - xi as f64);
    let ty = smoothstep(y - yi as f64);
    let v00 = hash2(seed, xi, yi);
    let v10 = hash2(seed, xi + 1, yi);
    let v01 = hash2(seed, xi, yi + 1);
    let v11 = hash2(seed, xi + 1, yi + 1);
    v00 * (1.0 - tx) * (1.0 - ty) + v10 * tx * (1.0 - ty) + v01 * (1.0 - tx) * ty + v11 * tx * ty
}

const OCTAVES: u32 = 4;
const LACUNARITY: f64 = 2.0;
const PERSISTENCE: f64 = 0.5;

/// Builds the scene heightfield: fractal value noise min-max normalized so
/// the elevations span exactly the spec's altitude band. Deterministic in
/// the seed; a degenerate band yields flat terrain.
pub fn build_terrain(spec: &SceneSpec) -> Result<TerrainField, SpecError> {
    spec.validate()?;
    let target_cells = 128usize;
    let cell_size = spec.terrain_size / target_cells as f64;
    let n = target_cells + 1;

    let base_freq = 3.0 / spec.terrain_size;
    let mut raw = vec![0.0f64; n * n];
    for iy in 0..n {
        for ix in 0..n {
            let x = ix as f64 * cell_size;
            let y = iy as f64 * cell_size;
            let mut amp = 1.0;
            let mut freq = base_freq;
            let mut total = 0.0;
            for oct in 0..OCTAVES {
                total += amp * value_noise(spec.seed.wrapping_add(oct as u64), x * freq, y * freq);
                amp *= PERSISTENCE;
                freq *= LACUNARITY;
            }
            raw[iy * n + ix] = total;
        }
    }

    let [lo, hi] = spec.altitude_band;
    let (rmin, rmax) = raw.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = rmax - rmin;
    let heights = raw
        .into_iter()
        .map(|v| if span > 0.0 { lo + (v - rmin) / span * (hi - lo) } else { (lo + hi) / 2.0 })
        .collect();
    Ok(TerrainField { nx: n, ny: n, cell_size, heights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_band_is_flat() {
        let spec = SceneSpec { altitude_band: [0.0, 0.0], ..Default::default() };
        let t = build_terrain(&spec).unwrap();
        assert!(t.heights().iter().all(|&h| h == 0.0));
        assert_eq!(t.slope_deg_at(50.0, 50.0), 0.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = SceneSpec::default();
        let a = build_terrain(&spec).unwrap();
        let b = build_terrain(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let a = build_terrain(&SceneSpec { seed: 1, ..Default::default() }).unwrap();
        let b = build_terrain(&SceneSpec { seed: 2, ..Default::default() }).unwrap();
        assert!(a.heights().iter().zip(b.heights()).any(|(x, y)| x != y));
    }

    #[test]
    fn heights_span_the_band() {
        let spec = SceneSpec { altitude_band: [2.0, 9.0], ..Default::default() };
        let t = build_terrain(&spec).unwrap();
        let (min, max) = t.heights().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(min >= 2.0 - 1e-9 && max <= 9.0 + 1e-9);
        assert!((min - 2.0).abs() < 1e-9 && (max - 9.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_spec_rejected() {
        let spec = SceneSpec { trunk_radius_range: [0.3, 0.1], ..Default::default() };
        assert!(build_terrain(&spec).is_err());
    }

    #[test]
    fn bilinear_query_interpolates() {
        let t = TerrainField { nx: 2, ny: 2, cell_size: 1.0, heights: vec![0.0, 1.0, 0.0, 1.0] };
        assert!((t.height_at(0.5, 0.5) - 0.5).abs() < 1e-12);
        assert_eq!(t.height_at(0.0, 0.0), 0.0);
        assert_eq!(t.height_at(1.0, 0.0), 1.0);
    }
}
