//! Dense binary instance masks.

use serde::{Deserialize, Serialize};

/// A per-pixel binary mask, row-major, one byte per pixel (0 or 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mask {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl Mask {
    pub fn new(width: u32, height: u32) -> Self {
        Mask { width, height, data: vec![0; (width as usize) * (height as usize)] }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut m = Mask::new(width, height);
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    m.set(x, y, true);
                }
            }
        }
        m
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.data[(y as usize) * (self.width as usize) + x as usize] != 0
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        self.data[(y as usize) * (self.width as usize) + x as usize] = v as u8;
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|&b| b as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.data.iter().all(|&b| b == 0)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    /// Tight axis-aligned hull as `[x, y, w, h]` in pixels, or `None` for an
    /// empty mask. The box spans whole pixels: a single set pixel at (3, 5)
    /// yields `[3, 5, 1, 1]`.
    pub fn tight_bbox(&self) -> Option<[f64; 4]> {
        let (mut x0, mut y0) = (u32::MAX, u32::MAX);
        let (mut x1, mut y1) = (0u32, 0u32);
        let mut any = false;
        for y in 0..self.height {
            let row = &self.data[(y as usize) * self.width as usize..][..self.width as usize];
            for (x, &b) in row.iter().enumerate() {
                if b != 0 {
                    any = true;
                    let x = x as u32;
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        any.then(|| [x0 as f64, y0 as f64, (x1 - x0 + 1) as f64, (y1 - y0 + 1) as f64])
    }

    pub fn intersection_count(&self, other: &Mask) -> usize {
        debug_assert_eq!((self.width, self.height), (other.width, other.height));
        self.data.iter().zip(&other.data).filter(|(&a, &b)| a != 0 && b != 0).count()
    }

    pub fn union_count(&self, other: &Mask) -> usize {
        debug_assert_eq!((self.width, self.height), (other.width, other.height));
        self.data.iter().zip(&other.data).filter(|(&a, &b)| a != 0 || b != 0).count()
    }

    /// Morphological erosion (`px < 0`) or dilation (`px > 0`) with a
    /// 4-connected structuring element applied `|px|` times.
    pub fn morph(&self, px: i32) -> Mask {
        let mut cur = self.clone();
        let dilate = px > 0;
        for _ in 0..px.unsigned_abs() {
            let mut next = cur.clone();
            for y in 0..self.height {
                for x in 0..self.width {
                    let neighbors = [
                        (x > 0).then(|| cur.get(x - 1, y)),
                        (x + 1 < self.width).then(|| cur.get(x + 1, y)),
                        (y > 0).then(|| cur.get(x, y - 1)),
                        (y + 1 < self.height).then(|| cur.get(x, y + 1)),
                    ];
                    if dilate {
                        if !cur.get(x, y) && neighbors.iter().any(|n| n == &Some(true)) {
                            next.set(x, y, true);
                        }
                    } else if cur.get(x, y) && neighbors.iter().any(|n| n == &Some(false) || n.is_none()) {
                        next.set(x, y, false);
                    }
                }
            }
            cur = next;
        }
        cur
    }

    /// Rasterizes polygons (COCO-style flat `[x0, y0, x1, y1, ...]` rings)
    /// with even-odd fill sampled at pixel centers. Multiple rings combine
    /// by even-odd parity, so holes are supported.
    pub fn from_polygons(width: u32, height: u32, polygons: &[Vec<f64>]) -> Mask {
        let mut m = Mask::new(width, height);
        for y in 0..height {
            let py = y as f64 + 0.5;
            let mut crossings: Vec<f64> = Vec::new();
            for ring in polygons {
                let n = ring.len() / 2;
                if n < 3 {
                    continue;
                }
                for i in 0..n {
                    let (x0, y0) = (ring[2 * i], ring[2 * i + 1]);
                    let j = (i + 1) % n;
                    let (x1, y1) = (ring[2 * j], ring[2 * j + 1]);
                    if (y0 <= py && py < y1) || (y1 <= py && py < y0) {
                        crossings.push(x0 + (py - y0) / (y1 - y0) * (x1 - x0));
                    }
                }
            }
            crossings.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for pair in crossings.chunks_exact(2) {
                let x_start = (pair[0] - 0.5).ceil().max(0.0) as i64;
                let x_end = (pair[1] - 0.5).floor().min(width as f64 - 1.0) as i64;
                for x in x_start..=x_end {
                    m.set(x as u32, y, true);
                }
            }
        }
        m
    }
}
