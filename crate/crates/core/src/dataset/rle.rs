//! Run-length encoding of binary masks.
//!
//! COCO-compatible uncompressed counts: the mask is flattened column-major
//! and counts alternate background / foreground, starting with background.

use serde::{Deserialize, Serialize};

use crate::mask::Mask;

use super::DatasetError;

/// Uncompressed RLE. `size` is `[height, width]`, matching the COCO field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rle {
    pub size: [u32; 2],
    pub counts: Vec<u32>,
}

impl Rle {
    pub fn height(&self) -> u32 {
        self.size[0]
    }

    pub fn width(&self) -> u32 {
        self.size[1]
    }

    /// Foreground pixel count, computable without decoding.
    pub fn area(&self) -> u64 {
        self.counts.iter().skip(1).step_by(2).map(|&c| c as u64).sum()
    }
}

/// Encodes a mask column-major with alternating counts starting at background.
pub fn encode_rle(mask: &Mask) -> Rle {
    let (w, h) = (mask.width(), mask.height());
    let mut counts = Vec::new();
    let mut current = false; // runs start with background
    let mut run: u32 = 0;
    for x in 0..w {
        for y in 0..h {
            let v = mask.get(x, y);
            if v == current {
                run += 1;
            } else {
                counts.push(run);
                current = v;
                run = 1;
            }
        }
    }
    counts.push(run);
    Rle { size: [h, w], counts }
}

/// Decodes counts back to a dense mask; fails if the counts don't cover
/// exactly `w × h` pixels.
pub fn decode_rle(rle: &Rle, width: u32, height: u32) -> Result<Mask, DatasetError> {
    let expected = (width as u64) * (height as u64);
    let total: u64 = rle.counts.iter().map(|&c| c as u64).sum();
    if total != expected {
        return Err(DatasetError::RleLength { expected, actual: total });
    }
    let mut mask = Mask::new(width, height);
    let mut idx: u64 = 0;
    for (i, &count) in rle.counts.iter().enumerate() {
        let fg = i % 2 == 1;
        if fg {
            for k in idx..idx + count as u64 {
                let x = (k / height as u64) as u32;
                let y = (k % height as u64) as u32;
                mask.set(x, y, true);
            }
        }
        idx += count as u64;
    }
    Ok(mask)
}
