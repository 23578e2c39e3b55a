//! Depth image files: 16-bit single-channel PNG in millimeters.
//!
//! Pixel value 0 means "no hit / missing"; values above 65534 mm saturate.
//! Reading maps 0 back to `f32::INFINITY` and everything else to meters.

use std::fs;
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageReader};

use crate::depth::DepthMap;

use super::DatasetError;

const MAX_MM: u32 = 65_534;

/// Converts meters to the stored millimeter code.
pub fn meters_to_code(m: f32) -> u16 {
    if !m.is_finite() || m <= 0.0 {
        return 0;
    }
    let mm = (m as f64 * 1000.0).round() as u32;
    mm.clamp(1, MAX_MM) as u16
}

/// Encodes a depth map to PNG bytes (deterministic for fixed input).
pub fn encode_depth(depth: &DepthMap) -> Result<Vec<u8>, DatasetError> {
    let (w, h) = (depth.width(), depth.height());
    let mut be_bytes = Vec::with_capacity((w as usize) * (h as usize) * 2);
    for &v in depth.data() {
        be_bytes.extend_from_slice(&meters_to_code(v).to_be_bytes());
    }
    let mut out = Vec::new();
    PngEncoder::new(&mut out)
        .write_image(&be_bytes, w, h, ExtendedColorType::L16)
        .map_err(|e| DatasetError::Image { message: e.to_string() })?;
    Ok(out)
}

pub fn write_depth(path: &Path, depth: &DepthMap) -> Result<(), DatasetError> {
    let bytes = encode_depth(depth)?;
    fs::write(path, bytes).map_err(|e| DatasetError::Io { path: path.display().to_string(), source: e })
}

pub fn read_depth(path: &Path) -> Result<DepthMap, DatasetError> {
    let reader = ImageReader::open(path)
        .map_err(|e| DatasetError::Io { path: path.display().to_string(), source: e })?;
    let img = reader
        .decode()
        .map_err(|e| DatasetError::Image { message: format!("{}: {e}", path.display()) })?;
    let buf = match img {
        DynamicImage::ImageLuma16(buf) => buf,
        other => {
            return Err(DatasetError::DepthFormat {
                path: path.display().to_string(),
                found: format!("{:?}", other.color()),
            })
        }
    };
    let (w, h) = (buf.width(), buf.height());
    let data = buf
        .into_raw()
        .into_iter()
        .map(|code| if code == 0 { f32::INFINITY } else { code as f32 / 1000.0 })
        .collect();
    Ok(DepthMap::from_data(w, h, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_conversion() {
        assert_eq!(meters_to_code(5.0), 5000);
        assert_eq!(meters_to_code(f32::INFINITY), 0);
        assert_eq!(meters_to_code(0.0), 0);
        // Saturation above 65.534 m.
        assert_eq!(meters_to_code(120.0), 65_534);
    }

    #[test]
    fn roundtrip_preserves_codes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.png");
        let mut d = DepthMap::new(8, 4);
        d.set(0, 0, 5.0);
        d.set(3, 2, 0.001);
        d.set(7, 3, 64.2);
        write_depth(&path, &d).unwrap();
        let back = read_depth(&path).unwrap();
        assert_eq!(back.get(0, 0), 5.0);
        assert_eq!(back.get(3, 2), 0.001);
        assert!(back.get(1, 1).is_infinite());
        // Byte-identical re-write.
        let first = std::fs::read(&path).unwrap();
        write_depth(&path, &back).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());
    }

    #[test]
    fn eight_bit_file_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gray8.png");
        let img = image::GrayImage::new(4, 4);
        img.save(&path).unwrap();
        match read_depth(&path) {
            Err(DatasetError::DepthFormat { .. }) => {}
            other => panic!("expected DepthFormat error, got {other:?}"),
        }
    }
}
