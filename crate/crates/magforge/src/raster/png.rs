//! PNG input/output. Files are interpreted as sRGB-encoded.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma, Rgb};

use crate::error::{Error, Result};

use super::{QuantizedImage, SoftMask, SrgbImage};

fn open(path: &Path) -> Result<DynamicImage> {
    image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

/// Decode a PNG (or any supported format) into sRGB values `code / 255`.
pub fn load_srgb(path: &Path) -> Result<SrgbImage> {
    let rgb = open(path)?.into_rgb8();
    let (w, h) = rgb.dimensions();
    let data = rgb
        .into_raw()
        .into_iter()
        .map(|c| (c as f64 / 255.0) as f32)
        .collect();
    SrgbImage::new(w as usize, h as usize, data)
}

/// Decode a single-channel alpha raster; multi-channel files are reduced to
/// luma.
pub fn load_gray_mask(path: &Path) -> Result<SoftMask> {
    let gray = open(path)?.into_luma8();
    let (w, h) = gray.dimensions();
    let data = gray
        .into_raw()
        .into_iter()
        .map(|c| (c as f64 / 255.0) as f32)
        .collect();
    SoftMask::new(w as usize, h as usize, data)
}

/// Write an 8-bit RGB PNG.
pub fn save_quantized(path: &Path, img: &QuantizedImage) -> Result<()> {
    let buf: ImageBuffer<Rgb<u8>, _> = ImageBuffer::from_raw(
        img.width() as u32,
        img.height() as u32,
        img.data().to_vec(),
    )
    .expect("raster invariant guarantees buffer size");
    buf.save(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

/// Write a 16-bit RGB PNG (`code = round(65535 * v)`), used for inspection
/// outputs that must not lose precision to 8-bit quantization.
pub fn save_srgb_16bit(path: &Path, img: &SrgbImage) -> Result<()> {
    let data: Vec<u16> = img
        .data()
        .iter()
        .map(|&v| (65535.0 * v as f64).round() as u16)
        .collect();
    let buf: ImageBuffer<Rgb<u16>, _> =
        ImageBuffer::from_raw(img.width() as u32, img.height() as u32, data)
            .expect("raster invariant guarantees buffer size");
    buf.save(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}

/// Write a single-channel 8-bit PNG of a mask (inspection output).
pub fn save_mask(path: &Path, mask: &SoftMask) -> Result<()> {
    let data: Vec<u8> = mask
        .data()
        .iter()
        .map(|&v| (255.0 * v as f64).round() as u8)
        .collect();
    let buf: ImageBuffer<Luma<u8>, _> =
        ImageBuffer::from_raw(mask.width() as u32, mask.height() as u32, data)
            .expect("raster invariant guarantees buffer size");
    buf.save(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}
