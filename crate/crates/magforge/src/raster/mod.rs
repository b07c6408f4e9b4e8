//! Raster primitives shared by all pipeline stages.
//!
//! Three pixel representations move through the pipeline:
//!
//! * [`LinearImage`] — linear-light RGB, the working domain for compositing
//!   and noise injection (values nominally in `[0,1]`),
//! * [`SrgbImage`] — sRGB-encoded RGB in `[0,1]`, the display-referred signal
//!   prior to quantization,
//! * [`QuantizedImage`] — 8-bit codes, the emitted form.
//!
//! [`SoftMask`] is a single-channel alpha raster used for compositing.

mod filter;
mod png;
mod transfer;

pub use filter::{area_resample, gaussian_blur_raw, gaussian_taps, lanczos3, resample_raw};
pub use png::{load_gray_mask, load_srgb, save_mask, save_quantized, save_srgb_16bit};
pub use transfer::{linear_to_srgb_scalar, srgb_to_linear_scalar};

use crate::error::{Error, Result};

/// Linear-light HxWx3 raster. Values are nominally in `[0,1]` but may
/// transiently exceed that range before an explicit clip.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

/// sRGB-encoded HxWx3 raster with all values in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SrgbImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

/// 8-bit HxWx3 raster; `decode(code) = code / 255`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

/// HxW alpha raster in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftMask {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

fn check_dims(context: &'static str, width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::DegenerateSize {
            context,
            width: width as i64,
            height: height as i64,
        });
    }
    Ok(())
}

impl LinearImage {
    /// Wrap row-major HxWx3 data. All values must be finite.
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        check_dims("LinearImage", width, height)?;
        if data.len() != width * height * 3 {
            return Err(Error::DimensionMismatch {
                context: "LinearImage",
                expected: format!("{} values", width * height * 3),
                actual: format!("{} values", data.len()),
            });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite {
                context: "LinearImage",
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Constant-valued image.
    pub fn constant(width: usize, height: usize, value: f32) -> Self {
        Self::new(width, height, vec![value; width * height * 3]).expect("constant image")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    /// Pixel accessor; `x < width`, `y < height`.
    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, px: [f32; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&px);
    }

    /// Clip all values into `[0,1]` in place.
    pub fn clip_unit(&mut self) {
        for v in &mut self.data {
            *v = v.clamp(0.0, 1.0);
        }
    }

    /// Mean over every channel of every pixel.
    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }

    /// Multiply every value by a scalar.
    pub fn scaled(&self, factor: f32) -> Self {
        let data = self.data.iter().map(|&v| v * factor).collect();
        Self {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

impl SrgbImage {
    /// Wrap row-major HxWx3 data; all values must lie in `[0,1]`.
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        check_dims("SrgbImage", width, height)?;
        if data.len() != width * height * 3 {
            return Err(Error::DimensionMismatch {
                context: "SrgbImage",
                expected: format!("{} values", width * height * 3),
                actual: format!("{} values", data.len()),
            });
        }
        if !data.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)) {
            return Err(Error::NonFinite {
                context: "SrgbImage",
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn constant(width: usize, height: usize, value: f32) -> Self {
        Self::new(width, height, vec![value; width * height * 3]).expect("constant image")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

impl QuantizedImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims("QuantizedImage", width, height)?;
        if data.len() != width * height * 3 {
            return Err(Error::DimensionMismatch {
                context: "QuantizedImage",
                expected: format!("{} codes", width * height * 3),
                actual: format!("{} codes", data.len()),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// `code / 255` per channel.
    pub fn decode(&self) -> SrgbImage {
        let data = self
            .data
            .iter()
            .map(|&c| (c as f64 / 255.0) as f32)
            .collect();
        SrgbImage {
            width: self.width,
            height: self.height,
            data,
        }
    }

    /// Largest per-channel absolute code difference between two images.
    pub fn max_code_diff(&self, other: &QuantizedImage) -> Result<u8> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch {
                context: "max_code_diff",
                expected: format!("{}x{}", self.width, self.height),
                actual: format!("{}x{}", other.width, other.height),
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a.abs_diff(b))
            .max()
            .unwrap_or(0))
    }
}

impl SoftMask {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        check_dims("SoftMask", width, height)?;
        if data.len() != width * height {
            return Err(Error::DimensionMismatch {
                context: "SoftMask",
                expected: format!("{} values", width * height),
                actual: format!("{} values", data.len()),
            });
        }
        if !data.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)) {
            return Err(Error::NonFinite { context: "SoftMask" });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn constant(width: usize, height: usize, value: f32) -> Self {
        Self::new(width, height, vec![value; width * height]).expect("constant mask")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn value(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    /// Sum of all alpha values (soft area in pixels).
    pub fn soft_area(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum()
    }

    /// Centroid of the alpha mass in pixel coordinates.
    pub fn centroid(&self) -> (f64, f64) {
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut total = 0.0;
        for y in 0..self.height {
            for x in 0..self.width {
                let m = self.value(x, y) as f64;
                sx += m * x as f64;
                sy += m * y as f64;
                total += m;
            }
        }
        if total <= 0.0 {
            ((self.width as f64 - 1.0) / 2.0, (self.height as f64 - 1.0) / 2.0)
        } else {
            (sx / total, sy / total)
        }
    }
}

/// sRGB electro-optical transfer per channel. Rejects non-finite input.
pub fn srgb_to_linear(img: &SrgbImage) -> LinearImage {
    let data = img
        .data
        .iter()
        .map(|&v| srgb_to_linear_scalar(v as f64) as f32)
        .collect();
    LinearImage {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Inverse sRGB transfer; values are clipped into `[0,1]` before encoding.
pub fn linear_to_srgb(img: &LinearImage) -> SrgbImage {
    let data = img
        .data
        .iter()
        .map(|&v| linear_to_srgb_scalar((v as f64).clamp(0.0, 1.0)) as f32)
        .collect();
    SrgbImage {
        width: img.width,
        height: img.height,
        data,
    }
}

/// ADC model: `code = round(255 * x)` with ties away from zero.
pub fn quantize(img: &SrgbImage) -> QuantizedImage {
    let data = img
        .data
        .iter()
        .map(|&v| (255.0 * v as f64).round() as u8)
        .collect();
    QuantizedImage {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Separable Lanczos-3 resampling to `round(scale * dim)` per axis.
///
/// Tap rows are renormalized so constants are reproduced; boundaries reflect.
pub fn resample_lanczos(img: &LinearImage, scale: f64) -> Result<LinearImage> {
    let out_w = (scale * img.width as f64).round() as i64;
    let out_h = (scale * img.height as f64).round() as i64;
    resample_lanczos_to(img, out_w.max(0) as usize, out_h.max(0) as usize)
}

/// Lanczos-3 resampling to an explicit target size.
pub fn resample_lanczos_to(img: &LinearImage, out_w: usize, out_h: usize) -> Result<LinearImage> {
    check_dims("resample_lanczos", out_w, out_h)?;
    if out_w == img.width && out_h == img.height {
        // At unit scale every tap center is an integer, so the exact result
        // of the kernel sum is the input itself; skip the rounding noise.
        return Ok(img.clone());
    }
    let data = resample_raw(&img.data, img.width, img.height, 3, out_w, out_h);
    LinearImage::new(out_w, out_h, data)
}

/// Separable Gaussian blur with kernel radius `ceil(3 sigma)` and reflective
/// boundaries. `sigma = 0` is the identity.
pub fn gaussian_blur(img: &LinearImage, sigma: f64) -> LinearImage {
    if sigma <= 0.0 {
        return img.clone();
    }
    let data = gaussian_blur_raw(&img.data, img.width, img.height, 3, sigma);
    LinearImage {
        width: img.width,
        height: img.height,
        data,
    }
}
