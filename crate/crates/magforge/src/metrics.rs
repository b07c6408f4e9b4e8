//! Full-reference reconstruction metrics on 8-bit code images.
//!
//! Both metrics work directly in code units with peak 255. PSNR uses an
//! infinity sentinel for identical images; note that `serde_json` renders
//! non-finite floats as `null`, so a serialized report of identical images
//! carries `"psnr": null`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::QuantizedImage;

/// Reconstruction quality of one image pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Root-mean-square error in code units, over all pixels and channels.
    pub rmse: f64,
    /// `20·log10(255 / rmse)` in dB; `+∞` exactly when `rmse` is zero.
    pub psnr: f64,
    /// Number of pixels compared.
    pub n_pixels: usize,
}

fn check_dims(a: &QuantizedImage, b: &QuantizedImage) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::DimensionMismatch {
            context: "metrics",
            expected: format!("{}x{}", a.width(), a.height()),
            actual: format!("{}x{}", b.width(), b.height()),
        });
    }
    Ok(())
}

/// Root-mean-square error between two code images, accumulated in `f64`
/// over every channel of every pixel.
pub fn rmse(a: &QuantizedImage, b: &QuantizedImage) -> Result<f64> {
    check_dims(a, b)?;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok((sum / a.data().len() as f64).sqrt())
}

/// Peak signal-to-noise ratio in dB with peak 255: `20·log10(255/rmse)`,
/// `+∞` for identical images.
pub fn psnr(a: &QuantizedImage, b: &QuantizedImage) -> Result<f64> {
    Ok(psnr_from_rmse(rmse(a, b)?))
}

/// The RMSE→PSNR mapping by itself, for aggregating pooled errors.
pub fn psnr_from_rmse(rmse: f64) -> f64 {
    if rmse == 0.0 {
        f64::INFINITY
    } else {
        20.0 * (255.0 / rmse).log10()
    }
}

/// Both metrics plus the pixel count, for reporting.
pub fn report(a: &QuantizedImage, b: &QuantizedImage) -> Result<MetricReport> {
    let rmse = rmse(a, b)?;
    Ok(MetricReport {
        rmse,
        psnr: psnr_from_rmse(rmse),
        n_pixels: a.width() * a.height(),
    })
}
