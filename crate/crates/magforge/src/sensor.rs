//! Sensor-realistic degradation: the second synthesis stage.
//!
//! A high-resolution linear-light composite becomes an observed LR frame
//! through the fixed chain *add sensor noise → encode to sRGB → anti-alias
//! and decimate → quantize to 8-bit*. The training target takes the same
//! chain with the noise step omitted, so input and target differ only by
//! the noise realization. Both paths are built from the same component
//! functions, which keeps them in lockstep by construction.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{
    area_resample, gaussian_blur_raw, linear_to_srgb, quantize, LinearImage, QuantizedImage,
    SrgbImage,
};
use crate::rng::{derive_seed, stream, Stream};

/// Stream salt separating sensor-noise draws from every other consumer of a
/// scene seed.
const SENSOR_SALT: u64 = 0x7365_6e73_6f72_6e7a;

/// Parameters of the degradation stage, recorded verbatim in sample
/// manifests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegradationParams {
    /// Electrons per unit linear intensity. Shot-noise variance at a pixel
    /// of value `v` is `v / shot_gain`; an infinite gain turns shot noise
    /// off exactly.
    pub shot_gain: f64,
    /// Read-noise standard deviation in linear intensity units.
    pub read_sigma: f64,
    /// Anti-alias Gaussian sigma in HR pixels, applied before decimation.
    pub aa_sigma: f64,
    /// Spatial decimation factor (HR → LR); matches the synthesis upsample.
    pub down_factor: f64,
    /// Seed from which per-frame noise streams derive.
    pub seed: u64,
}

impl DegradationParams {
    pub fn validate(&self) -> Result<()> {
        // NaN must fail too, hence not a plain `<=` comparison.
        if self.shot_gain.is_nan() || self.shot_gain <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "shot_gain must be positive, got {}",
                self.shot_gain
            )));
        }
        if !(self.read_sigma >= 0.0 && self.read_sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "read_sigma must be finite and non-negative, got {}",
                self.read_sigma
            )));
        }
        if !(self.aa_sigma >= 0.0 && self.aa_sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "aa_sigma must be finite and non-negative, got {}",
                self.aa_sigma
            )));
        }
        if !(self.down_factor >= 1.0 && self.down_factor.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "down_factor must be finite and >= 1, got {}",
                self.down_factor
            )));
        }
        Ok(())
    }

    /// Independent, reproducible noise stream for one frame of a sample.
    /// Frames A and B are distinct exposures, so they use distinct indices.
    pub fn noise_stream(&self, frame_index: u64) -> Stream {
        stream(derive_seed(self.seed ^ SENSOR_SALT, frame_index, 0))
    }

    /// A copy with all noise turned off exactly: infinite gain makes the
    /// shot term `sqrt(v/gain) * z` identically zero, and a zero read sigma
    /// zeroes the read term, so [`add_sensor_noise`] becomes a bitwise
    /// identity on in-range images.
    pub fn noiseless(&self) -> Self {
        Self {
            shot_gain: f64::INFINITY,
            read_sigma: 0.0,
            ..*self
        }
    }
}

/// Conventional anti-alias sigma for a given decimation factor.
pub fn default_aa_sigma(down_factor: f64) -> f64 {
    0.5 * down_factor
}

/// Add heteroscedastic sensor noise in linear light:
/// `out = clip(v + sqrt(v/shot_gain)·z₁ + read_sigma·z₂, 0, 1)` per value,
/// with both `z` standard normal. The draw order is row-major over pixels,
/// channels interleaved, shot draw before read draw. Deterministic given
/// the stream; expects `img` in `[0,1]` (clipping is a no-op then apart
/// from the noise itself).
pub fn add_sensor_noise(img: &LinearImage, p: &DegradationParams, rng: &mut Stream) -> LinearImage {
    debug_assert!(p.validate().is_ok());
    let mut out = img.clone();
    for v in out.data_mut() {
        let x = (*v as f64).max(0.0);
        let z_shot: f64 = StandardNormal.sample(rng);
        let z_read: f64 = StandardNormal.sample(rng);
        let noised = x + (x / p.shot_gain).sqrt() * z_shot + p.read_sigma * z_read;
        *v = noised.clamp(0.0, 1.0) as f32;
    }
    out
}

/// Gaussian anti-alias prefilter (sigma `aa_sigma`, skipped at zero)
/// followed by area-average decimation by `down_factor`. Output dimensions
/// are `round(dim / down_factor)`; a dimension that rounds below one is an
/// error. Constants pass through unchanged, and `down_factor = 1` with a
/// zero sigma is an exact identity.
pub fn downsample(img: &SrgbImage, p: &DegradationParams) -> Result<SrgbImage> {
    p.validate()?;
    let (w, h) = (img.width(), img.height());
    let out_w = decimated_dim(w, p.down_factor)?;
    let out_h = decimated_dim(h, p.down_factor)?;
    let pre = if p.aa_sigma > 0.0 {
        gaussian_blur_raw(img.data(), w, h, 3, p.aa_sigma)
    } else {
        img.data().to_vec()
    };
    let data: Vec<f32> = area_resample(&pre, w, h, 3, out_w, out_h)
        .into_iter()
        .map(|v| v.clamp(0.0, 1.0))
        .collect();
    SrgbImage::new(out_w, out_h, data)
}

fn decimated_dim(dim: usize, factor: f64) -> Result<usize> {
    let out = (dim as f64 / factor).round() as i64;
    if out < 1 {
        return Err(Error::DegenerateSize {
            context: "downsample",
            width: out,
            height: out,
        });
    }
    Ok(out as usize)
}

/// The shared tail of both degradation paths: encode to sRGB, anti-alias
/// and decimate, quantize. Input and target use this exact composition.
fn encode_decimate_quantize(lin: &LinearImage, p: &DegradationParams) -> Result<QuantizedImage> {
    Ok(quantize(&downsample(&linear_to_srgb(lin), p)?))
}

/// Degraded observed frame: sensor noise in linear light, then the shared
/// encode → downsample → quantize tail, in exactly that order with no other
/// processing.
pub fn degrade_input(
    j: &LinearImage,
    p: &DegradationParams,
    rng: &mut Stream,
) -> Result<QuantizedImage> {
    p.validate()?;
    encode_decimate_quantize(&add_sensor_noise(j, p, rng), p)
}

/// Noise-free ground-truth frame: the same encode → downsample → quantize
/// tail as [`degrade_input`] with the noise step omitted.
pub fn clean_ground_truth(j_amp: &LinearImage, p: &DegradationParams) -> Result<QuantizedImage> {
    p.validate()?;
    encode_decimate_quantize(j_amp, p)
}
