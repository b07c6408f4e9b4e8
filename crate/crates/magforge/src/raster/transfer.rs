//! Scalar sRGB transfer functions (IEC 61966-2-1) and quantization helpers.
//!
//! All scalar math runs in `f64`; image-level wrappers cast to `f32` storage
//! at the end.

/// sRGB-encoded value to linear light.
///
/// Piecewise: `v / 12.92` below the toe threshold `0.04045`, otherwise
/// `((v + 0.055) / 1.055)^2.4`.
pub fn srgb_to_linear_scalar(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

/// Linear light to sRGB encoding; exact inverse of [`srgb_to_linear_scalar`]
/// up to floating-point rounding.
pub fn linear_to_srgb_scalar(v: f64) -> f64 {
    if v <= 0.003_130_8 {
        12.92 * v
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}
