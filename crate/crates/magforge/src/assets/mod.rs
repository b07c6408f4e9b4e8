//! Asset sourcing and scene-entry preparation.
//!
//! Backgrounds and segmented foreground objects come either from user
//! directories (`backgrounds/*.png`, `foregrounds/<stem>.png` +
//! `foregrounds/<stem>_mask.png`) or from a built-in procedural generator
//! that keeps the test suite self-contained. Before compositing, every scene
//! runs the preparation stage: backgrounds are linearized, upsampled, mildly
//! blurred and re-noised to close the domain gap; foregrounds are adaptively
//! scaled to a target area fraction and photometrically aligned to the
//! background's statistics.

mod procedural;

pub use procedural::{procedural_catalog, procedural_catalog_sized};

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{
    gaussian_blur, gaussian_blur_raw, resample_lanczos, resample_raw, srgb_to_linear, LinearImage,
    SoftMask, SrgbImage,
};
use crate::rng::Stream;

/// Gaussian sigma used to soften hard-edged input masks.
pub const FEATHER_SIGMA_PX: f64 = 1.0;

/// An object crop ready for placement: linear-light image, soft alpha mask
/// of identical dimensions, and the mask's center of mass (the rotation
/// pivot).
#[derive(Debug, Clone)]
pub struct ForegroundObject {
    pub image: LinearImage,
    pub mask: SoftMask,
    pub pivot: (f64, f64),
}

impl ForegroundObject {
    /// Build from components, feathering hard-edged masks and validating
    /// that the mask carries real support.
    pub fn new(image: LinearImage, mask: SoftMask) -> Result<Self> {
        if image.width() != mask.width() || image.height() != mask.height() {
            return Err(Error::DimensionMismatch {
                context: "ForegroundObject",
                expected: format!("{}x{}", image.width(), image.height()),
                actual: format!("{}x{}", mask.width(), mask.height()),
            });
        }
        let mask = feather_if_binary(mask);
        if !mask.data().iter().any(|&v| v > 0.5) {
            return Err(Error::DegenerateMask);
        }
        let pivot = mask.centroid();
        Ok(Self { image, mask, pivot })
    }

    /// Half of the crop's diagonal, bounding how far any crop pixel can sit
    /// from the crop center (used for placement margins).
    pub fn half_diagonal(&self) -> f64 {
        let w = self.image.width() as f64;
        let h = self.image.height() as f64;
        0.5 * w.hypot(h)
    }
}

/// A mask with no intermediate values is a hard segmentation; soften it so
/// compositing stays sub-pixel smooth. Already-soft masks pass through.
fn feather_if_binary(mask: SoftMask) -> SoftMask {
    let is_binary = mask.data().iter().all(|&v| !(0.02..=0.98).contains(&v));
    if !is_binary {
        return mask;
    }
    let blurred = gaussian_blur_raw(
        mask.data(),
        mask.width(),
        mask.height(),
        1,
        FEATHER_SIGMA_PX,
    );
    let clamped = blurred.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
    SoftMask::new(mask.width(), mask.height(), clamped).expect("clamped mask is valid")
}

/// Where a catalog's pixels came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogOrigin {
    Directory,
    Procedural,
}

/// Decoded, immutable asset pool. Both lists are non-empty by construction.
#[derive(Debug, Clone)]
pub struct AssetCatalog {
    origin: CatalogOrigin,
    backgrounds: Vec<(String, SrgbImage)>,
    foregrounds: Vec<(String, SrgbImage, SoftMask)>,
}

impl AssetCatalog {
    fn validated(
        origin: CatalogOrigin,
        backgrounds: Vec<(String, SrgbImage)>,
        foregrounds: Vec<(String, SrgbImage, SoftMask)>,
    ) -> Result<Self> {
        if backgrounds.is_empty() || foregrounds.is_empty() {
            return Err(Error::EmptyCatalog);
        }
        Ok(Self {
            origin,
            backgrounds,
            foregrounds,
        })
    }

    pub fn origin(&self) -> CatalogOrigin {
        self.origin
    }

    pub fn n_backgrounds(&self) -> usize {
        self.backgrounds.len()
    }

    pub fn n_foregrounds(&self) -> usize {
        self.foregrounds.len()
    }

    pub fn background_id(&self, index: usize) -> &str {
        &self.backgrounds[index].0
    }

    pub fn background(&self, index: usize) -> &SrgbImage {
        &self.backgrounds[index].1
    }

    pub fn foreground_id(&self, index: usize) -> &str {
        &self.foregrounds[index].0
    }

    /// Linearize and feather one foreground entry into a placeable object.
    pub fn foreground_object(&self, index: usize) -> Result<ForegroundObject> {
        let (_, image, mask) = &self.foregrounds[index];
        ForegroundObject::new(srgb_to_linear(image), mask.clone())
    }
}

/// Scan `bg_dir` and `fg_dir` for decodable assets. Foreground images pair
/// with `<stem>_mask` files; entries that fail to decode or lack a mask are
/// skipped with a warning.
pub fn load_catalog(bg_dir: &Path, fg_dir: &Path) -> Result<AssetCatalog> {
    let mut backgrounds = Vec::new();
    for path in sorted_image_files(bg_dir)? {
        match crate::raster::load_srgb(&path) {
            Ok(img) => backgrounds.push((file_stem(&path), img)),
            Err(err) => log::warn!("skipping background {}: {err}", path.display()),
        }
    }

    let mut foregrounds = Vec::new();
    for path in sorted_image_files(fg_dir)? {
        let stem = file_stem(&path);
        if stem.ends_with("_mask") {
            continue;
        }
        let mask_path = path.with_file_name(format!(
            "{stem}_mask.{}",
            path.extension().and_then(|e| e.to_str()).unwrap_or("png")
        ));
        if !mask_path.exists() {
            log::warn!("skipping foreground {}: no mask file", path.display());
            continue;
        }
        let pair = crate::raster::load_srgb(&path)
            .and_then(|img| crate::raster::load_gray_mask(&mask_path).map(|m| (img, m)));
        match pair {
            Ok((img, mask)) if img.width() == mask.width() && img.height() == mask.height() => {
                foregrounds.push((stem, img, mask));
            }
            Ok(_) => log::warn!(
                "skipping foreground {}: mask dimensions differ",
                path.display()
            ),
            Err(err) => log::warn!("skipping foreground {}: {err}", path.display()),
        }
    }

    AssetCatalog::validated(CatalogOrigin::Directory, backgrounds, foregrounds)
}

fn sorted_image_files(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::MissingInput(dir.to_path_buf()));
    }
    let mut files: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.is_file()
                && matches!(
                    p.extension().and_then(|e| e.to_str()),
                    Some("png" | "PNG" | "jpg" | "jpeg")
                )
        })
        .collect();
    files.sort();
    Ok(files)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("asset")
        .to_string()
}

/// Ranges for background domain-gap matching: mild blur and re-noising.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackgroundPrep {
    /// Blur sigma range in HR pixels.
    pub blur_sigma: (f64, f64),
    /// Additive Gaussian noise sigma range in linear intensity units.
    pub noise_sigma: (f64, f64),
}

impl Default for BackgroundPrep {
    fn default() -> Self {
        Self {
            blur_sigma: (0.3, 1.0),
            noise_sigma: (0.002, 0.01),
        }
    }
}

/// Ranges for foreground preparation: target mask-area fraction of the
/// background, and the sharpness-matching blur.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForegroundAlign {
    /// Target soft-mask area as a fraction of background area.
    pub area_fraction: (f64, f64),
    /// Sharpness-matching blur sigma range in pixels.
    pub blur_sigma: (f64, f64),
}

impl Default for ForegroundAlign {
    fn default() -> Self {
        Self {
            area_fraction: (0.005, 0.04),
            blur_sigma: (0.3, 1.0),
        }
    }
}

fn draw_range(rng: &mut Stream, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        lo + rng.gen::<f64>() * (hi - lo)
    }
}

fn add_gaussian_noise(img: &mut LinearImage, sigma: f64, rng: &mut Stream) {
    if sigma <= 0.0 {
        return;
    }
    for v in img.data_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *v = (*v as f64 + sigma * z) as f32;
    }
}

/// Linearize, upsample by `s`, then close the domain gap with a mild blur
/// and noise injection (sigmas drawn from `prep`, in that order). Result is
/// clipped to `[0,1]`.
pub fn prepare_background(
    src: &SrgbImage,
    s: f64,
    prep: &BackgroundPrep,
    rng: &mut Stream,
) -> Result<LinearImage> {
    let lin = srgb_to_linear(src);
    let up = resample_lanczos(&lin, s)?;
    Ok(finish_background(up, prep, rng))
}

/// Same preparation as [`prepare_background`], but center-cropping the
/// source to the target aspect ratio and resampling straight to exact
/// `out_w` x `out_h` dimensions (sources of arbitrary size feed a canvas of
/// fixed size).
pub fn prepare_background_to(
    src: &SrgbImage,
    out_w: usize,
    out_h: usize,
    prep: &BackgroundPrep,
    rng: &mut Stream,
) -> Result<LinearImage> {
    let lin = srgb_to_linear(src);
    let cropped = center_crop_to_aspect(&lin, out_w, out_h);
    let data = resample_raw(
        cropped.data(),
        cropped.width(),
        cropped.height(),
        3,
        out_w,
        out_h,
    );
    let up = LinearImage::new(out_w, out_h, data)?;
    Ok(finish_background(up, prep, rng))
}

fn finish_background(mut img: LinearImage, prep: &BackgroundPrep, rng: &mut Stream) -> LinearImage {
    let sigma_b = draw_range(rng, prep.blur_sigma);
    let sigma_n = draw_range(rng, prep.noise_sigma);
    if sigma_b > 0.0 {
        img = gaussian_blur(&img, sigma_b);
    }
    add_gaussian_noise(&mut img, sigma_n, rng);
    img.clip_unit();
    img
}

fn center_crop_to_aspect(img: &LinearImage, out_w: usize, out_h: usize) -> LinearImage {
    let (w, h) = (img.width(), img.height());
    let target = out_w as f64 / out_h as f64;
    let current = w as f64 / h as f64;
    let (cw, ch) = if current > target {
        (((h as f64 * target).round() as usize).clamp(1, w), h)
    } else {
        (w, ((w as f64 / target).round() as usize).clamp(1, h))
    };
    if (cw, ch) == (w, h) {
        return img.clone();
    }
    let x0 = (w - cw) / 2;
    let y0 = (h - ch) / 2;
    let mut data = Vec::with_capacity(cw * ch * 3);
    for y in y0..y0 + ch {
        let row = &img.data()[(y * w + x0) * 3..(y * w + x0 + cw) * 3];
        data.extend_from_slice(row);
    }
    LinearImage::new(cw, ch, data).expect("crop preserves validity")
}

/// Weighted Rec. 709 luminance statistics of an object crop (weights =
/// mask), and plain statistics of a background.
fn luminance(px: [f32; 3]) -> f64 {
    0.2126 * px[0] as f64 + 0.7152 * px[1] as f64 + 0.0722 * px[2] as f64
}

fn masked_luminance_stats(img: &LinearImage, mask: &SoftMask) -> (f64, f64) {
    let mut wsum = 0.0;
    let mut mean = 0.0;
    for y in 0..img.height() {
        for x in 0..img.width() {
            let m = mask.value(x, y) as f64;
            wsum += m;
            mean += m * luminance(img.pixel(x, y));
        }
    }
    mean /= wsum.max(1e-12);
    let mut var = 0.0;
    for y in 0..img.height() {
        for x in 0..img.width() {
            let m = mask.value(x, y) as f64;
            let d = luminance(img.pixel(x, y)) - mean;
            var += m * d * d;
        }
    }
    (mean, (var / wsum.max(1e-12)).sqrt())
}

fn image_luminance_stats(img: &LinearImage) -> (f64, f64) {
    let n = (img.width() * img.height()) as f64;
    let mut mean = 0.0;
    for y in 0..img.height() {
        for x in 0..img.width() {
            mean += luminance(img.pixel(x, y));
        }
    }
    mean /= n;
    let mut var = 0.0;
    for y in 0..img.height() {
        for x in 0..img.width() {
            let d = luminance(img.pixel(x, y)) - mean;
            var += d * d;
        }
    }
    (mean, (var / n).sqrt())
}

/// Padding (px) kept around the mask-support bounding box when tightening a
/// crop; covers the bicubic sampling stencil at the support edge.
const TIGHT_CROP_PAD: usize = 3;

/// Shrink a crop to the bounding box of its mask support plus
/// [`TIGHT_CROP_PAD`]. Mask area is untouched, so adaptive scaling is
/// unaffected, but placement margins stop paying for dead crop border.
fn tight_crop(image: &LinearImage, mask: &SoftMask) -> Option<(LinearImage, SoftMask)> {
    let (w, h) = (mask.width(), mask.height());
    let (mut x0, mut y0, mut x1, mut y1) = (w, h, 0usize, 0usize);
    for y in 0..h {
        for x in 0..w {
            if mask.value(x, y) > 0.0 {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
    }
    if x0 > x1 {
        return None; // empty support
    }
    let x0 = x0.saturating_sub(TIGHT_CROP_PAD);
    let y0 = y0.saturating_sub(TIGHT_CROP_PAD);
    let x1 = (x1 + TIGHT_CROP_PAD).min(w - 1);
    let y1 = (y1 + TIGHT_CROP_PAD).min(h - 1);
    let (cw, ch) = (x1 - x0 + 1, y1 - y0 + 1);
    if (cw, ch) == (w, h) {
        return Some((image.clone(), mask.clone()));
    }
    let mut img_data = Vec::with_capacity(cw * ch * 3);
    let mut mask_data = Vec::with_capacity(cw * ch);
    for y in y0..=y1 {
        let row = (y * w + x0) * 3;
        img_data.extend_from_slice(&image.data()[row..row + cw * 3]);
        let mrow = y * w + x0;
        mask_data.extend_from_slice(&mask.data()[mrow..mrow + cw]);
    }
    Some((
        LinearImage::new(cw, ch, img_data).expect("crop preserves validity"),
        SoftMask::new(cw, ch, mask_data).expect("crop preserves validity"),
    ))
}

/// Prepare one foreground for a specific background: tight-crop to the mask
/// support, adaptive scaling to a drawn area fraction, sharpness-matching
/// blur, then a luminance gain/offset that matches the masked mean/std to
/// the background's statistics (std matching is skipped when either std is
/// below 1e-3). Draw order from `rng`: area fraction, then blur sigma.
pub fn align_foreground(
    obj: &ForegroundObject,
    bg: &LinearImage,
    cfg: &ForegroundAlign,
    rng: &mut Stream,
) -> Result<ForegroundObject> {
    // Drop any dead border first: scaling targets mask area, so a sparse
    // mask in a roomy crop would otherwise balloon the crop (and with it
    // every placement margin) without adding a single visible pixel.
    let (src_image, src_mask) =
        tight_crop(&obj.image, &obj.mask).ok_or(Error::DegenerateMask)?;

    // (a) Adaptive scaling toward the drawn area fraction.
    let fraction = draw_range(rng, cfg.area_fraction);
    let target_area = fraction * (bg.width() * bg.height()) as f64;
    let current_area = src_mask.soft_area();
    if current_area <= 0.0 {
        return Err(Error::DegenerateMask);
    }
    let scale = (target_area / current_area).sqrt();
    let new_w = ((src_image.width() as f64 * scale).round() as usize).max(1);
    let new_h = ((src_image.height() as f64 * scale).round() as usize).max(1);
    let image_data = resample_raw(
        src_image.data(),
        src_image.width(),
        src_image.height(),
        3,
        new_w,
        new_h,
    );
    let mask_data: Vec<f32> = resample_raw(
        src_mask.data(),
        src_mask.width(),
        src_mask.height(),
        1,
        new_w,
        new_h,
    )
    .into_iter()
    .map(|v| v.clamp(0.0, 1.0))
    .collect();
    let mut image = LinearImage::new(new_w, new_h, image_data)?;
    let mask = SoftMask::new(new_w, new_h, mask_data)?;
    if mask.soft_area() <= 0.0 || !mask.data().iter().any(|&v| v > 0.5) {
        return Err(Error::DegenerateMask);
    }

    // (b) Sharpness matching. Applied before the statistical remap so the
    // final masked statistics match the background exactly (blurring after
    // would shrink the matched std).
    let sigma = draw_range(rng, cfg.blur_sigma);
    if sigma > 0.0 {
        image = gaussian_blur(&image, sigma);
    }

    // (c) Statistical alignment: one affine gain/offset on all channels.
    let (obj_mean, obj_std) = masked_luminance_stats(&image, &mask);
    let (bg_mean, bg_std) = image_luminance_stats(bg);
    let gain = if obj_std > 1e-3 && bg_std > 1e-3 {
        bg_std / obj_std
    } else {
        1.0
    };
    let offset = bg_mean - gain * obj_mean;
    for v in image.data_mut() {
        *v = ((gain * *v as f64 + offset).clamp(0.0, 1.0)) as f32;
    }

    ForegroundObject::new(image, mask)
}
