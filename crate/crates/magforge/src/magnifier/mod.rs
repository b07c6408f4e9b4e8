//! Latent motion magnification math, desk-scale and forward-only.
//!
//! Three latent-space operations drive the magnifier: amplification of a
//! feature difference ([`manipulate`]), subtractive refinement of static
//! content ([`static_refine`]), and decoding of the recombined latents
//! ([`fuse`]). The learned networks that would sit at `M`, `S`, and `D` are
//! not available, so those slots take pluggable [`LatentOperator`]s —
//! identity, zero, or a small seeded random channel mixer — and correctness
//! rests on the algebraic identities the real operators must also satisfy.
//! The [`scan`] submodule supplies the selective state-space primitive used
//! to refine amplified latents; [`DemoChain`] wires everything into a
//! runnable two-frame chain.

pub mod scan;

pub use scan::{
    scan_jvp, selective_scan_1d, selective_scan_1d_dense, selective_scan_2d, ScanParams,
};

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::raster::SrgbImage;
use crate::rng::stream;

/// Block depth a full-size model would stack; the reference chain evaluates
/// a single block, whose properties are depth-independent.
pub const DEFAULT_BLOCK_COUNT: usize = 12;

/// Default spatial reduction between the shallow and deep feature paths of
/// the demo chain.
pub const DEFAULT_DEEP_FACTOR: usize = 4;

/// Default weight scale of [`LatentOperator::Random`].
pub const DEFAULT_RANDOM_SCALE: f64 = 0.1;

/// Dense real-valued feature stack, `channels` planes of `height`x`width`,
/// stored channel-major (`data[c][y][x]` flattened). All values finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl FeatureMap {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 || data.len() != channels * height * width {
            return Err(Error::DimensionMismatch {
                context: "FeatureMap",
                expected: format!("{channels}x{height}x{width}"),
                actual: format!("{} values", data.len()),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "FeatureMap",
            });
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
            data: vec![0.0; channels * height * width],
        }
    }

    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, y, x));
                }
            }
        }
        Self {
            channels,
            height,
            width,
            data,
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn set(&mut self, c: usize, y: usize, x: usize, v: f64) {
        self.data[(c * self.height + y) * self.width + x] = v;
    }

    /// Spatial transpose of every channel plane (h and w swap).
    pub fn transposed(&self) -> Self {
        let mut out = Self::zeros(self.channels, self.width, self.height);
        for c in 0..self.channels {
            for y in 0..self.height {
                for x in 0..self.width {
                    out.set(c, x, y, self.get(c, y, x));
                }
            }
        }
        out
    }

    /// Elementwise combine with a same-shaped map, in place.
    pub fn zip_in_place(
        &mut self,
        other: &FeatureMap,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<()> {
        check_same_shape("zip_in_place", self, other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = f(*a, *b);
        }
        Ok(())
    }

    /// Largest absolute elementwise difference to a same-shaped map.
    pub fn max_abs_diff(&self, other: &FeatureMap) -> Result<f64> {
        check_same_shape("max_abs_diff", self, other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

fn check_same_shape(context: &'static str, a: &FeatureMap, b: &FeatureMap) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            context,
            expected: format!("{:?}", a.shape()),
            actual: format!("{:?}", b.shape()),
        });
    }
    Ok(())
}

/// A pluggable stand-in for a learned latent operator. `Identity` and
/// `Zero` pin down algebraic collapses; `Random` is a deterministic, seeded
/// near-identity channel mixer (`W = I + scale·G`, `G` standard normal)
/// that is linear — so it maps zero to zero — while still scrambling
/// channels enough to catch ordering mistakes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LatentOperator {
    Identity,
    Zero,
    Random { seed: u64, scale: f64 },
}

impl LatentOperator {
    /// Random mixer at the default scale.
    pub fn random(seed: u64) -> Self {
        Self::Random {
            seed,
            scale: DEFAULT_RANDOM_SCALE,
        }
    }

    /// Apply the operator to a feature map.
    pub fn apply(&self, f: &FeatureMap) -> FeatureMap {
        match *self {
            Self::Identity => f.clone(),
            Self::Zero => FeatureMap::zeros(f.channels, f.height, f.width),
            Self::Random { seed, scale } => {
                assert!(scale.is_finite(), "random operator scale must be finite");
                let c = f.channels;
                let mut rng = stream(seed);
                // Row-major C×C mixing matrix, identity plus scaled noise.
                let mut w = vec![0.0f64; c * c];
                for (i, wi) in w.iter_mut().enumerate() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *wi = scale * z + if i % (c + 1) == 0 { 1.0 } else { 0.0 };
                }
                let plane = f.height * f.width;
                let mut out = FeatureMap::zeros(c, f.height, f.width);
                for ci in 0..c {
                    for ck in 0..c {
                        let wv = w[ci * c + ck];
                        if wv == 0.0 {
                            continue;
                        }
                        let src = &f.data[ck * plane..(ck + 1) * plane];
                        let dst = &mut out.data[ci * plane..(ci + 1) * plane];
                        for (d, s) in dst.iter_mut().zip(src) {
                            *d += wv * s;
                        }
                    }
                }
                out
            }
        }
    }
}

/// Amplified recombination of two feature maps:
/// `out = fa + M(alpha · (fb − fa))`.
///
/// With `M = Identity` the expression is the straight line through the two
/// maps, and it is evaluated in blended form `(1−alpha)·fa + alpha·fb` —
/// the same real value — so that `alpha = 1` returns `fb` bitwise and
/// integer-alpha arithmetic stays exact.
pub fn manipulate(
    fa: &FeatureMap,
    fb: &FeatureMap,
    alpha: f64,
    m: &LatentOperator,
) -> Result<FeatureMap> {
    check_same_shape("manipulate", fa, fb)?;
    if matches!(m, LatentOperator::Identity) {
        let data = fa
            .data
            .iter()
            .zip(&fb.data)
            .map(|(a, b)| (1.0 - alpha) * a + alpha * b)
            .collect();
        return FeatureMap::new(fa.channels, fa.height, fa.width, data);
    }
    let diff = FeatureMap {
        channels: fa.channels,
        height: fa.height,
        width: fa.width,
        data: fa
            .data
            .iter()
            .zip(&fb.data)
            .map(|(a, b)| alpha * (b - a))
            .collect(),
    };
    let mut out = m.apply(&diff);
    out.zip_in_place(fa, |residual, base| base + residual)?;
    Ok(out)
}

/// Subtractive refinement of static content:
/// `out = fah − S(fah − fbh)`.
///
/// `S = Identity` collapses algebraically to `fbh`, which is returned
/// directly so the collapse is exact rather than accurate to rounding.
pub fn static_refine(
    fah: &FeatureMap,
    fbh: &FeatureMap,
    s: &LatentOperator,
) -> Result<FeatureMap> {
    check_same_shape("static_refine", fah, fbh)?;
    if matches!(s, LatentOperator::Identity) {
        return Ok(fbh.clone());
    }
    let diff = FeatureMap {
        channels: fah.channels,
        height: fah.height,
        width: fah.width,
        data: fah.data.iter().zip(&fbh.data).map(|(a, b)| a - b).collect(),
    };
    let mut out = s.apply(&diff);
    out.zip_in_place(fah, |suppressed, base| base - suppressed)?;
    Ok(out)
}

/// Decode the sum of the upsampled dynamic latent and the refined static
/// features: `out = D(zu + fsr)`.
pub fn fuse(zu: &FeatureMap, fsr: &FeatureMap, d: &LatentOperator) -> Result<FeatureMap> {
    check_same_shape("fuse", zu, fsr)?;
    let sum = FeatureMap {
        channels: zu.channels,
        height: zu.height,
        width: zu.width,
        data: zu.data.iter().zip(&fsr.data).map(|(a, b)| a + b).collect(),
    };
    Ok(d.apply(&sum))
}

/// Average-pool each channel plane by an integer factor; both spatial
/// dimensions must be divisible by it.
pub fn mean_pool(f: &FeatureMap, factor: usize) -> Result<FeatureMap> {
    if factor == 0 || !f.height.is_multiple_of(factor) || !f.width.is_multiple_of(factor) {
        return Err(Error::DimensionMismatch {
            context: "mean_pool",
            expected: format!("spatial dims divisible by {factor}"),
            actual: format!("{}x{}", f.height, f.width),
        });
    }
    let (oh, ow) = (f.height / factor, f.width / factor);
    let norm = 1.0 / (factor * factor) as f64;
    let mut out = FeatureMap::zeros(f.channels, oh, ow);
    for c in 0..f.channels {
        for y in 0..oh {
            for x in 0..ow {
                let mut acc = 0.0;
                for dy in 0..factor {
                    for dx in 0..factor {
                        acc += f.get(c, y * factor + dy, x * factor + dx);
                    }
                }
                out.set(c, y, x, acc * norm);
            }
        }
    }
    Ok(out)
}

/// Parameter-free nearest-neighbor upsampling by an integer factor.
pub fn upsample_nearest(f: &FeatureMap, factor: usize) -> FeatureMap {
    assert!(factor >= 1);
    let (oh, ow) = (f.height * factor, f.width * factor);
    let mut out = FeatureMap::zeros(f.channels, oh, ow);
    for c in 0..f.channels {
        for y in 0..oh {
            for x in 0..ow {
                out.set(c, y, x, f.get(c, y / factor, x / factor));
            }
        }
    }
    out
}

/// Reinterpret an sRGB image as a 3-channel feature map (f64 copies of the
/// stored values).
pub fn feature_from_srgb(img: &SrgbImage) -> FeatureMap {
    FeatureMap::from_fn(3, img.height(), img.width(), |c, y, x| {
        img.pixel(x, y)[c] as f64
    })
}

/// Clamp a 3-channel feature map into `[0,1]` and store it as an sRGB
/// image.
pub fn feature_to_srgb(f: &FeatureMap) -> Result<SrgbImage> {
    if f.channels != 3 {
        return Err(Error::DimensionMismatch {
            context: "feature_to_srgb",
            expected: "3 channels".into(),
            actual: format!("{} channels", f.channels),
        });
    }
    let mut data = vec![0.0f32; f.width * f.height * 3];
    for c in 0..3 {
        for y in 0..f.height {
            for x in 0..f.width {
                data[(y * f.width + x) * 3 + c] = f.get(c, y, x).clamp(0.0, 1.0) as f32;
            }
        }
    }
    SrgbImage::new(f.width, f.height, data)
}

/// A runnable two-frame magnification chain over images.
///
/// With `deep_factor > 1` the chain is: pool both frames into deep
/// features, amplify their difference ([`manipulate`]), optionally refine
/// the amplified latent with a 2D selective scan, upsample back, refine the
/// full-resolution static content subtractively ([`static_refine`]), and
/// decode the sum ([`fuse`]).
///
/// With `deep_factor == 1` nothing is lost to pooling, so there is no
/// downsampled branch and no static detail to restore: the chain is just
/// the amplification (plus optional scan) followed by the decoder. With
/// identity operators and no scan this reproduces per-pixel linear frame
/// mixing, which is the documented sanity artifact.
#[derive(Debug, Clone)]
pub struct DemoChain {
    pub alpha: f64,
    pub deep_factor: usize,
    pub manipulator: LatentOperator,
    pub refiner: LatentOperator,
    pub decoder: LatentOperator,
    pub scan: Option<ScanParams>,
}

impl DemoChain {
    /// Pure identity configuration: no deep branch, no scan. Output is the
    /// per-pixel linear mix of the two frames at `alpha`.
    pub fn identity(alpha: f64) -> Self {
        Self {
            alpha,
            deep_factor: 1,
            manipulator: LatentOperator::Identity,
            refiner: LatentOperator::Identity,
            decoder: LatentOperator::Identity,
            scan: None,
        }
    }

    /// Full-structure configuration: deep branch at the default factor and
    /// a seeded random scan block; operators stay identity so the output
    /// remains interpretable.
    pub fn full(alpha: f64, seed: u64) -> Self {
        Self {
            alpha,
            deep_factor: DEFAULT_DEEP_FACTOR,
            manipulator: LatentOperator::Identity,
            refiner: LatentOperator::Identity,
            decoder: LatentOperator::Identity,
            scan: Some(ScanParams::random(4, 3, seed)),
        }
    }

    /// Run the chain on a frame pair of equal dimensions. Dimensions not
    /// divisible by `deep_factor` are trimmed at the right/bottom edge
    /// before processing.
    pub fn run(&self, a: &SrgbImage, b: &SrgbImage) -> Result<SrgbImage> {
        if a.width() != b.width() || a.height() != b.height() {
            return Err(Error::DimensionMismatch {
                context: "DemoChain::run",
                expected: format!("{}x{}", a.width(), a.height()),
                actual: format!("{}x{}", b.width(), b.height()),
            });
        }
        if self.deep_factor == 0 {
            return Err(Error::InvalidConfig("deep_factor must be >= 1".into()));
        }
        let w = (a.width() / self.deep_factor) * self.deep_factor;
        let h = (a.height() / self.deep_factor) * self.deep_factor;
        if w == 0 || h == 0 {
            return Err(Error::DegenerateSize {
                context: "DemoChain::run",
                width: w as i64,
                height: h as i64,
            });
        }
        let crop = |img: &SrgbImage| -> FeatureMap {
            FeatureMap::from_fn(3, h, w, |c, y, x| img.pixel(x, y)[c] as f64)
        };
        let fa = crop(a);
        let fb = crop(b);

        let out = if self.deep_factor == 1 {
            let mut z = manipulate(&fa, &fb, self.alpha, &self.manipulator)?;
            if let Some(p) = &self.scan {
                z = selective_scan_2d(&z, p)?;
            }
            self.decoder.apply(&z)
        } else {
            let fa_deep = mean_pool(&fa, self.deep_factor)?;
            let fb_deep = mean_pool(&fb, self.deep_factor)?;
            let mut z = manipulate(&fa_deep, &fb_deep, self.alpha, &self.manipulator)?;
            if let Some(p) = &self.scan {
                z = selective_scan_2d(&z, p)?;
            }
            let zu = upsample_nearest(&z, self.deep_factor);
            let fsr = static_refine(&fa, &fb, &self.refiner)?;
            fuse(&zu, &fsr, &self.decoder)?
        };
        feature_to_srgb(&out)
    }
}
