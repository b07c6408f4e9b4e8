//! Built-in procedural asset generator.
//!
//! Produces smooth multi-octave noise backgrounds and feathered geometric
//! foreground shapes (ellipses and polygons) so the whole pipeline can run —
//! and be tested — without any external image data. Everything is a pure
//! function of the seed.

use rand::Rng;

use crate::error::Result;
use crate::raster::{SoftMask, SrgbImage};
use crate::rng::{derive_seed, stream, Stream};

use super::{AssetCatalog, CatalogOrigin};

const BG_SALT: u64 = 0x6163_6b67_726e_6421; // distinct stream family per asset kind
const FG_SALT: u64 = 0x6f62_6a65_6374_7321;

/// Default-sized procedural catalog: 384x384 backgrounds, 96 px object
/// crops.
pub fn procedural_catalog(seed: u64, n_bg: usize, n_fg: usize) -> Result<AssetCatalog> {
    procedural_catalog_sized(seed, n_bg, n_fg, 384, 384, 96)
}

/// Procedural catalog with explicit raster sizes. `fg_px` is the square
/// object crop side.
pub fn procedural_catalog_sized(
    seed: u64,
    n_bg: usize,
    n_fg: usize,
    bg_w: usize,
    bg_h: usize,
    fg_px: usize,
) -> Result<AssetCatalog> {
    let backgrounds = (0..n_bg)
        .map(|i| {
            let mut rng = stream(derive_seed(seed ^ BG_SALT, i as u64, 0));
            (format!("proc_bg_{i:03}"), noise_background(bg_w, bg_h, &mut rng))
        })
        .collect();
    let foregrounds = (0..n_fg)
        .map(|j| {
            let mut rng = stream(derive_seed(seed ^ FG_SALT, j as u64, 0));
            let (img, mask) = shape_foreground(fg_px, &mut rng);
            (format!("proc_fg_{j:03}"), img, mask)
        })
        .collect();
    AssetCatalog::validated(CatalogOrigin::Procedural, backgrounds, foregrounds)
}

/// Smoothstep-interpolated value noise on an `n x n` lattice, in [0,1].
struct ValueNoise {
    n: usize,
    lattice: Vec<f64>,
}

impl ValueNoise {
    fn new(n: usize, rng: &mut Stream) -> Self {
        let lattice = (0..n * n).map(|_| rng.gen::<f64>()).collect();
        Self { n, lattice }
    }

    /// Sample at normalized coordinates `(u, v)` in [0,1).
    fn at(&self, u: f64, v: f64) -> f64 {
        let fx = u * self.n as f64;
        let fy = v * self.n as f64;
        let x0 = fx.floor() as usize % self.n;
        let y0 = fy.floor() as usize % self.n;
        let x1 = (x0 + 1) % self.n;
        let y1 = (y0 + 1) % self.n;
        let tx = smoothstep(fx.fract());
        let ty = smoothstep(fy.fract());
        let g = |x: usize, y: usize| self.lattice[y * self.n + x];
        let top = g(x0, y0) * (1.0 - tx) + g(x1, y0) * tx;
        let bot = g(x0, y1) * (1.0 - tx) + g(x1, y1) * tx;
        top * (1.0 - ty) + bot * ty
    }
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Multi-octave noise field mapped through a random two-color palette plus
/// a gentle diagonal gradient.
fn noise_background(w: usize, h: usize, rng: &mut Stream) -> SrgbImage {
    let octaves = [
        (ValueNoise::new(4, rng), 0.55),
        (ValueNoise::new(8, rng), 0.30),
        (ValueNoise::new(16, rng), 0.15),
    ];
    let c0: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
    let c1: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
    let grad_strength = 0.1 + 0.2 * rng.gen::<f64>();
    let mut data = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            let u = x as f64 / w as f64;
            let v = y as f64 / h as f64;
            let mut t = 0.0;
            for (noise, amp) in &octaves {
                t += amp * noise.at(u, v);
            }
            t = (t + grad_strength * (u + v - 1.0)).clamp(0.0, 1.0);
            for c in 0..3 {
                let val = c0[c] + t * (c1[c] - c0[c]);
                data.push((0.05 + 0.9 * val.clamp(0.0, 1.0)) as f32);
            }
        }
    }
    SrgbImage::new(w, h, data).expect("generated values lie in [0,1]")
}

/// Either an ellipse or a star polygon, in normalized crop coordinates with
/// the crop center at the origin.
enum Shape {
    Ellipse {
        a: f64,
        b: f64,
        cos_psi: f64,
        sin_psi: f64,
    },
    Polygon {
        // Closed vertex loop.
        pts: Vec<(f64, f64)>,
    },
}

impl Shape {
    fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            Shape::Ellipse {
                a,
                b,
                cos_psi,
                sin_psi,
            } => {
                let u = cos_psi * x + sin_psi * y;
                let v = -sin_psi * x + cos_psi * y;
                (u / a).powi(2) + (v / b).powi(2) <= 1.0
            }
            Shape::Polygon { pts } => {
                // Even-odd ray cast along +x.
                let mut inside = false;
                for i in 0..pts.len() {
                    let (x1, y1) = pts[i];
                    let (x2, y2) = pts[(i + 1) % pts.len()];
                    if (y1 > y) != (y2 > y) {
                        let t = (y - y1) / (y2 - y1);
                        if x < x1 + t * (x2 - x1) {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
        }
    }
}

fn random_shape(rng: &mut Stream) -> Shape {
    if rng.gen::<bool>() {
        let a = 0.25 + 0.17 * rng.gen::<f64>();
        let b = 0.25 + 0.17 * rng.gen::<f64>();
        let psi = rng.gen::<f64>() * std::f64::consts::PI;
        Shape::Ellipse {
            a,
            b,
            cos_psi: psi.cos(),
            sin_psi: psi.sin(),
        }
    } else {
        let k = 5 + (rng.gen::<f64>() * 5.0) as usize; // 5..=9 vertices
        let pts = (0..k)
            .map(|i| {
                let base = i as f64 / k as f64 * std::f64::consts::TAU;
                let jitter = (rng.gen::<f64>() - 0.5) * 0.5 / k as f64 * std::f64::consts::TAU;
                let r = 0.25 + 0.17 * rng.gen::<f64>();
                let ang = base + jitter;
                (r * ang.cos(), r * ang.sin())
            })
            .collect();
        Shape::Polygon { pts }
    }
}

/// Rasterize a shape into a soft coverage mask (4x4 supersampling: edge
/// pixels land strictly inside (0.05, 0.95)) and paint a striped, shaded
/// texture over the crop.
fn shape_foreground(size: usize, rng: &mut Stream) -> (SrgbImage, SoftMask) {
    let shape = random_shape(rng);
    let half = size as f64 / 2.0;

    let mut mask_data = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let mut hits = 0u32;
            for sy in 0..4 {
                for sx in 0..4 {
                    let px = (x as f64 + (sx as f64 + 0.5) / 4.0 - half) / half;
                    let py = (y as f64 + (sy as f64 + 0.5) / 4.0 - half) / half;
                    if shape.contains(px, py) {
                        hits += 1;
                    }
                }
            }
            mask_data.push(hits as f32 / 16.0);
        }
    }

    let c0: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
    let c1: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
    let stripe_dir = rng.gen::<f64>() * std::f64::consts::PI;
    let stripe_freq = 3.0 + 5.0 * rng.gen::<f64>();
    let (sd_c, sd_s) = (stripe_dir.cos(), stripe_dir.sin());
    let mut img_data = Vec::with_capacity(size * size * 3);
    for y in 0..size {
        for x in 0..size {
            let u = (x as f64 - half) / half;
            let v = (y as f64 - half) / half;
            let stripe = 0.5 + 0.5 * (stripe_freq * (sd_c * u + sd_s * v) * std::f64::consts::PI).sin();
            let shade = 1.0 - 0.35 * (u * u + v * v);
            for c in 0..3 {
                let val = (c0[c] + stripe * (c1[c] - c0[c])) * shade;
                img_data.push((0.05 + 0.9 * val.clamp(0.0, 1.0)) as f32);
            }
        }
    }

    (
        SrgbImage::new(size, size, img_data).expect("generated values lie in [0,1]"),
        SoftMask::new(size, size, mask_data).expect("coverage lies in [0,1]"),
    )
}
