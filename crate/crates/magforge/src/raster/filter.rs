//! Separable resampling and convolution kernels on raw interleaved planes.
//!
//! All routines take row-major `[h][w][ch]` slices so they can serve both RGB
//! rasters and single-channel masks. Accumulation happens in `f64`; results
//! are cast to `f32` once, after the final pass.

/// Lanczos kernel with support 3: `sinc(x) * sinc(x/3)` for `|x| < 3`.
pub fn lanczos3(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    if x.abs() >= 3.0 {
        return 0.0;
    }
    let px = std::f64::consts::PI * x;
    3.0 * px.sin() * (px / 3.0).sin() / (px * px)
}

/// Symmetric (edge-mirroring) reflection of an index into `[0, n)`.
fn reflect(mut i: i64, n: usize) -> usize {
    let n = n as i64;
    loop {
        if i < 0 {
            i = -1 - i;
        } else if i >= n {
            i = 2 * n - 1 - i;
        } else {
            return i as usize;
        }
    }
}

/// One output position's resampling taps: starting input index and weights
/// over consecutive (reflected) input samples, normalized to sum 1.
struct Taps {
    start: i64,
    weights: Vec<f64>,
}

/// Lanczos-3 tap lists for resampling an axis of length `in_len` to
/// `out_len`, using half-pixel-centered coordinates. When minifying, the
/// kernel is widened by the scale factor for anti-aliasing.
fn lanczos_taps(in_len: usize, out_len: usize) -> Vec<Taps> {
    let ratio = in_len as f64 / out_len as f64;
    let filter_scale = ratio.max(1.0);
    let radius = 3.0 * filter_scale;
    (0..out_len)
        .map(|i| {
            let center = (i as f64 + 0.5) * ratio - 0.5;
            let start = (center - radius).ceil() as i64;
            let end = (center + radius).floor() as i64;
            let mut weights: Vec<f64> = (start..=end)
                .map(|j| lanczos3((j as f64 - center) / filter_scale))
                .collect();
            let sum: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= sum;
            }
            Taps { start, weights }
        })
        .collect()
}

/// Box-overlap tap lists for area-average decimation of an axis. Each output
/// cell integrates the input span `[i*r, (i+1)*r)` with fractional coverage
/// at the edges.
fn area_taps(in_len: usize, out_len: usize) -> Vec<Taps> {
    let ratio = in_len as f64 / out_len as f64;
    (0..out_len)
        .map(|i| {
            let lo = i as f64 * ratio;
            let hi = (i as f64 + 1.0) * ratio;
            let start = lo.floor() as i64;
            let end = (hi.ceil() as i64 - 1).min(in_len as i64 - 1);
            let mut weights: Vec<f64> = (start..=end)
                .map(|j| {
                    let cell_lo = j as f64;
                    let cell_hi = cell_lo + 1.0;
                    (hi.min(cell_hi) - lo.max(cell_lo)).max(0.0)
                })
                .collect();
            let sum: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= sum;
            }
            Taps { start, weights }
        })
        .collect()
}

/// Apply per-output-position taps along the horizontal axis.
fn apply_taps_rows(data: &[f64], w: usize, h: usize, ch: usize, taps: &[Taps]) -> Vec<f64> {
    let out_w = taps.len();
    let mut out = vec![0.0f64; out_w * h * ch];
    for y in 0..h {
        let row = &data[y * w * ch..(y + 1) * w * ch];
        let out_row = &mut out[y * out_w * ch..(y + 1) * out_w * ch];
        for (x, t) in taps.iter().enumerate() {
            let mut acc = [0.0f64; 4];
            for (k, &wt) in t.weights.iter().enumerate() {
                let sx = reflect(t.start + k as i64, w);
                for c in 0..ch {
                    acc[c] += wt * row[sx * ch + c];
                }
            }
            out_row[x * ch..x * ch + ch].copy_from_slice(&acc[..ch]);
        }
    }
    out
}

/// Apply per-output-position taps along the vertical axis.
fn apply_taps_cols(data: &[f64], w: usize, h: usize, ch: usize, taps: &[Taps]) -> Vec<f64> {
    let out_h = taps.len();
    let mut out = vec![0.0f64; w * out_h * ch];
    for (y, t) in taps.iter().enumerate() {
        let out_row = &mut out[y * w * ch..(y + 1) * w * ch];
        for (k, &wt) in t.weights.iter().enumerate() {
            let sy = reflect(t.start + k as i64, h);
            let src_row = &data[sy * w * ch..(sy + 1) * w * ch];
            for (o, &s) in out_row.iter_mut().zip(src_row) {
                *o += wt * s;
            }
        }
    }
    out
}

fn to_f64(data: &[f32]) -> Vec<f64> {
    data.iter().map(|&v| v as f64).collect()
}

fn to_f32(data: Vec<f64>) -> Vec<f32> {
    data.into_iter().map(|v| v as f32).collect()
}

/// Separable Lanczos-3 resampling of an interleaved plane (`ch <= 4`).
pub fn resample_raw(
    data: &[f32],
    w: usize,
    h: usize,
    ch: usize,
    out_w: usize,
    out_h: usize,
) -> Vec<f32> {
    assert!((1..=4).contains(&ch), "unsupported channel count {ch}");
    assert_eq!(data.len(), w * h * ch);
    let mid = apply_taps_rows(&to_f64(data), w, h, ch, &lanczos_taps(w, out_w));
    to_f32(apply_taps_cols(&mid, out_w, h, ch, &lanczos_taps(h, out_h)))
}

/// Separable area-average decimation with fractional cell coverage.
pub fn area_resample(
    data: &[f32],
    w: usize,
    h: usize,
    ch: usize,
    out_w: usize,
    out_h: usize,
) -> Vec<f32> {
    assert!((1..=4).contains(&ch), "unsupported channel count {ch}");
    assert_eq!(data.len(), w * h * ch);
    assert!(out_w <= w && out_h <= h, "area resampling only decimates");
    let mid = apply_taps_rows(&to_f64(data), w, h, ch, &area_taps(w, out_w));
    to_f32(apply_taps_cols(&mid, out_w, h, ch, &area_taps(h, out_h)))
}

/// Normalized Gaussian taps with radius `ceil(3 sigma)`.
pub fn gaussian_taps(sigma: f64) -> Vec<f64> {
    assert!(sigma > 0.0, "gaussian_taps requires sigma > 0");
    let radius = (3.0 * sigma).ceil() as i64;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Separable Gaussian blur with reflective boundaries.
pub fn gaussian_blur_raw(data: &[f32], w: usize, h: usize, ch: usize, sigma: f64) -> Vec<f32> {
    assert!((1..=4).contains(&ch), "unsupported channel count {ch}");
    assert_eq!(data.len(), w * h * ch);
    let kernel = gaussian_taps(sigma);
    let radius = (kernel.len() / 2) as i64;
    let conv_taps = |len: usize| -> Vec<Taps> {
        (0..len)
            .map(|i| Taps {
                start: i as i64 - radius,
                weights: kernel.clone(),
            })
            .collect()
    };
    let mid = apply_taps_rows(&to_f64(data), w, h, ch, &conv_taps(w));
    to_f32(apply_taps_cols(&mid, w, h, ch, &conv_taps(h)))
}
