//! Acceptance suite: twelve pinned behavioral criteria for the synthesis
//! pipeline, the latent magnification kernel, and the metrics.
//!
//! Each criterion prints one `criterion N: PASS/FAIL — description` line
//! (run with `cargo test --test acceptance -- --nocapture` to see them on
//! success); the suite fails if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use tempfile::tempdir;

use magforge::assets::{ForegroundAlign, ForegroundObject};
use magforge::compositor::{
    composite, place_objects, warp_object, Frame, PlacementConfig,
};
use magforge::config::{AssetSource, GenerationConfig};
use magforge::kinematics::{
    check_constraints, sample_alpha, sample_motion, MotionKind, MotionMixture, RigidTransform,
};
use magforge::magnifier::{
    fuse, manipulate, scan_jvp, selective_scan_1d, selective_scan_1d_dense, selective_scan_2d,
    static_refine, FeatureMap, LatentOperator, ScanParams,
};
use magforge::metrics;
use magforge::pipeline::{generate, Manifest};
use magforge::raster::{LinearImage, QuantizedImage, SoftMask};
use magforge::rng::stream;
use magforge::sensor::{add_sensor_noise, DegradationParams};

type Verdict = Result<String, String>;

// ---------------------------------------------------------------------------
// Shared fixtures
// ---------------------------------------------------------------------------

/// Desk-scale generation config: 64x64 LR at s=2 with a few small objects,
/// so whole datasets regenerate in milliseconds per scene.
fn small_config(out: &Path, seed: u64, samples: usize) -> GenerationConfig {
    GenerationConfig {
        assets: AssetSource::Procedural {
            n_backgrounds: 3,
            n_foregrounds: 6,
        },
        output_dir: out.to_path_buf(),
        sample_count: samples,
        lr_width: 64,
        lr_height: 64,
        scale: 2,
        alpha_range: (2.0, 10.0),
        object_count_range: (2, 4),
        foreground_align: ForegroundAlign {
            area_fraction: (0.002, 0.01),
            blur_sigma: (0.3, 0.6),
        },
        placement: PlacementConfig {
            margin_px: 8.0,
            ..PlacementConfig::default()
        },
        seed,
        ..GenerationConfig::default()
    }
}

/// Soft-edged constant-color disk object (one-pixel feathered rim).
fn disk_object(size: usize, radius: f64, value: f32) -> ForegroundObject {
    let image = LinearImage::constant(size, size, value);
    let c = size as f64 / 2.0;
    let mut mask = SoftMask::constant(size, size, 0.0);
    for y in 0..size {
        for x in 0..size {
            let d = ((x as f64 + 0.5 - c).powi(2) + (y as f64 + 0.5 - c).powi(2)).sqrt();
            mask.data_mut()[y * size + x] = ((radius + 0.5 - d).clamp(0.0, 1.0)) as f32;
        }
    }
    ForegroundObject::new(image, mask).expect("valid disk")
}

/// Deterministic textured background (no rng stream consumed).
fn textured_bg(w: usize, h: usize, salt: u32) -> LinearImage {
    let mut state = 0x9E37_79B9u32 ^ salt;
    let mut img = LinearImage::constant(w, h, 0.0);
    for v in img.data_mut() {
        state = state.wrapping_mul(1_664_525).wrapping_add(1_013_904_223);
        *v = (state >> 8) as f32 / (1 << 24) as f32;
    }
    img
}

fn output_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn load_manifest(path: &Path) -> Manifest {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn normal_vec(rng: &mut magforge::rng::Stream, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// ---------------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------------

/// 1: every sampled motion satisfies the dual kinematic constraints
/// (input ≤ 3 px / 5°, amplified ≤ 30 px / 10°), 100k draws in < 5 s.
fn criterion_1() -> Verdict {
    const DRAWS: usize = 100_000;
    let mut rng = stream(1001);
    let started = Instant::now();
    let mut violations = 0usize;
    for _ in 0..DRAWS {
        let alpha = sample_alpha(&mut rng, (2.0, 30.0)).unwrap();
        let draw = sample_motion(&mut rng, alpha, &MotionMixture::default());
        let input_ok = draw.input.translation_norm() <= 3.0 && draw.input.theta_deg.abs() <= 5.0;
        let amp_ok =
            draw.amplified.translation_norm() <= 30.0 && draw.amplified.theta_deg.abs() <= 10.0;
        if !(input_ok && amp_ok && check_constraints(&draw)) {
            violations += 1;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    if violations != 0 {
        return Err(format!("{violations}/{DRAWS} draws violated the constraints"));
    }
    if elapsed >= 5.0 {
        return Err(format!("sampling took {elapsed:.2}s (budget 5s)"));
    }
    Ok(format!(
        "0 violations in {DRAWS} draws over alpha in [2,30] ({elapsed:.2}s)"
    ))
}

/// 2: empirical motion-kind frequencies match 0.30/0.30/0.40 within ±0.01.
fn criterion_2() -> Verdict {
    const DRAWS: usize = 100_000;
    let mut rng = stream(1002);
    let mut counts = [0usize; 3];
    for _ in 0..DRAWS {
        let alpha = sample_alpha(&mut rng, (2.0, 30.0)).unwrap();
        let draw = sample_motion(&mut rng, alpha, &MotionMixture::default());
        counts[match draw.kind {
            MotionKind::Translation => 0,
            MotionKind::Rotation => 1,
            MotionKind::Combined => 2,
        }] += 1;
    }
    let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / DRAWS as f64).collect();
    let targets = [0.30, 0.30, 0.40];
    for (f, t) in freqs.iter().zip(targets) {
        if (f - t).abs() > 0.01 {
            return Err(format!(
                "frequencies {freqs:.4?} deviate from {targets:?} by more than 0.01"
            ));
        }
    }
    Ok(format!(
        "frequencies ({:.4}, {:.4}, {:.4}) within ±0.01 of (0.30, 0.30, 0.40)",
        freqs[0], freqs[1], freqs[2]
    ))
}

/// 3: with alpha forced to 1 and noise disabled, the amplified target is
/// bit-identical to frame B across 20 generated scenes, in < 60 s.
fn criterion_3() -> Verdict {
    let started = Instant::now();
    let tmp = tempdir().unwrap();
    let cfg = GenerationConfig {
        alpha_range: (1.0, 1.0),
        noise_enabled: false,
        ..small_config(tmp.path(), 31, 20)
    };
    let report = generate(&cfg).map_err(|e| format!("generation failed: {e}"))?;
    if report.produced != 20 {
        return Err(format!("only {}/20 scenes produced", report.produced));
    }
    let manifest = load_manifest(&report.manifest_path);
    for record in &manifest.samples {
        let b = fs::read(cfg.output_dir.join(&record.files.input_b)).unwrap();
        let amp = fs::read(cfg.output_dir.join(&record.files.target_amp)).unwrap();
        if b != amp {
            return Err(format!("sample {}: frame B and target differ", record.index));
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    if elapsed >= 60.0 {
        return Err(format!("took {elapsed:.1}s (budget 60s)"));
    }
    Ok(format!(
        "20 scenes with max code difference 0 ({elapsed:.2}s)"
    ))
}

/// 4: half-pixel translation of a linear ramp reproduces the analytic
/// shift within 1e-6; a quarter-turn rotation is an exact permutation.
fn criterion_4() -> Verdict {
    // Horizontal ramp (value = column * 0.01) under a +0.5 px translation.
    let size = 16usize;
    let ramp: Vec<f32> = (0..size * size)
        .flat_map(|i| {
            let v = (i % size) as f32 * 0.01;
            [v, v, v]
        })
        .collect();
    let obj = ForegroundObject::new(
        LinearImage::new(size, size, ramp).unwrap(),
        SoftMask::constant(size, size, 1.0),
    )
    .unwrap();
    let tf = RigidTransform {
        theta_deg: 0.0,
        dx_px: 0.5,
        dy_px: 0.0,
    };
    let anchor = (8.0, 8.0);
    let (warped, _) = warp_object(&obj, &tf, anchor, 40, 40);
    let mut max_err = 0.0f64;
    let mut interior = 0usize;
    // Interior: the bicubic stencil stays inside the crop. Source column is
    // (canvas_x - anchor - 0.5); valid columns keep floor(src) in [1, size-3].
    for y in 0..size {
        for cx in 0..40usize {
            let src_x = cx as f64 - anchor.0 - 0.5;
            let k = src_x.floor();
            if k < 1.0 || k > (size - 3) as f64 {
                continue;
            }
            let expected = src_x * 0.01;
            let got = warped.pixel(cx, 8 + y)[0] as f64;
            max_err = max_err.max((got - expected).abs());
            interior += 1;
        }
    }
    if interior < 100 {
        return Err(format!("only {interior} interior samples checked"));
    }
    if max_err >= 1e-6 {
        return Err(format!("ramp shift error {max_err:.2e} >= 1e-6"));
    }

    // Quarter turn of an asymmetric 5x5 marker: uniform mask puts the pivot
    // at the crop center (2,2), so a 90° turn about the canvas pivot
    // (anchor + pivot) must permute pixels without resampling.
    let n = 5usize;
    let marker: Vec<f32> = (0..n * n)
        .flat_map(|i| {
            let v = (i as f32 * 0.01) + 0.05;
            [v, v * 0.5, 1.0 - v]
        })
        .collect();
    let src = LinearImage::new(n, n, marker).unwrap();
    let obj = ForegroundObject::new(src.clone(), SoftMask::constant(n, n, 1.0)).unwrap();
    if obj.pivot != (2.0, 2.0) {
        return Err(format!("uniform-mask pivot {:?} != (2,2)", obj.pivot));
    }
    let tf = RigidTransform {
        theta_deg: 90.0,
        dx_px: 0.0,
        dy_px: 0.0,
    };
    let anchor = (8.0, 6.0);
    let (warped, _) = warp_object(&obj, &tf, anchor, 32, 32);
    // Forward map about the canvas pivot (10, 8): crop (x, y) lands at
    // (10 - (y - 2), 8 + (x - 2)).
    for y in 0..n {
        for x in 0..n {
            let dest_x = (10 - (y as i64 - 2)) as usize;
            let dest_y = (8 + (x as i64 - 2)) as usize;
            let got = warped.pixel(dest_x, dest_y);
            let want = src.pixel(x, y);
            if got != want {
                return Err(format!(
                    "rotation mismatch at crop ({x},{y}): {got:?} != {want:?}"
                ));
            }
        }
    }
    Ok(format!(
        "ramp shift max error {max_err:.1e} over {interior} interior pixels; quarter turn bitwise exact"
    ))
}

/// 5: compositing is photometrically linear — scaling the background by c
/// scales every fully uncovered pixel by exactly c.
fn criterion_5() -> Verdict {
    let mut checked_total = 0usize;
    for scene in 0..10u64 {
        let mut rng = stream(4000 + scene);
        let bg = textured_bg(96, 96, scene as u32);
        let objs = vec![
            disk_object(14, 5.0, 0.7),
            disk_object(12, 4.0, 0.4),
        ];
        let alpha = sample_alpha(&mut rng, (2.0, 10.0)).unwrap();
        let draws: Vec<_> = (0..objs.len())
            .map(|_| sample_motion(&mut rng, alpha, &MotionMixture::default()))
            .collect();
        let cfg = PlacementConfig {
            margin_px: 6.0,
            ..PlacementConfig::default()
        };
        let placed = place_objects(&bg, objs, &draws, &cfg, &mut rng)
            .map_err(|e| format!("scene {scene}: placement failed: {e}"))?;
        for frame in [Frame::A, Frame::B] {
            // Total warped mask per pixel decides "uncovered".
            let mut covered = vec![false; 96 * 96];
            for po in &placed {
                let (_, m) = warp_object(&po.object, &po.transform(frame), po.anchor, 96, 96);
                for (c, &mv) in covered.iter_mut().zip(m.data()) {
                    *c |= mv != 0.0;
                }
            }
            let base = composite(&bg, &placed, frame);
            for c in [0.25f32, 0.5, 1.0] {
                let scaled = composite(&bg.scaled(c), &placed, frame);
                for y in 0..96 {
                    for x in 0..96 {
                        if covered[y * 96 + x] {
                            continue;
                        }
                        let lhs = scaled.pixel(x, y);
                        let rhs = base.pixel(x, y).map(|v| v * c);
                        if lhs != rhs {
                            return Err(format!(
                                "scene {scene} frame {frame:?} c={c}: ({x},{y}) {lhs:?} != {rhs:?}"
                            ));
                        }
                        checked_total += 1;
                    }
                }
            }
        }
    }
    Ok(format!(
        "exact scaling at {checked_total} uncovered pixel checks across 10 scenes"
    ))
}

/// 6: Monte-Carlo variance of the sensor noise matches
/// img/shot_gain + read_sigma² within 5% at 10⁶ samples.
fn criterion_6() -> Verdict {
    let img = LinearImage::constant(1000, 334, 0.25);
    let n = img.data().len(); // 1,002,000 samples
    let params = DegradationParams {
        shot_gain: 1000.0,
        read_sigma: 0.0,
        aa_sigma: 0.0,
        down_factor: 1.0,
        seed: 1006,
    };
    let mut noise = params.noise_stream(0);
    let out = add_sensor_noise(&img, &params, &mut noise);
    let mean: f64 = out.data().iter().map(|&v| v as f64).sum::<f64>() / n as f64;
    let var: f64 = out
        .data()
        .iter()
        .map(|&v| (v as f64 - mean).powi(2))
        .sum::<f64>()
        / (n - 1) as f64;
    let expected = 0.25 / 1000.0;
    let rel = (var - expected).abs() / expected;
    if rel > 0.05 {
        return Err(format!(
            "variance {var:.3e} deviates from {expected:.3e} by {:.1}%",
            rel * 100.0
        ));
    }
    Ok(format!(
        "variance {var:.4e} vs model {expected:.4e} ({:.2}% relative, {n} samples)",
        rel * 100.0
    ))
}

/// 7: generation is a pure function of (config, seed): reruns and worker
/// counts 1 vs 8 produce byte-identical files and manifests, n = 50.
fn criterion_7() -> Verdict {
    let tmp = tempdir().unwrap();
    let mut outputs = Vec::new();
    for (sub, workers) in [("w1a", 1), ("w1b", 1), ("w8", 8)] {
        let cfg = GenerationConfig {
            workers,
            ..small_config(&tmp.path().join(sub), 1, 50)
        };
        let report = generate(&cfg).map_err(|e| format!("{sub}: {e}"))?;
        if report.produced != 50 {
            return Err(format!("{sub}: only {}/50 produced", report.produced));
        }
        outputs.push(output_bytes(&cfg.output_dir));
    }
    if outputs[0] != outputs[1] {
        return Err("rerun with identical config differed".into());
    }
    if outputs[0] != outputs[2] {
        return Err("worker count changed output bytes".into());
    }
    Ok(format!(
        "{} files byte-identical across two runs and workers 1 vs 8",
        outputs[0].len()
    ))
}

/// 8: the latent-space identities hold exactly on random 8x16x16
/// features: identity-manipulate at alpha=1 returns F_b, identity
/// static-refine returns F_b, identity fuse returns the elementwise sum.
fn criterion_8() -> Verdict {
    let mut rng = stream(1008);
    let rand_map = |rng: &mut magforge::rng::Stream| {
        let data = normal_vec(rng, 8 * 16 * 16);
        FeatureMap::new(8, 16, 16, data).unwrap()
    };
    let fa = rand_map(&mut rng);
    let fb = rand_map(&mut rng);

    let manip = manipulate(&fa, &fb, 1.0, &LatentOperator::Identity).unwrap();
    if manip.data() != fb.data() {
        return Err("identity manipulate at alpha=1 is not bitwise F_b".into());
    }
    let refined = static_refine(&fa, &fb, &LatentOperator::Identity).unwrap();
    if refined.data() != fb.data() {
        return Err("identity static-refine is not bitwise F_b".into());
    }
    let fused = fuse(&fa, &fb, &LatentOperator::Identity).unwrap();
    let sum: Vec<f64> = fa
        .data()
        .iter()
        .zip(fb.data())
        .map(|(a, b)| a + b)
        .collect();
    if fused.data() != sum.as_slice() {
        return Err("identity fuse is not the bitwise elementwise sum".into());
    }
    Ok("manipulate/static-refine/fuse collapse bitwise on 8x16x16 features".into())
}

/// 9: the selective scan matches a dense causal-kernel oracle within
/// 1e-10 and its analytic directional derivative matches central finite
/// differences within 1e-4 relative error, 100 instances each.
fn criterion_9() -> Verdict {
    let mut meta = stream(1009);
    let mut max_dense = 0.0f64;
    for i in 0..100u64 {
        let state = meta.gen_range(1..=8usize);
        let ch = meta.gen_range(1..=4usize);
        let len = meta.gen_range(1..=64usize);
        let p = ScanParams::random(state, ch, 9100 + i);
        let x = normal_vec(&mut meta, len * ch);
        let fast = selective_scan_1d(&x, len, &p).unwrap();
        let dense = selective_scan_1d_dense(&x, len, &p).unwrap();
        let diff = fast
            .iter()
            .zip(&dense)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        max_dense = max_dense.max(diff);
        if diff >= 1e-10 {
            return Err(format!(
                "instance {i} (N={state}, D={ch}, L={len}): dense oracle diff {diff:.2e}"
            ));
        }
    }

    let mut max_rel = 0.0f64;
    const EPS: f64 = 1e-5;
    for i in 0..100u64 {
        let state = meta.gen_range(1..=8usize);
        let ch = meta.gen_range(1..=4usize);
        let len = meta.gen_range(1..=32usize);
        let p = ScanParams::random(state, ch, 9500 + i);
        let dp = ScanParams::random(state, ch, 9700 + i);
        let x = normal_vec(&mut meta, len * ch);
        let dx = normal_vec(&mut meta, len * ch);
        let jvp = scan_jvp(&x, len, &p, &dx, &dp).unwrap();
        let xp: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + EPS * d).collect();
        let xm: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a - EPS * d).collect();
        let pp = p.scaled_add(EPS, &dp).unwrap();
        let pm = p.scaled_add(-EPS, &dp).unwrap();
        let fp = selective_scan_1d(&xp, len, &pp).unwrap();
        let fm = selective_scan_1d(&xm, len, &pm).unwrap();
        let fd: Vec<f64> = fp
            .iter()
            .zip(&fm)
            .map(|(a, b)| (a - b) / (2.0 * EPS))
            .collect();
        let err: Vec<f64> = jvp.iter().zip(&fd).map(|(a, b)| a - b).collect();
        let rel = vec_norm(&err) / vec_norm(&fd).max(1.0);
        max_rel = max_rel.max(rel);
        if rel >= 1e-4 {
            return Err(format!(
                "instance {i} (N={state}, D={ch}, L={len}): jvp relative error {rel:.2e}"
            ));
        }
    }
    Ok(format!(
        "dense oracle max diff {max_dense:.1e}; jvp max relative error {max_rel:.1e} (100 instances each)"
    ))
}

/// 10: doubling the pixel count at most ~doubles the 2D scan's wall time
/// (median ratio over 5 trials ≤ 2.5).
fn criterion_10() -> Verdict {
    let p = ScanParams::random(8, 4, 1010);
    let small = FeatureMap::from_fn(4, 96, 96, |c, y, x| {
        ((c + 1) as f64 * 0.37 + y as f64 * 0.011 + x as f64 * 0.007).sin()
    });
    let large = FeatureMap::from_fn(4, 96, 192, |c, y, x| {
        ((c + 1) as f64 * 0.37 + y as f64 * 0.011 + x as f64 * 0.007).sin()
    });
    // Warm-up.
    std::hint::black_box(selective_scan_2d(&small, &p).unwrap());
    std::hint::black_box(selective_scan_2d(&large, &p).unwrap());
    let time = |f: &FeatureMap| -> Vec<f64> {
        (0..5)
            .map(|_| {
                let t = Instant::now();
                std::hint::black_box(selective_scan_2d(f, &p).unwrap());
                t.elapsed().as_secs_f64()
            })
            .collect()
    };
    let median = |mut v: Vec<f64>| -> f64 {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let t_small = median(time(&small));
    let t_large = median(time(&large));
    let ratio = t_large / t_small;
    if ratio > 2.5 {
        return Err(format!(
            "2L/L wall-time ratio {ratio:.2} > 2.5 ({:.2}ms vs {:.2}ms)",
            t_large * 1e3,
            t_small * 1e3
        ));
    }
    Ok(format!(
        "2L/L wall-time ratio {ratio:.2} ({:.2}ms vs {:.2}ms, median of 5)",
        t_large * 1e3,
        t_small * 1e3
    ))
}

/// 11: rmse/psnr agree with a naive per-pixel oracle within 1e-9 on 50
/// random 16x16 pairs, and psnr(rmse = 25.5) = 20 dB.
fn criterion_11() -> Verdict {
    let mut rng = stream(1011);
    let mut max_diff = 0.0f64;
    for _ in 0..50 {
        let a = QuantizedImage::new(16, 16, (0..16 * 16 * 3).map(|_| rng.gen()).collect()).unwrap();
        let b = QuantizedImage::new(16, 16, (0..16 * 16 * 3).map(|_| rng.gen()).collect()).unwrap();
        let mut sum = 0.0f64;
        for y in 0..16 {
            for x in 0..16 {
                for c in 0..3 {
                    let i = (y * 16 + x) * 3 + c;
                    let d = a.data()[i] as f64 - b.data()[i] as f64;
                    sum += d * d;
                }
            }
        }
        let oracle_rmse = (sum / 768.0).sqrt();
        let oracle_psnr = 20.0 * (255.0 / oracle_rmse).log10();
        let dr = (metrics::rmse(&a, &b).unwrap() - oracle_rmse).abs();
        let dp = (metrics::psnr(&a, &b).unwrap() - oracle_psnr).abs();
        max_diff = max_diff.max(dr).max(dp);
        if dr >= 1e-9 || dp >= 1e-9 {
            return Err(format!("oracle deviation rmse {dr:.2e}, psnr {dp:.2e}"));
        }
    }
    // Exact dB pin: one of four pixels differing by 51 codes in every
    // channel gives rmse 25.5 = 255/10, hence 20 dB.
    let base = QuantizedImage::new(2, 2, vec![0; 12]).unwrap();
    let mut data = vec![0u8; 12];
    data[..3].fill(51);
    let moved = QuantizedImage::new(2, 2, data).unwrap();
    let rmse = metrics::rmse(&base, &moved).unwrap();
    let psnr = metrics::psnr(&base, &moved).unwrap();
    if rmse != 25.5 || (psnr - 20.0).abs() > 1e-9 {
        return Err(format!("expected rmse 25.5 -> 20 dB, got {rmse} -> {psnr}"));
    }
    Ok(format!(
        "50 pairs match the naive oracle (max deviation {max_diff:.1e}); psnr(25.5) = {psnr} dB"
    ))
}

/// 12: production-shaped scenes place 8–12 objects, or the manifest
/// flags the shortfall.
fn criterion_12() -> Verdict {
    let tmp = tempdir().unwrap();
    let cfg = GenerationConfig {
        output_dir: tmp.path().to_path_buf(),
        sample_count: 5,
        seed: 12,
        ..GenerationConfig::default()
    };
    let report = generate(&cfg).map_err(|e| format!("generation failed: {e}"))?;
    if report.produced == 0 {
        return Err("no production scene produced".into());
    }
    let manifest = load_manifest(&report.manifest_path);
    let mut full = 0usize;
    let mut flagged = 0usize;
    for record in &manifest.samples {
        if !(8..=12).contains(&record.objects_requested) {
            return Err(format!(
                "sample {}: requested {} objects outside [8,12]",
                record.index, record.objects_requested
            ));
        }
        let placed = record.objects.len();
        let in_range = (8..=12).contains(&placed);
        match (in_range, record.object_shortfall) {
            (true, false) => full += 1,
            (false, true) => flagged += 1,
            (true, true) => {
                // Shortfall within range (e.g. 9 of 10 requested) is
                // legitimate: the flag must agree with the counts.
                if placed >= record.objects_requested {
                    return Err(format!(
                        "sample {}: shortfall flagged but {placed} >= {} requested",
                        record.index, record.objects_requested
                    ));
                }
                flagged += 1;
            }
            (false, false) => {
                return Err(format!(
                    "sample {}: {placed} objects outside [8,12] without a shortfall flag",
                    record.index
                ));
            }
        }
    }
    Ok(format!(
        "{} scenes at full complement, {} flagged shortfalls, {} scenes total",
        full,
        flagged,
        manifest.samples.len()
    ))
}

// ---------------------------------------------------------------------------
// Harness
// ---------------------------------------------------------------------------

type Criterion = (u32, &'static str, fn() -> Verdict);

#[test]
fn acceptance_criteria() {
    let criteria: Vec<Criterion> = vec![
        (1, "dual kinematic constraint satisfaction", criterion_1),
        (2, "motion-kind mixture 0.30/0.30/0.40 ±0.01", criterion_2),
        (3, "alpha=1 end-to-end bit identity", criterion_3),
        (4, "sub-pixel warp fidelity", criterion_4),
        (5, "photometric linearity of compositing", criterion_5),
        (6, "sensor noise variance model", criterion_6),
        (7, "determinism and scheduling independence", criterion_7),
        (8, "latent operation algebraic identities", criterion_8),
        (9, "selective scan oracle and derivative checks", criterion_9),
        (10, "selective scan linear-complexity evidence", criterion_10),
        (11, "metric oracle equivalence", criterion_11),
        (12, "object-count compliance", criterion_12),
    ];
    let mut failures = Vec::new();
    for (n, label, run) in criteria {
        let verdict = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panicked".into());
            Err(format!("panicked: {msg}"))
        });
        match verdict {
            Ok(detail) => println!("criterion {n}: PASS — {label}: {detail}"),
            Err(reason) => {
                println!("criterion {n}: FAIL — {label}: {reason}");
                failures.push(format!("criterion {n} ({label}): {reason}"));
            }
        }
    }
    assert!(
        failures.is_empty(),
        "{} acceptance criteria failed:\n{}",
        failures.len(),
        failures.join("\n")
    );
}
