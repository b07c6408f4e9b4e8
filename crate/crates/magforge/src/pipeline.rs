//! Scene synthesis and dataset orchestration.
//!
//! One sample is a pure function of `(config, global seed, sample index)`.
//! Each attempt at a scene owns a dedicated rng stream seeded by
//! `derive_seed(global_seed, index, attempt)`, and every random decision is
//! drawn from that stream in a fixed, documented order:
//!
//! 1. background index,
//! 2. object count,
//! 3. one foreground index per object,
//! 4. magnification factor α,
//! 5. one motion draw per object,
//! 6. shot-noise gain, then readout sigma (degenerate ranges with
//!    `lo == hi` consume no draw),
//! 7. background preparation (blur sigma, noise sigma, then the noise
//!    field),
//! 8. per-object alignment in object order (area fraction, blur sigma;
//!    a degenerate-mask rejection draws a replacement foreground index),
//! 9. placement anchors in object order.
//!
//! Sensor noise does not draw from the scene stream: each frame's noise
//! field comes from a stream derived from the scene seed and the frame
//! index, so the clean path and both input frames are independent of one
//! another and of placement.
//!
//! Scenes that cannot be built (for example when no object fits) are
//! retried with fresh derived seeds up to [`SCENE_ATTEMPTS`] times, then
//! skipped and reported in the manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assets::{align_foreground, prepare_background_to, procedural_catalog_sized};
use crate::assets::{load_catalog, AssetCatalog, ForegroundObject};
use crate::compositor::{composite, place_objects, Frame, PlacedObject};
use crate::config::{AssetSource, GenerationConfig};
use crate::error::{Error, Result};
use crate::kinematics::{check_constraints, sample_alpha, sample_motion};
use crate::kinematics::{MotionDraw, MotionKind, RigidTransform};
use crate::magnifier::DemoChain;
use crate::metrics::{self, MetricReport};
use crate::raster::{linear_to_srgb, quantize, LinearImage, QuantizedImage, SoftMask, SrgbImage};
use crate::raster::{load_srgb, save_quantized, save_srgb_16bit};
use crate::rng::{derive_seed, stream, Stream};
use crate::sensor::{add_sensor_noise, downsample, DegradationParams};

/// Attempts (each with a fresh derived seed) before a sample is skipped.
pub const SCENE_ATTEMPTS: u64 = 5;

/// Replacement foreground draws when alignment degenerates a mask.
const ALIGN_REDRAWS: u32 = 8;

/// Manifest schema version, bumped on any breaking layout change.
pub const SCHEMA_VERSION: u32 = 1;

/// Stream family for procedural catalog construction, disjoint from the
/// per-scene families.
const CATALOG_SALT: u64 = 0x6361_7461_6c6f_6721;

// ---------------------------------------------------------------------------
// Manifest records
// ---------------------------------------------------------------------------

/// One placed object as recorded in the manifest: which asset, where, and
/// the three poses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub asset_id: String,
    /// Crop origin on the HR canvas, in pixels.
    pub anchor: (f64, f64),
    pub kind: MotionKind,
    /// Reference pose (always identity).
    pub transform_a: RigidTransform,
    /// Input motion.
    pub transform_b: RigidTransform,
    /// α-scaled motion.
    pub transform_amp: RigidTransform,
    pub alpha: f64,
}

impl ObjectRecord {
    /// Reassemble the motion draw this record came from, for re-validating
    /// the kinematic constraints.
    pub fn motion_draw(&self) -> MotionDraw {
        MotionDraw {
            kind: self.kind,
            input: self.transform_b,
            alpha: self.alpha,
            amplified: self.transform_amp,
        }
    }
}

/// File names of one emitted triplet, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleFiles {
    pub input_a: String,
    pub input_b: String,
    pub target_amp: String,
}

/// Everything recorded about one produced sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    /// Seed of the scene stream that produced this sample.
    pub scene_seed: u64,
    /// Which attempt succeeded (0-based).
    pub attempt: u64,
    pub alpha: f64,
    pub background: String,
    /// Object count drawn for the scene.
    pub objects_requested: usize,
    /// True when placement retries ran out and fewer objects were placed
    /// than requested.
    pub object_shortfall: bool,
    pub objects: Vec<ObjectRecord>,
    pub degradation: DegradationParams,
    pub noise_enabled: bool,
    pub files: SampleFiles,
}

/// The dataset manifest: one JSON document written after generation.
/// Contains no timestamps or host details, so reruns are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub pipeline_version: String,
    pub global_seed: u64,
    pub requested: usize,
    pub produced: usize,
    /// Indices of samples that failed every attempt.
    pub skipped: Vec<usize>,
    pub samples: Vec<SampleRecord>,
}

/// Outcome summary of a generation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub requested: usize,
    pub produced: usize,
    pub skipped: Vec<usize>,
    pub manifest_path: PathBuf,
    pub elapsed_secs: f64,
}

impl GenerationReport {
    /// The run's success criterion: at least 99% of requested samples
    /// produced.
    pub fn success(&self) -> bool {
        self.produced * 100 >= self.requested * 99
    }
}

// ---------------------------------------------------------------------------
// Scene synthesis
// ---------------------------------------------------------------------------

/// A fully synthesized scene with its intermediates, for generation and
/// inspection alike.
#[derive(Debug, Clone)]
pub struct SceneRender {
    pub record: SampleRecord,
    /// HR linear-light composites.
    pub hr_a: LinearImage,
    pub hr_b: LinearImage,
    pub hr_amp: LinearImage,
    /// LR sRGB-encoded frames just before quantization.
    pub lr_float_a: SrgbImage,
    pub lr_float_b: SrgbImage,
    pub lr_float_amp: SrgbImage,
    /// The emitted 8-bit triplet.
    pub input_a: QuantizedImage,
    pub input_b: QuantizedImage,
    pub target_amp: QuantizedImage,
    /// Placements, for overlay rendering.
    pub placed: Vec<PlacedObject>,
}

/// Build the asset catalog a config describes. Procedural backgrounds are
/// generated at the LR resolution (they stand in for real LR source
/// imagery and are upsampled by `s` like any other background); object
/// crops scale with the resolution.
pub fn build_catalog(cfg: &GenerationConfig) -> Result<AssetCatalog> {
    match &cfg.assets {
        AssetSource::Procedural {
            n_backgrounds,
            n_foregrounds,
        } => {
            let fg_px = (cfg.lr_width.min(cfg.lr_height) / 4).max(16);
            procedural_catalog_sized(
                derive_seed(cfg.seed ^ CATALOG_SALT, 0, 0),
                *n_backgrounds,
                *n_foregrounds,
                cfg.lr_width,
                cfg.lr_height,
                fg_px,
            )
        }
        AssetSource::Directories {
            backgrounds,
            foregrounds,
        } => load_catalog(backgrounds, foregrounds),
    }
}

/// Uniform draw on `[lo, hi]`; a degenerate range consumes no randomness
/// (mirrors the asset-preparation draws).
fn draw_uniform(rng: &mut Stream, (lo, hi): (f64, f64)) -> f64 {
    use rand::Rng;
    if lo == hi {
        lo
    } else {
        lo + rng.gen::<f64>() * (hi - lo)
    }
}

fn file_names(index: usize) -> SampleFiles {
    SampleFiles {
        input_a: format!("{index:05}_A.png"),
        input_b: format!("{index:05}_B.png"),
        target_amp: format!("{index:05}_amp.png"),
    }
}

/// Encode one HR composite to its LR sRGB floats and 8-bit codes, with or
/// without sensor noise. Composed from the same public degradation
/// operators as the one-shot paths, in the same order.
fn encode_frame(
    j: &LinearImage,
    deg: &DegradationParams,
    frame_index: u64,
    with_noise: bool,
) -> Result<(SrgbImage, QuantizedImage)> {
    let srgb = if with_noise {
        let mut noise = deg.noise_stream(frame_index);
        linear_to_srgb(&add_sensor_noise(j, deg, &mut noise))
    } else {
        linear_to_srgb(j)
    };
    let lr = downsample(&srgb, deg)?;
    let codes = quantize(&lr);
    Ok((lr, codes))
}

/// One synthesis attempt. Draw order is documented at module level.
fn try_scene(
    cfg: &GenerationConfig,
    catalog: &AssetCatalog,
    index: usize,
    attempt: u64,
) -> Result<SceneRender> {
    use rand::Rng;
    let scene_seed = derive_seed(cfg.seed, index as u64, attempt);
    let mut rng = stream(scene_seed);

    // 1–3: discrete scene structure.
    let bg_index = rng.gen_range(0..catalog.n_backgrounds());
    let (olo, ohi) = cfg.object_count_range;
    let objects_requested = rng.gen_range(olo..=ohi);
    let fg_indices: Vec<usize> = (0..objects_requested)
        .map(|_| rng.gen_range(0..catalog.n_foregrounds()))
        .collect();

    // 4–5: kinematics.
    let alpha = sample_alpha(&mut rng, cfg.alpha_range)?;
    let draws: Vec<MotionDraw> = (0..objects_requested)
        .map(|_| sample_motion(&mut rng, alpha, &cfg.mixture))
        .collect();

    // 6: degradation parameters.
    let shot_gain = draw_uniform(&mut rng, cfg.shot_gain_range);
    let read_sigma = draw_uniform(&mut rng, cfg.read_sigma_range);

    // 7: background preparation.
    let bg = prepare_background_to(
        catalog.background(bg_index),
        cfg.hr_width(),
        cfg.hr_height(),
        &cfg.background_prep,
        &mut rng,
    )?;

    // 8: foreground alignment, redrawing assets whose mask degenerates.
    let mut asset_ids: Vec<String> = Vec::with_capacity(objects_requested);
    let mut aligned: Vec<ForegroundObject> = Vec::with_capacity(objects_requested);
    for &drawn_index in &fg_indices {
        let mut fg_index = drawn_index;
        let mut chosen = None;
        for _ in 0..=ALIGN_REDRAWS {
            let obj = catalog.foreground_object(fg_index)?;
            match align_foreground(&obj, &bg, &cfg.foreground_align, &mut rng) {
                Ok(a) => {
                    chosen = Some((fg_index, a));
                    break;
                }
                Err(Error::DegenerateMask) => {
                    log::warn!(
                        "sample {index}: foreground {fg_index} degenerated during alignment; redrawing"
                    );
                    fg_index = rng.gen_range(0..catalog.n_foregrounds());
                }
                Err(e) => return Err(e),
            }
        }
        let (fg_index, obj) = chosen.ok_or(Error::DegenerateMask)?;
        asset_ids.push(catalog.foreground_id(fg_index).to_string());
        aligned.push(obj);
    }

    // 9: placement, then compositing of all three poses.
    let placed = place_objects(&bg, aligned, &draws, &cfg.placement, &mut rng)?;
    let hr_a = composite(&bg, &placed, Frame::A);
    let hr_b = composite(&bg, &placed, Frame::B);
    let hr_amp = composite(&bg, &placed, Frame::Amp);

    // Stage II degradation. The ground-truth path never sees noise; the
    // input frames see per-frame noise streams unless noise is disabled,
    // in which case they take the identical clean encoding.
    let degradation = DegradationParams {
        shot_gain,
        read_sigma,
        aa_sigma: cfg.effective_aa_sigma(),
        down_factor: cfg.scale as f64,
        seed: scene_seed,
    };
    degradation.validate()?;
    let (lr_float_a, input_a) = encode_frame(&hr_a, &degradation, 0, cfg.noise_enabled)?;
    let (lr_float_b, input_b) = encode_frame(&hr_b, &degradation, 1, cfg.noise_enabled)?;
    let (lr_float_amp, target_amp) = encode_frame(&hr_amp, &degradation, 2, false)?;

    let objects: Vec<ObjectRecord> = placed
        .iter()
        .map(|po| ObjectRecord {
            asset_id: asset_ids[po.source_index].clone(),
            anchor: po.anchor,
            kind: po.draw.kind,
            transform_a: RigidTransform::IDENTITY,
            transform_b: po.draw.input,
            transform_amp: po.draw.amplified,
            alpha: po.draw.alpha,
        })
        .collect();
    debug_assert!(objects.iter().all(|o| check_constraints(&o.motion_draw())));
    let record = SampleRecord {
        index,
        scene_seed,
        attempt,
        alpha,
        background: catalog.background_id(bg_index).to_string(),
        objects_requested,
        object_shortfall: placed.len() < objects_requested,
        objects,
        degradation,
        noise_enabled: cfg.noise_enabled,
        files: file_names(index),
    };
    Ok(SceneRender {
        record,
        hr_a,
        hr_b,
        hr_amp,
        lr_float_a,
        lr_float_b,
        lr_float_amp,
        input_a,
        input_b,
        target_amp,
        placed,
    })
}

/// Synthesize one sample, retrying with fresh derived seeds on scene
/// failures (unplaceable scenes, degenerate assets).
pub fn render_scene(
    cfg: &GenerationConfig,
    catalog: &AssetCatalog,
    index: usize,
) -> Result<SceneRender> {
    let mut last_err = None;
    for attempt in 0..SCENE_ATTEMPTS {
        match try_scene(cfg, catalog, index, attempt) {
            Ok(render) => {
                if attempt > 0 {
                    log::info!("sample {index}: succeeded on attempt {attempt}");
                }
                return Ok(render);
            }
            Err(e) => {
                log::warn!("sample {index}: attempt {attempt} failed: {e}");
                last_err = Some(e);
            }
        }
    }
    Err(last_err.expect("SCENE_ATTEMPTS >= 1"))
}

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn produce_sample(
    cfg: &GenerationConfig,
    catalog: &AssetCatalog,
    index: usize,
) -> Result<SampleRecord> {
    let render = render_scene(cfg, catalog, index)?;
    let files = &render.record.files;
    save_quantized(&cfg.output_dir.join(&files.input_a), &render.input_a)?;
    save_quantized(&cfg.output_dir.join(&files.input_b), &render.input_b)?;
    save_quantized(&cfg.output_dir.join(&files.target_amp), &render.target_amp)?;
    Ok(render.record)
}

/// Generate the whole dataset a config describes: per-sample PNG triplets
/// plus one `manifest.json`, identical bytes for identical
/// `(config, seed)` regardless of worker count.
pub fn generate(cfg: &GenerationConfig) -> Result<GenerationReport> {
    let started = Instant::now();
    cfg.validate()?;
    let catalog = build_catalog(cfg)?;
    fs::create_dir_all(&cfg.output_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build worker pool: {e}")))?;
    let results: Vec<Result<SampleRecord>> = pool.install(|| {
        (0..cfg.sample_count)
            .into_par_iter()
            .map(|index| produce_sample(cfg, &catalog, index))
            .collect()
    });

    let mut samples = Vec::with_capacity(cfg.sample_count);
    let mut skipped = Vec::new();
    for (index, outcome) in results.into_iter().enumerate() {
        match outcome {
            Ok(record) => samples.push(record),
            Err(e) => {
                log::error!("sample {index}: skipped after {SCENE_ATTEMPTS} attempts: {e}");
                skipped.push(index);
            }
        }
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        pipeline_version: env!("CARGO_PKG_VERSION").to_string(),
        global_seed: cfg.seed,
        requested: cfg.sample_count,
        produced: samples.len(),
        skipped: skipped.clone(),
        samples,
    };
    let manifest_path = cfg.output_dir.join("manifest.json");
    write_json(&manifest_path, &manifest)?;
    let report = GenerationReport {
        requested: cfg.sample_count,
        produced: manifest.produced,
        skipped,
        manifest_path,
        elapsed_secs: started.elapsed().as_secs_f64(),
    };
    log::info!(
        "generated {}/{} samples in {:.2}s",
        report.produced,
        report.requested,
        report.elapsed_secs
    );
    Ok(report)
}

// ---------------------------------------------------------------------------
// Debug bundle
// ---------------------------------------------------------------------------

/// Fixed contents of a debug bundle directory.
pub const DEBUG_FILES: [&str; 7] = [
    "J_A.png",
    "J_B.png",
    "J_amp.png",
    "overlay.png",
    "lr_A_16bit.png",
    "lr_B_16bit.png",
    "lr_amp_16bit.png",
];

/// Paths emitted by [`debug_sample`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DebugBundle {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
}

/// Tight bounding box of mask support (values above a small threshold).
fn mask_bbox(mask: &SoftMask) -> Option<(usize, usize, usize, usize)> {
    let (w, h) = (mask.width(), mask.height());
    let mut bounds: Option<(usize, usize, usize, usize)> = None;
    for y in 0..h {
        for x in 0..w {
            if mask.value(x, y) > 0.05 {
                bounds = Some(match bounds {
                    None => (x, y, x, y),
                    Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
                });
            }
        }
    }
    bounds
}

/// Draw a 1-px rectangle outline in the given color onto raw 8-bit codes.
fn outline_rect(
    data: &mut [u8],
    width: usize,
    height: usize,
    (x0, y0, x1, y1): (usize, usize, usize, usize),
    color: [u8; 3],
) {
    let mut paint = |x: usize, y: usize| {
        if x < width && y < height {
            data[(y * width + x) * 3..(y * width + x) * 3 + 3].copy_from_slice(&color);
        }
    };
    for x in x0..=x1 {
        paint(x, y0);
        paint(x, y1);
    }
    for y in y0..=y1 {
        paint(x0, y);
        paint(x1, y);
    }
}

/// Preview of the amplified composite with each object's reference-pose
/// (frame A) footprint outlined, so displaced objects show where they
/// started.
fn render_overlay(render: &SceneRender) -> QuantizedImage {
    let base = quantize(&linear_to_srgb(&render.hr_amp));
    let (w, h) = (base.width(), base.height());
    let mut data = base.data().to_vec();
    const OUTLINE: [u8; 3] = [255, 165, 0];
    for po in &render.placed {
        // Frame A is the identity pose: the mask lands at its crop
        // coordinates offset by the anchor.
        if let Some((bx0, by0, bx1, by1)) = mask_bbox(&po.object.mask) {
            let clamp_x = |v: f64| (v.round().max(0.0) as usize).min(w - 1);
            let clamp_y = |v: f64| (v.round().max(0.0) as usize).min(h - 1);
            let rect = (
                clamp_x(po.anchor.0 + bx0 as f64),
                clamp_y(po.anchor.1 + by0 as f64),
                clamp_x(po.anchor.0 + bx1 as f64),
                clamp_y(po.anchor.1 + by1 as f64),
            );
            outline_rect(&mut data, w, h, rect, OUTLINE);
        }
    }
    QuantizedImage::new(w, h, data).expect("overlay preserves dimensions")
}

/// Re-synthesize one sample and emit its intermediates: tone-mapped HR
/// composite previews, the reference-pose overlay, and the
/// pre-quantization LR floats as 16-bit PNGs. File set is exactly
/// [`DEBUG_FILES`], under `<output_dir>/debug_<index>`.
pub fn debug_sample(cfg: &GenerationConfig, index: usize) -> Result<DebugBundle> {
    cfg.validate()?;
    if index >= cfg.sample_count {
        return Err(Error::IndexOutOfRange {
            index,
            count: cfg.sample_count,
        });
    }
    let catalog = build_catalog(cfg)?;
    let render = render_scene(cfg, &catalog, index)?;
    let dir = cfg.output_dir.join(format!("debug_{index:05}"));
    fs::create_dir_all(&dir)?;
    save_quantized(&dir.join("J_A.png"), &quantize(&linear_to_srgb(&render.hr_a)))?;
    save_quantized(&dir.join("J_B.png"), &quantize(&linear_to_srgb(&render.hr_b)))?;
    save_quantized(
        &dir.join("J_amp.png"),
        &quantize(&linear_to_srgb(&render.hr_amp)),
    )?;
    save_quantized(&dir.join("overlay.png"), &render_overlay(&render))?;
    save_srgb_16bit(&dir.join("lr_A_16bit.png"), &render.lr_float_a)?;
    save_srgb_16bit(&dir.join("lr_B_16bit.png"), &render.lr_float_b)?;
    save_srgb_16bit(&dir.join("lr_amp_16bit.png"), &render.lr_float_amp)?;
    Ok(DebugBundle {
        files: DEBUG_FILES.iter().map(|f| dir.join(f)).collect(),
        dir,
    })
}

// ---------------------------------------------------------------------------
// Kernel demo
// ---------------------------------------------------------------------------

/// Locate the `(I_A, I_B)` pair in a directory: exact names `I_A.png` /
/// `I_B.png`, or unique files ending `_A.png` / `_B.png`.
fn find_pair(dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let exact_a = dir.join("I_A.png");
    let exact_b = dir.join("I_B.png");
    if exact_a.is_file() && exact_b.is_file() {
        return Ok((exact_a, exact_b));
    }
    let mut ending_a = Vec::new();
    let mut ending_b = Vec::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for path in entries {
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if name.ends_with("_A.png") {
            ending_a.push(path.clone());
        } else if name.ends_with("_B.png") {
            ending_b.push(path.clone());
        }
    }
    match (ending_a.as_slice(), ending_b.as_slice()) {
        ([a], [b]) => Ok((a.clone(), b.clone())),
        _ => Err(Error::MissingInput(dir.join("I_A.png + I_B.png"))),
    }
}

/// Run the latent magnification chain (identity operators, no
/// downsampled branch) on a frame pair and write the fused result. With
/// identity operators this reduces to α-linear frame mixing, so `α = 1`
/// reproduces `I_B` and `α = 0` reproduces `I_A` up to quantization.
pub fn kernel_demo(pair_dir: &Path, alpha: f64, out: Option<&Path>) -> Result<PathBuf> {
    if !alpha.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "demo alpha must be finite, got {alpha}"
        )));
    }
    let (path_a, path_b) = find_pair(pair_dir)?;
    let frame_a = load_srgb(&path_a)?;
    let frame_b = load_srgb(&path_b)?;
    let fused = DemoChain::identity(alpha).run(&frame_a, &frame_b)?;
    let out_path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| pair_dir.join("demo.png"));
    save_quantized(&out_path, &quantize(&fused))?;
    Ok(out_path)
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Metrics for one prediction/ground-truth pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub name: String,
    #[serde(flatten)]
    pub metrics: MetricReport,
}

/// Per-pair metrics plus a pooled aggregate (RMSE over all pixels of all
/// pairs, PSNR of that pooled RMSE).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub pairs: Vec<PairOutcome>,
    pub aggregate: MetricReport,
}

/// Decode an 8-bit PNG back to its exact code values.
fn load_codes(path: &Path) -> Result<QuantizedImage> {
    Ok(quantize(&load_srgb(path)?))
}

fn png_names(dir: &Path) -> Result<Vec<String>> {
    let mut names: Vec<String> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter(|n| n.ends_with(".png"))
        .collect();
    names.sort();
    Ok(names)
}

/// Compare a prediction against ground truth: two image files, or two
/// directories matched by file name.
pub fn evaluate(pred: &Path, gt: &Path) -> Result<EvaluationReport> {
    let pairs: Vec<(String, PathBuf, PathBuf)> = if pred.is_file() && gt.is_file() {
        let name = pred
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "pair".to_string());
        vec![(name, pred.to_path_buf(), gt.to_path_buf())]
    } else if pred.is_dir() && gt.is_dir() {
        let gt_names = png_names(gt)?;
        let mut matched = Vec::new();
        for name in png_names(pred)? {
            if gt_names.contains(&name) {
                matched.push((name.clone(), pred.join(&name), gt.join(&name)));
            } else {
                log::warn!("{name}: no ground-truth counterpart; skipped");
            }
        }
        if matched.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "no .png files common to {} and {}",
                pred.display(),
                gt.display()
            )));
        }
        matched
    } else if !pred.exists() {
        return Err(Error::MissingInput(pred.to_path_buf()));
    } else if !gt.exists() {
        return Err(Error::MissingInput(gt.to_path_buf()));
    } else {
        return Err(Error::InvalidConfig(
            "evaluate needs two files or two directories".into(),
        ));
    };

    let mut outcomes = Vec::with_capacity(pairs.len());
    let mut pooled_sq_sum = 0.0f64;
    let mut pooled_samples = 0usize;
    let mut pooled_pixels = 0usize;
    for (name, pred_path, gt_path) in pairs {
        let a = load_codes(&pred_path)?;
        let b = load_codes(&gt_path)?;
        let report = metrics::report(&a, &b)?;
        let samples = report.n_pixels * 3;
        pooled_sq_sum += report.rmse * report.rmse * samples as f64;
        pooled_samples += samples;
        pooled_pixels += report.n_pixels;
        outcomes.push(PairOutcome {
            name,
            metrics: report,
        });
    }
    let pooled_rmse = (pooled_sq_sum / pooled_samples as f64).sqrt();
    Ok(EvaluationReport {
        pairs: outcomes,
        aggregate: MetricReport {
            rmse: pooled_rmse,
            psnr: metrics::psnr_from_rmse(pooled_rmse),
            n_pixels: pooled_pixels,
        },
    })
}

#[cfg(test)]
mod tests;
