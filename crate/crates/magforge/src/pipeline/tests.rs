use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use tempfile::tempdir;

use super::*;
use crate::assets::ForegroundAlign;
use crate::compositor::PlacementConfig;
use crate::raster::save_quantized as save_codes;
use crate::sensor::clean_ground_truth;

/// Small, fast, reliably placeable configuration: 64x64 LR at s=2 with a
/// handful of small objects.
fn test_config(out: &Path) -> GenerationConfig {
    GenerationConfig {
        assets: AssetSource::Procedural {
            n_backgrounds: 3,
            n_foregrounds: 6,
        },
        output_dir: out.to_path_buf(),
        sample_count: 3,
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
        seed: 11,
        ..GenerationConfig::default()
    }
}

/// Every output file of a run, keyed by name.
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

#[test]
fn generate_is_deterministic_across_runs_and_worker_counts() {
    let tmp = tempdir().unwrap();
    let mut runs = Vec::new();
    for (sub, workers) in [("r1", 1), ("r2", 1), ("r3", 2)] {
        let cfg = GenerationConfig {
            workers,
            ..test_config(&tmp.path().join(sub))
        };
        let report = generate(&cfg).unwrap();
        assert_eq!(report.produced, 3, "all samples should place at {sub}");
        runs.push(output_bytes(&cfg.output_dir));
    }
    assert_eq!(runs[0], runs[1], "rerun must be byte-identical");
    assert_eq!(runs[0], runs[2], "worker count must not affect bytes");
    assert!(runs[0].contains_key("manifest.json"));
    assert_eq!(runs[0].len(), 10, "3 triplets + manifest");
}

#[test]
fn manifest_records_are_complete_and_constraint_satisfying() {
    let tmp = tempdir().unwrap();
    let cfg = test_config(tmp.path());
    let report = generate(&cfg).unwrap();
    assert!(report.success());
    let manifest: Manifest =
        serde_json::from_slice(&fs::read(&report.manifest_path).unwrap()).unwrap();
    assert_eq!(manifest.schema_version, SCHEMA_VERSION);
    assert_eq!(manifest.requested, 3);
    assert_eq!(manifest.produced, manifest.samples.len());
    assert!(manifest.skipped.is_empty());
    for record in &manifest.samples {
        for file in [
            &record.files.input_a,
            &record.files.input_b,
            &record.files.target_amp,
        ] {
            assert!(cfg.output_dir.join(file).is_file(), "{file} must exist");
        }
        assert_eq!(
            record.scene_seed,
            derive_seed(cfg.seed, record.index as u64, record.attempt)
        );
        assert_eq!(record.degradation.seed, record.scene_seed);
        assert!((2..=4).contains(&record.objects_requested));
        assert_eq!(
            record.object_shortfall,
            record.objects.len() < record.objects_requested
        );
        assert!(!record.objects.is_empty());
        for obj in &record.objects {
            assert_eq!(obj.transform_a, RigidTransform::IDENTITY);
            assert_eq!(obj.alpha, record.alpha);
            assert!(
                check_constraints(&obj.motion_draw()),
                "recorded transforms must satisfy the kinematic limits"
            );
        }
        assert!((2.0..=10.0).contains(&record.alpha));
    }
}

#[test]
fn alpha_one_without_noise_collapses_target_to_frame_b() {
    let tmp = tempdir().unwrap();
    let cfg = GenerationConfig {
        alpha_range: (1.0, 1.0),
        noise_enabled: false,
        sample_count: 2,
        ..test_config(tmp.path())
    };
    let report = generate(&cfg).unwrap();
    assert_eq!(report.produced, 2);
    let manifest: Manifest =
        serde_json::from_slice(&fs::read(&report.manifest_path).unwrap()).unwrap();
    for record in &manifest.samples {
        let b = fs::read(cfg.output_dir.join(&record.files.input_b)).unwrap();
        let amp = fs::read(cfg.output_dir.join(&record.files.target_amp)).unwrap();
        assert_eq!(b, amp, "alpha=1 without noise must leave B == amp");
        assert_eq!(record.alpha, 1.0);
    }
}

#[test]
fn noise_disabled_input_path_equals_the_clean_encoding() {
    let tmp = tempdir().unwrap();
    let quiet = GenerationConfig {
        noise_enabled: false,
        ..test_config(tmp.path())
    };
    let catalog = build_catalog(&quiet).unwrap();
    let render = render_scene(&quiet, &catalog, 0).unwrap();
    let clean = clean_ground_truth(&render.hr_a, &render.record.degradation).unwrap();
    assert_eq!(render.input_a.data(), clean.data());

    let noisy = GenerationConfig {
        noise_enabled: true,
        ..test_config(tmp.path())
    };
    let render = render_scene(&noisy, &catalog, 0).unwrap();
    let clean = clean_ground_truth(&render.hr_a, &render.record.degradation).unwrap();
    assert!(
        render.input_a.max_code_diff(&clean).unwrap() > 0,
        "enabled noise must perturb at least one code"
    );
}

#[test]
fn amp_target_is_the_clean_encoding_of_the_amplified_composite() {
    let tmp = tempdir().unwrap();
    let cfg = test_config(tmp.path());
    let catalog = build_catalog(&cfg).unwrap();
    let render = render_scene(&cfg, &catalog, 1).unwrap();
    let clean = clean_ground_truth(&render.hr_amp, &render.record.degradation).unwrap();
    assert_eq!(render.target_amp.data(), clean.data());
}

#[test]
fn render_scene_reruns_bitwise_identically() {
    let tmp = tempdir().unwrap();
    let cfg = test_config(tmp.path());
    let catalog = build_catalog(&cfg).unwrap();
    let first = render_scene(&cfg, &catalog, 2).unwrap();
    let second = render_scene(&cfg, &catalog, 2).unwrap();
    assert_eq!(first.record, second.record);
    assert_eq!(first.hr_a.data(), second.hr_a.data());
    assert_eq!(first.input_a.data(), second.input_a.data());
    assert_eq!(first.input_b.data(), second.input_b.data());
    assert_eq!(first.target_amp.data(), second.target_amp.data());
}

#[test]
fn infeasible_placement_skips_samples_but_writes_the_manifest() {
    let tmp = tempdir().unwrap();
    let cfg = GenerationConfig {
        lr_width: 16,
        lr_height: 16,
        sample_count: 2,
        placement: PlacementConfig {
            margin_px: 100.0,
            ..PlacementConfig::default()
        },
        ..test_config(tmp.path())
    };
    let report = generate(&cfg).unwrap();
    assert_eq!(report.produced, 0);
    assert_eq!(report.skipped, vec![0, 1]);
    assert!(!report.success());
    let manifest: Manifest =
        serde_json::from_slice(&fs::read(&report.manifest_path).unwrap()).unwrap();
    assert_eq!(manifest.skipped, vec![0, 1]);
    assert!(manifest.samples.is_empty());
}

#[test]
fn debug_bundle_contains_exactly_the_documented_files() {
    let tmp = tempdir().unwrap();
    let cfg = test_config(tmp.path());
    let bundle = debug_sample(&cfg, 0).unwrap();
    let mut found: Vec<String> = fs::read_dir(&bundle.dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    found.sort();
    let mut expected: Vec<String> = DEBUG_FILES.iter().map(|s| s.to_string()).collect();
    expected.sort();
    assert_eq!(found, expected);

    // Previews live on the HR canvas; the float frames are LR sized.
    let preview = load_srgb(&bundle.dir.join("J_amp.png")).unwrap();
    assert_eq!((preview.width(), preview.height()), (128, 128));
    let overlay = load_srgb(&bundle.dir.join("overlay.png")).unwrap();
    assert_eq!((overlay.width(), overlay.height()), (128, 128));
    let lr = load_srgb(&bundle.dir.join("lr_A_16bit.png")).unwrap();
    assert_eq!((lr.width(), lr.height()), (64, 64));

    let err = debug_sample(&cfg, 99).unwrap_err();
    assert!(matches!(err, Error::IndexOutOfRange { index: 99, count: 3 }));
}

#[test]
fn overlay_outlines_land_on_reference_footprints() {
    let tmp = tempdir().unwrap();
    let cfg = test_config(tmp.path());
    let catalog = build_catalog(&cfg).unwrap();
    let render = render_scene(&cfg, &catalog, 0).unwrap();
    let overlay = render_overlay(&render);
    let plain = quantize(&linear_to_srgb(&render.hr_amp));
    let changed = overlay
        .data()
        .iter()
        .zip(plain.data())
        .filter(|(a, b)| a != b)
        .count();
    assert!(changed > 0, "outlines must paint pixels");
    // Every painted pixel carries the outline color.
    for i in (0..overlay.data().len()).step_by(3) {
        if overlay.data()[i..i + 3] != plain.data()[i..i + 3] {
            assert_eq!(&overlay.data()[i..i + 3], &[255, 165, 0]);
        }
    }
}

fn write_random_codes(path: &Path, w: usize, h: usize, seed: u64) -> QuantizedImage {
    use rand::Rng;
    let mut rng = stream(seed);
    let img = QuantizedImage::new(w, h, (0..w * h * 3).map(|_| rng.gen()).collect()).unwrap();
    save_codes(path, &img).unwrap();
    img
}

#[test]
fn kernel_demo_collapses_to_the_inputs_at_the_alpha_extremes() {
    let tmp = tempdir().unwrap();
    let a = write_random_codes(&tmp.path().join("I_A.png"), 24, 20, 5);
    let b = write_random_codes(&tmp.path().join("I_B.png"), 24, 20, 6);

    let to_b = tmp.path().join("at_one.png");
    kernel_demo(tmp.path(), 1.0, Some(&to_b)).unwrap();
    assert_eq!(load_codes(&to_b).unwrap().data(), b.data());

    let to_a = tmp.path().join("at_zero.png");
    kernel_demo(tmp.path(), 0.0, Some(&to_a)).unwrap();
    assert_eq!(load_codes(&to_a).unwrap().data(), a.data());
}

#[test]
fn kernel_demo_on_identical_frames_is_alpha_independent() {
    let tmp = tempdir().unwrap();
    let a = write_random_codes(&tmp.path().join("I_A.png"), 16, 16, 9);
    save_codes(&tmp.path().join("I_B.png"), &a).unwrap();
    let out = tmp.path().join("demo_out.png");
    kernel_demo(tmp.path(), 7.5, Some(&out)).unwrap();
    assert_eq!(load_codes(&out).unwrap().data(), a.data());
}

#[test]
fn kernel_demo_finds_generated_pairs_by_suffix() {
    let tmp = tempdir().unwrap();
    let a = write_random_codes(&tmp.path().join("00004_A.png"), 16, 16, 2);
    write_random_codes(&tmp.path().join("00004_B.png"), 16, 16, 3);
    // The amplified frame of a triplet must not confuse pair discovery.
    write_random_codes(&tmp.path().join("00004_amp.png"), 16, 16, 4);
    let out = tmp.path().join("demo_out.png");
    kernel_demo(tmp.path(), 0.0, Some(&out)).unwrap();
    assert_eq!(load_codes(&out).unwrap().data(), a.data());

    let empty = tempdir().unwrap();
    assert!(matches!(
        kernel_demo(empty.path(), 1.0, None),
        Err(Error::MissingInput(_))
    ));
}

#[test]
fn evaluate_reports_per_pair_and_pooled_aggregates() {
    let tmp = tempdir().unwrap();
    let pred = tmp.path().join("pred");
    let gt = tmp.path().join("gt");
    fs::create_dir_all(&pred).unwrap();
    fs::create_dir_all(&gt).unwrap();

    // x: identical pair; y: constant code offset of 4.
    let x = write_random_codes(&pred.join("x.png"), 8, 8, 1);
    save_codes(&gt.join("x.png"), &x).unwrap();
    let y_pred = QuantizedImage::new(8, 8, vec![10; 192]).unwrap();
    let y_gt = QuantizedImage::new(8, 8, vec![14; 192]).unwrap();
    save_codes(&pred.join("y.png"), &y_pred).unwrap();
    save_codes(&gt.join("y.png"), &y_gt).unwrap();

    let report = evaluate(&pred, &gt).unwrap();
    assert_eq!(report.pairs.len(), 2);
    assert_eq!(report.pairs[0].name, "x.png");
    assert_eq!(report.pairs[0].metrics.rmse, 0.0);
    assert_eq!(report.pairs[0].metrics.psnr, f64::INFINITY);
    assert_eq!(report.pairs[1].metrics.rmse, 4.0);
    // Pooled: half the samples differ by 4 → rmse = sqrt(8).
    assert!((report.aggregate.rmse - 8.0f64.sqrt()).abs() < 1e-12);
    assert_eq!(report.aggregate.n_pixels, 128);

    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["pairs"][0]["psnr"], serde_json::Value::Null);
    assert_eq!(json["pairs"][0]["rmse"], serde_json::json!(0.0));

    // Single-file mode.
    let single = evaluate(&pred.join("y.png"), &gt.join("y.png")).unwrap();
    assert_eq!(single.pairs.len(), 1);
    assert_eq!(single.aggregate.rmse, 4.0);

    // Mixed and missing arguments.
    assert!(evaluate(&pred, &gt.join("y.png")).is_err());
    assert!(matches!(
        evaluate(&tmp.path().join("nope.png"), &gt.join("y.png")),
        Err(Error::MissingInput(_))
    ));
}

#[test]
fn success_threshold_requires_ninety_nine_percent() {
    let report = |produced, requested| GenerationReport {
        requested,
        produced,
        skipped: Vec::new(),
        manifest_path: PathBuf::new(),
        elapsed_secs: 0.0,
    };
    assert!(report(100, 100).success());
    assert!(report(99, 100).success());
    assert!(!report(98, 100).success());
    assert!(report(4, 4).success());
    assert!(!report(3, 4).success());
}
