//! Dataset generation configuration: every knob of the synthesis pipeline
//! in one serializable struct with validated invariants.
//!
//! A config file is JSON mirroring [`GenerationConfig`] field for field;
//! every field has a default, so `{}` is a valid config and partial files
//! override only what they name. Outputs are a pure function of the config
//! (worker count and output directory aside, which only affect scheduling
//! and file placement).

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assets::{BackgroundPrep, ForegroundAlign};
use crate::compositor::PlacementConfig;
use crate::error::{Error, Result};
use crate::kinematics::MotionMixture;

/// Where scene assets come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssetSource {
    /// Built-in procedural generator; rasters are a pure function of the
    /// global seed and the LR resolution.
    Procedural {
        n_backgrounds: usize,
        n_foregrounds: usize,
    },
    /// User-supplied directories: `backgrounds/*.png` and
    /// `foregrounds/<stem>.png` + `foregrounds/<stem>_mask.png`.
    Directories {
        backgrounds: PathBuf,
        foregrounds: PathBuf,
    },
}

impl Default for AssetSource {
    fn default() -> Self {
        Self::Procedural {
            n_backgrounds: 8,
            n_foregrounds: 16,
        }
    }
}

/// Full description of one generation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    /// Asset sourcing (procedural by default).
    pub assets: AssetSource,
    /// Where images and the manifest are written.
    pub output_dir: PathBuf,
    /// Number of samples to synthesize.
    pub sample_count: usize,
    /// Output (LR) width in pixels.
    pub lr_width: usize,
    /// Output (LR) height in pixels.
    pub lr_height: usize,
    /// HR upsampling factor `s`; compositing runs at `s·LR`.
    pub scale: u32,
    /// Magnification factor range (uniform draw per scene).
    pub alpha_range: (f64, f64),
    /// Motion category probabilities.
    pub mixture: MotionMixture,
    /// Inclusive range for the number of objects per scene.
    pub object_count_range: (usize, usize),
    /// Background domain-gap matching (blur/noise sigma ranges).
    pub background_prep: BackgroundPrep,
    /// Foreground scaling and photometric alignment ranges.
    pub foreground_align: ForegroundAlign,
    /// Placement margins, overlap cap, and retry budget.
    pub placement: PlacementConfig,
    /// When false, the input frames take the noise-free encoding path
    /// (identical to the ground-truth path).
    pub noise_enabled: bool,
    /// Shot-noise gain range in electrons per unit intensity (uniform draw
    /// per scene).
    pub shot_gain_range: (f64, f64),
    /// Readout noise sigma range in linear intensity units (uniform draw
    /// per scene).
    pub read_sigma_range: (f64, f64),
    /// Anti-alias prefilter sigma in HR pixels; `null` means `0.5·scale`.
    pub aa_sigma: Option<f64>,
    /// Latent-block depth a full magnifier model would stack; recorded as
    /// configuration, independent of the per-scene object count.
    pub latent_block_count: usize,
    /// Global seed; every per-scene stream derives from it.
    pub seed: u64,
    /// Worker threads for generation (affects scheduling only, never
    /// output bytes).
    pub workers: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            assets: AssetSource::default(),
            output_dir: PathBuf::from("out"),
            sample_count: 16,
            lr_width: 384,
            lr_height: 384,
            scale: 2,
            alpha_range: (2.0, 30.0),
            mixture: MotionMixture::default(),
            object_count_range: (8, 12),
            background_prep: BackgroundPrep::default(),
            foreground_align: ForegroundAlign::default(),
            placement: PlacementConfig::default(),
            noise_enabled: true,
            shot_gain_range: (500.0, 5000.0),
            read_sigma_range: (0.001, 0.005),
            aa_sigma: None,
            latent_block_count: 12,
            seed: 1,
            workers: 1,
        }
    }
}

fn check_range(name: &str, (lo, hi): (f64, f64), min_lo: f64) -> Result<()> {
    if !lo.is_finite() || !hi.is_finite() || lo < min_lo || lo > hi {
        return Err(Error::InvalidConfig(format!(
            "{name} must satisfy {min_lo} <= lo <= hi, got [{lo}, {hi}]"
        )));
    }
    Ok(())
}

impl GenerationConfig {
    /// Read a JSON config file; missing fields take defaults, unknown
    /// fields are rejected.
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|_| Error::MissingInput(path.to_path_buf()))?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }

    /// Parse a JSON config from a string (same schema as [`load`]).
    ///
    /// [`load`]: GenerationConfig::load
    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    /// HR canvas width (`scale · lr_width`).
    pub fn hr_width(&self) -> usize {
        self.lr_width * self.scale as usize
    }

    /// HR canvas height (`scale · lr_height`).
    pub fn hr_height(&self) -> usize {
        self.lr_height * self.scale as usize
    }

    /// Anti-alias sigma actually used: the explicit value, or `0.5·scale`.
    pub fn effective_aa_sigma(&self) -> f64 {
        self.aa_sigma
            .unwrap_or_else(|| crate::sensor::default_aa_sigma(self.scale as f64))
    }

    /// Check every invariant; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.sample_count < 1 {
            return Err(Error::InvalidConfig("sample_count must be >= 1".into()));
        }
        if self.lr_width < 1 || self.lr_height < 1 {
            return Err(Error::InvalidConfig(format!(
                "LR resolution must be positive, got {}x{}",
                self.lr_width, self.lr_height
            )));
        }
        if self.scale < 1 {
            return Err(Error::InvalidConfig("scale must be >= 1".into()));
        }
        self.mixture.validate()?;
        let (olo, ohi) = self.object_count_range;
        if olo < 1 || ohi > 64 || olo > ohi {
            return Err(Error::InvalidConfig(format!(
                "object_count_range must lie within [1, 64] with lo <= hi, got [{olo}, {ohi}]"
            )));
        }
        check_range("alpha_range", self.alpha_range, 1.0)?;
        check_range("shot_gain_range", self.shot_gain_range, f64::MIN_POSITIVE)?;
        check_range("read_sigma_range", self.read_sigma_range, 0.0)?;
        check_range("background_prep.blur_sigma", self.background_prep.blur_sigma, 0.0)?;
        check_range("background_prep.noise_sigma", self.background_prep.noise_sigma, 0.0)?;
        check_range(
            "foreground_align.area_fraction",
            self.foreground_align.area_fraction,
            f64::MIN_POSITIVE,
        )?;
        check_range("foreground_align.blur_sigma", self.foreground_align.blur_sigma, 0.0)?;
        if let Some(aa) = self.aa_sigma {
            if !aa.is_finite() || aa < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "aa_sigma must be finite and >= 0, got {aa}"
                )));
            }
        }
        if !self.placement.margin_px.is_finite() || self.placement.margin_px < 0.0 {
            return Err(Error::InvalidConfig("placement.margin_px must be >= 0".into()));
        }
        if !self.placement.iou_cap.is_finite() || !(0.0..=1.0).contains(&self.placement.iou_cap) {
            return Err(Error::InvalidConfig(
                "placement.iou_cap must lie in [0, 1]".into(),
            ));
        }
        match &self.assets {
            AssetSource::Procedural {
                n_backgrounds,
                n_foregrounds,
            } => {
                if *n_backgrounds < 1 || *n_foregrounds < 1 {
                    return Err(Error::InvalidConfig(
                        "procedural asset counts must be >= 1".into(),
                    ));
                }
            }
            AssetSource::Directories { .. } => {}
        }
        if self.latent_block_count < 1 {
            return Err(Error::InvalidConfig("latent_block_count must be >= 1".into()));
        }
        if self.workers < 1 {
            return Err(Error::InvalidConfig("workers must be >= 1".into()));
        }
        Ok(())
    }
}
