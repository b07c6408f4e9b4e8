//! C ABI for dataset generation, pair evaluation, and the demo magnifier.
//!
//! Conventions:
//! - Every fallible call returns an `MfStatus`; `MF_STATUS_OK` is `0`.
//! - All strings are NUL-terminated UTF-8. Null pointers where a value is
//!   required yield `MF_STATUS_NULL_POINTER`, never a crash.
//! - `MfConfig` is an opaque handle: create with `mf_config_default` or
//!   `mf_config_from_json`, destroy with `mf_config_free`. Handles are
//!   not thread-safe; share one per thread or guard externally.
//! - On failure, `mf_last_error` returns a thread-local message for the
//!   most recent error on the calling thread.
//! - Panics never unwind across the boundary; they surface as
//!   `MF_STATUS_INTERNAL`.
//!
//! The C header is generated into `include/magforge.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::path::{Path, PathBuf};

use magforge::config::GenerationConfig;
use magforge::error::Error;
use magforge::magnifier::DemoChain;
use magforge::metrics;
use magforge::pipeline::generate;
use magforge::raster::{load_srgb, quantize, save_quantized};

/// Result code of every fallible FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MfStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The configuration failed validation.
    InvalidConfig = 3,
    /// Image or feature data was rejected (non-finite values, dimension
    /// mismatch, degenerate size, or an empty mask).
    InvalidData = 4,
    /// A required input file or directory does not exist.
    MissingInput = 5,
    /// A sample index was outside the configured range.
    IndexOutOfRange = 6,
    /// The asset catalog has no usable backgrounds or foregrounds.
    EmptyCatalog = 7,
    /// No object could be placed in a scene.
    UnplaceableScene = 8,
    /// An operating-system or image-codec I/O failure.
    Io = 9,
    /// JSON parsing or serialization failed.
    Json = 10,
    /// An internal invariant was violated (a bug; please report it).
    Internal = 11,
}

/// Outcome counts of one generation run. `produced + skipped = requested`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MfGenerationReport {
    /// Samples the configuration asked for.
    pub requested: u64,
    /// Samples written to disk.
    pub produced: u64,
    /// Samples abandoned after all retry attempts.
    pub skipped: u64,
}

/// Full-reference metrics for one image pair.
///
/// `psnr` is `+INFINITY` when the images are identical (`rmse == 0`).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MfMetricReport {
    /// Root-mean-square error in 8-bit code units, over all channels.
    pub rmse: f64,
    /// Peak signal-to-noise ratio in dB relative to code value 255.
    pub psnr: f64,
    /// Pixels compared (width times height).
    pub n_pixels: u64,
}

/// Opaque generation-configuration handle.
pub struct MfConfig(GenerationConfig);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn remember_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> MfStatus {
    match err {
        Error::InvalidConfig(_) => MfStatus::InvalidConfig,
        Error::NonFinite { .. }
        | Error::DimensionMismatch { .. }
        | Error::DegenerateSize { .. }
        | Error::DegenerateMask => MfStatus::InvalidData,
        Error::MissingInput(_) => MfStatus::MissingInput,
        Error::IndexOutOfRange { .. } => MfStatus::IndexOutOfRange,
        Error::EmptyCatalog => MfStatus::EmptyCatalog,
        Error::UnplaceableScene => MfStatus::UnplaceableScene,
        Error::Io(_) | Error::Image { .. } => MfStatus::Io,
        Error::Json(_) => MfStatus::Json,
    }
}

fn fail(err: &Error) -> MfStatus {
    remember_error(&err.to_string());
    status_of(err)
}

/// Run `body`, converting panics into `Internal` with a recorded message.
fn guarded(body: impl FnOnce() -> MfStatus + UnwindSafe) -> MfStatus {
    match catch_unwind(body) {
        Ok(status) => status,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            remember_error(&format!("internal panic: {msg}"));
            MfStatus::Internal
        }
    }
}

/// Borrow a required C string as UTF-8, or produce the matching status.
///
/// # Safety
/// `ptr` must be null or point to a NUL-terminated string that outlives
/// the call.
unsafe fn required_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, MfStatus> {
    if ptr.is_null() {
        remember_error(&format!("{what} must not be null"));
        return Err(MfStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        remember_error(&format!("{what} is not valid UTF-8"));
        MfStatus::InvalidUtf8
    })
}

unsafe fn required_path(ptr: *const c_char, what: &str) -> Result<PathBuf, MfStatus> {
    required_str(ptr, what).map(PathBuf::from)
}

/// Library version as a static string; never null, never freed.
#[no_mangle]
pub extern "C" fn mf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent error on the calling thread, or an empty
/// string. The pointer stays valid until the next failing call on the same
/// thread; do not free it.
#[no_mangle]
pub extern "C" fn mf_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// New configuration with library defaults. Free with `mf_config_free`.
#[no_mangle]
pub extern "C" fn mf_config_default() -> *mut MfConfig {
    Box::into_raw(Box::new(MfConfig(GenerationConfig::default())))
}

/// Parse and validate a configuration from JSON (same schema as the CLI's
/// `--config` file; all fields optional, unknown fields rejected). Returns
/// null on failure — consult `mf_last_error`. Free with
/// `mf_config_free`.
///
/// # Safety
/// `json` must be null or a NUL-terminated string valid for the call.
#[no_mangle]
pub unsafe extern "C" fn mf_config_from_json(json: *const c_char) -> *mut MfConfig {
    let Ok(text) = required_str(json, "json") else {
        return std::ptr::null_mut();
    };
    match GenerationConfig::from_json(text).and_then(|cfg| {
        cfg.validate()?;
        Ok(cfg)
    }) {
        Ok(cfg) => Box::into_raw(Box::new(MfConfig(cfg))),
        Err(e) => {
            fail(&e);
            std::ptr::null_mut()
        }
    }
}

/// Serialize a configuration to pretty JSON. Returns null on failure. Free
/// the returned string with `mf_string_free`.
///
/// # Safety
/// `cfg` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn mf_config_to_json(cfg: *const MfConfig) -> *mut c_char {
    let Some(cfg) = cfg.as_ref() else {
        remember_error("cfg must not be null");
        return std::ptr::null_mut();
    };
    match serde_json::to_string_pretty(&cfg.0) {
        Ok(json) => match CString::new(json) {
            Ok(c) => c.into_raw(),
            Err(_) => {
                remember_error("serialized JSON contained a NUL byte");
                std::ptr::null_mut()
            }
        },
        Err(e) => {
            fail(&e.into());
            std::ptr::null_mut()
        }
    }
}

/// Free a string returned by `mf_config_to_json`. Null is a no-op.
///
/// # Safety
/// `s` must be null or exactly a pointer previously returned by this
/// library's string-returning functions, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn mf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Destroy a configuration handle. Null is a no-op.
///
/// # Safety
/// `cfg` must be null or a live handle from this library, freed at most
/// once.
#[no_mangle]
pub unsafe extern "C" fn mf_config_free(cfg: *mut MfConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Point the configuration's output at `dir`.
///
/// # Safety
/// `cfg` must be a live handle; `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mf_config_set_output_dir(
    cfg: *mut MfConfig,
    dir: *const c_char,
) -> MfStatus {
    let Some(cfg) = cfg.as_mut() else {
        remember_error("cfg must not be null");
        return MfStatus::NullPointer;
    };
    match required_path(dir, "dir") {
        Ok(path) => {
            cfg.0.output_dir = path;
            MfStatus::Ok
        }
        Err(status) => status,
    }
}

/// Set the global seed.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mf_config_set_seed(cfg: *mut MfConfig, seed: u64) -> MfStatus {
    let Some(cfg) = cfg.as_mut() else {
        remember_error("cfg must not be null");
        return MfStatus::NullPointer;
    };
    cfg.0.seed = seed;
    MfStatus::Ok
}

/// Set the number of samples to generate (must be at least 1 to validate).
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mf_config_set_sample_count(
    cfg: *mut MfConfig,
    sample_count: u64,
) -> MfStatus {
    let Some(cfg) = cfg.as_mut() else {
        remember_error("cfg must not be null");
        return MfStatus::NullPointer;
    };
    cfg.0.sample_count = sample_count as usize;
    MfStatus::Ok
}

/// Set the worker-thread count (never changes output bytes).
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn mf_config_set_workers(cfg: *mut MfConfig, workers: u64) -> MfStatus {
    let Some(cfg) = cfg.as_mut() else {
        remember_error("cfg must not be null");
        return MfStatus::NullPointer;
    };
    cfg.0.workers = workers as usize;
    MfStatus::Ok
}

/// Generate a dataset per the configuration: PNG triplets plus one
/// `manifest.json` in the output directory. `report` (optional) receives
/// the outcome counts. A run whose scenes partly fail still returns
/// `MF_STATUS_OK`; inspect `report->produced` against `report->requested`.
///
/// # Safety
/// `cfg` must be a live handle; `report` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mf_generate(
    cfg: *const MfConfig,
    report: *mut MfGenerationReport,
) -> MfStatus {
    let Some(cfg) = cfg.as_ref() else {
        remember_error("cfg must not be null");
        return MfStatus::NullPointer;
    };
    let cfg = cfg.0.clone();
    let report_out = ReportSlot(report);
    guarded(move || match generate(&cfg) {
        Ok(r) => {
            // SAFETY: the caller promised `report` is null or writable.
            if let Some(slot) = unsafe { report_out.0.as_mut() } {
                *slot = MfGenerationReport {
                    requested: r.requested as u64,
                    produced: r.produced as u64,
                    skipped: r.skipped.len() as u64,
                };
            }
            MfStatus::Ok
        }
        Err(e) => fail(&e),
    })
}

/// Raw pointer wrapper so the guarded closure can carry it across
/// `catch_unwind` (writes happen only after the fallible work succeeds).
struct ReportSlot(*mut MfGenerationReport);
impl UnwindSafe for ReportSlot {}

/// Compare two image files: RMSE over 8-bit codes and PSNR. Writes the
/// result to `out`.
///
/// # Safety
/// `pred` and `gt` must be NUL-terminated paths; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mf_evaluate_pair(
    pred: *const c_char,
    gt: *const c_char,
    out: *mut MfMetricReport,
) -> MfStatus {
    let pred = match required_path(pred, "pred") {
        Ok(p) => p,
        Err(s) => return s,
    };
    let gt = match required_path(gt, "gt") {
        Ok(p) => p,
        Err(s) => return s,
    };
    if out.is_null() {
        remember_error("out must not be null");
        return MfStatus::NullPointer;
    }
    let slot = MetricSlot(out);
    guarded(move || match evaluate_files(&pred, &gt) {
        Ok(m) => {
            // SAFETY: the caller promised `out` is valid for writes.
            unsafe { *slot.0 = m };
            MfStatus::Ok
        }
        Err(e) => fail(&e),
    })
}

struct MetricSlot(*mut MfMetricReport);
impl UnwindSafe for MetricSlot {}

fn evaluate_files(pred: &Path, gt: &Path) -> Result<MfMetricReport, Error> {
    let a = quantize(&load_srgb(pred)?);
    let b = quantize(&load_srgb(gt)?);
    let m = metrics::report(&a, &b)?;
    Ok(MfMetricReport {
        rmse: m.rmse,
        psnr: m.psnr,
        n_pixels: m.n_pixels as u64,
    })
}

/// Run the identity magnification chain on a frame pair and write the
/// fused image as PNG to `out_path`. At `alpha = 1` the output equals
/// frame B exactly.
///
/// # Safety
/// All three paths must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn mf_magnify_pair(
    frame_a: *const c_char,
    frame_b: *const c_char,
    alpha: f64,
    out_path: *const c_char,
) -> MfStatus {
    let frame_a = match required_path(frame_a, "frame_a") {
        Ok(p) => p,
        Err(s) => return s,
    };
    let frame_b = match required_path(frame_b, "frame_b") {
        Ok(p) => p,
        Err(s) => return s,
    };
    let out_path = match required_path(out_path, "out_path") {
        Ok(p) => p,
        Err(s) => return s,
    };
    guarded(move || match magnify_files(&frame_a, &frame_b, alpha, &out_path) {
        Ok(()) => MfStatus::Ok,
        Err(e) => fail(&e),
    })
}

fn magnify_files(frame_a: &Path, frame_b: &Path, alpha: f64, out_path: &Path) -> Result<(), Error> {
    if !alpha.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "alpha must be finite, got {alpha}"
        )));
    }
    let a = load_srgb(frame_a)?;
    let b = load_srgb(frame_b)?;
    let fused = DemoChain::identity(alpha).run(&a, &b)?;
    save_quantized(out_path, &quantize(&fused))
}
