//! Deterministic synthesis of motion-magnification training triplets.
//!
//! The library is organized as a pipeline of small, independently tested
//! stages:
//!
//! * [`raster`] — image types, sRGB transfer, resampling and blur kernels,
//! * [`assets`] — foreground/background sourcing and photometric alignment,
//! * [`kinematics`] — rigid motion sampling under dual-stage displacement
//!   limits, and transform interpolation/amplification,
//! * [`compositor`] — sub-pixel warping and linear-light over-compositing,
//! * [`sensor`] — degradation to a low-resolution, noisy, quantized frame,
//! * [`magnifier`] — a reference latent-magnification kernel (feature-space
//!   interpolation, sub-band recovery, selective state-space smoothing),
//! * [`metrics`] — reconstruction error measures,
//! * [`pipeline`] — scene synthesis, dataset generation, and inspection
//!   bundles driven by [`config`].
//!
//! Every public entry point is deterministic given its inputs and seed: the
//! same configuration and seed produce byte-identical outputs regardless of
//! worker count or scheduling.

pub mod assets;
pub mod compositor;
pub mod config;
pub mod error;
pub mod kinematics;
pub mod magnifier;
pub mod metrics;
pub mod pipeline;
pub mod raster;
pub mod rng;
pub mod sensor;

pub use error::{Error, Result};
