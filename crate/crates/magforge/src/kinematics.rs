//! Rigid in-plane motion: representation, sampling, and dual-stage limits.
//!
//! Each moving object carries one motion draw describing its frame-A to
//! frame-B displacement (rotation about a pivot plus translation) and the
//! magnification factor α. The ground-truth frame reuses the same motion
//! scaled by α, so sampling must satisfy two constraint stages at once: the
//! input motion stays sub-pixel-scale and the amplified motion stays within
//! the compositing margin. Both stages are enforced constructively — the
//! magnitude caps are pre-shrunk by α before drawing — so no rejection
//! sampling is needed and [`check_constraints`] holds with plain
//! comparisons.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Input translation cap (px, Euclidean norm).
pub const MAX_INPUT_TRANSLATION_PX: f64 = 3.0;
/// Input rotation cap (degrees, absolute).
pub const MAX_INPUT_ROTATION_DEG: f64 = 5.0;
/// Amplified translation cap (px).
pub const MAX_AMPLIFIED_TRANSLATION_PX: f64 = 30.0;
/// Amplified rotation cap (degrees).
pub const MAX_AMPLIFIED_ROTATION_DEG: f64 = 10.0;
/// Rotation magnitudes below this are excluded for rotation-bearing kinds so
/// "rotation" draws always rotate perceptibly.
const ROTATION_DEAD_ZONE_DEG: f64 = 0.05;

/// Rotation (degrees; positive angles rotate +x toward +y, which reads as
/// clockwise in y-down pixel coordinates) about a pivot chosen at
/// application time, followed by a translation in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub theta_deg: f64,
    pub dx_px: f64,
    pub dy_px: f64,
}

/// The three motion categories of the sampling mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionKind {
    Translation,
    Rotation,
    Combined,
}

/// Category probabilities; must sum to 1 within 1e-9.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionMixture {
    pub translation: f64,
    pub rotation: f64,
    pub combined: f64,
}

impl Default for MotionMixture {
    fn default() -> Self {
        Self {
            translation: 0.30,
            rotation: 0.30,
            combined: 0.40,
        }
    }
}

impl MotionMixture {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.translation, self.rotation, self.combined];
        if parts.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidConfig(
                "motion mixture probabilities must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "motion mixture must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

/// One object's fully resolved motion: category, input transform, the
/// magnification factor, and the α-scaled amplified transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionDraw {
    pub kind: MotionKind,
    pub input: RigidTransform,
    pub alpha: f64,
    pub amplified: RigidTransform,
}

impl RigidTransform {
    pub const IDENTITY: Self = Self {
        theta_deg: 0.0,
        dx_px: 0.0,
        dy_px: 0.0,
    };

    /// Euclidean norm of the translation component.
    pub fn translation_norm(&self) -> f64 {
        self.dx_px.hypot(self.dy_px)
    }

    /// Forward map of a point: rotate about `pivot`, then translate.
    pub fn apply(&self, pivot: (f64, f64), p: (f64, f64)) -> (f64, f64) {
        let (s, c) = sin_cos_deg(self.theta_deg);
        let (rx, ry) = (p.0 - pivot.0, p.1 - pivot.1);
        (
            c * rx - s * ry + pivot.0 + self.dx_px,
            s * rx + c * ry + pivot.1 + self.dy_px,
        )
    }

    /// Inverse map: where did an output point come from? Used by
    /// inverse-mapping warps.
    pub fn apply_inverse(&self, pivot: (f64, f64), p: (f64, f64)) -> (f64, f64) {
        let (s, c) = sin_cos_deg(self.theta_deg);
        let (rx, ry) = (p.0 - self.dx_px - pivot.0, p.1 - self.dy_px - pivot.1);
        (c * rx + s * ry + pivot.0, -s * rx + c * ry + pivot.1)
    }
}

/// Componentwise blend from `a` toward `b`: conceptually `a + factor (b-a)`,
/// computed as `(1-factor) a + factor b` so that `factor = 1` returns `b`
/// bitwise (the additive form can miss by one ulp). With `a` the identity
/// transform and `factor = α` this builds the amplified transform α·b.
pub fn interpolate_transform(a: &RigidTransform, b: &RigidTransform, factor: f64) -> RigidTransform {
    let lerp = |x: f64, y: f64| (1.0 - factor) * x + factor * y;
    RigidTransform {
        theta_deg: lerp(a.theta_deg, b.theta_deg),
        dx_px: lerp(a.dx_px, b.dx_px),
        dy_px: lerp(a.dy_px, b.dy_px),
    }
}

/// `(sin, cos)` of an angle in degrees, exact at multiples of 90 degrees so
/// quarter-turn rotations become pixel permutations.
pub fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let quarter = deg / 90.0;
    if quarter == quarter.round() && quarter.abs() < 4.0e15 {
        let k = ((quarter as i64) % 4 + 4) % 4;
        return match k {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        };
    }
    let (s, c) = deg.to_radians().sin_cos();
    (s, c)
}

/// Magnification factor drawn uniformly from `[lo, hi]`.
pub fn sample_alpha(rng: &mut Stream, range: (f64, f64)) -> Result<f64> {
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite()) || lo < 1.0 || hi < lo {
        return Err(Error::InvalidConfig(format!(
            "magnification range must satisfy 1 <= lo <= hi, got [{lo}, {hi}]"
        )));
    }
    if lo == hi {
        return Ok(lo);
    }
    Ok(lo + rng.gen::<f64>() * (hi - lo))
}

/// Do all four dual-stage bounds hold for this draw? Plain comparisons, no
/// epsilon: the sampler must produce draws that satisfy these exactly.
pub fn check_constraints(d: &MotionDraw) -> bool {
    let norm = d.input.translation_norm();
    norm <= MAX_INPUT_TRANSLATION_PX
        && d.input.theta_deg.abs() <= MAX_INPUT_ROTATION_DEG
        && d.alpha * norm <= MAX_AMPLIFIED_TRANSLATION_PX
        && (d.alpha * d.input.theta_deg).abs() <= MAX_AMPLIFIED_ROTATION_DEG
}

/// Translation with magnitude uniform on `(0, cap]` and uniform direction,
/// nudged down until the floating-point norm bounds themselves pass.
fn draw_translation(rng: &mut Stream, alpha: f64) -> (f64, f64) {
    let cap = MAX_INPUT_TRANSLATION_PX.min(MAX_AMPLIFIED_TRANSLATION_PX / alpha);
    // 1 - U[0,1) lies in (0,1]: never exactly zero motion.
    let mut radius = (1.0 - rng.gen::<f64>()) * cap;
    let phi = rng.gen::<f64>() * std::f64::consts::TAU;
    let (sin_phi, cos_phi) = phi.sin_cos();
    let ok = |r: f64| {
        let n = (r * cos_phi).hypot(r * sin_phi);
        n <= MAX_INPUT_TRANSLATION_PX && alpha * n <= MAX_AMPLIFIED_TRANSLATION_PX
    };
    while !ok(radius) {
        radius *= 1.0 - 1e-12;
    }
    (radius * cos_phi, radius * sin_phi)
}

/// Rotation uniform on `[-cap, cap]` excluding the dead zone, nudged down
/// until the floating-point angle bounds themselves pass.
fn draw_rotation(rng: &mut Stream, alpha: f64) -> f64 {
    let cap = MAX_INPUT_ROTATION_DEG.min(MAX_AMPLIFIED_ROTATION_DEG / alpha);
    let floor = if cap > ROTATION_DEAD_ZONE_DEG {
        ROTATION_DEAD_ZONE_DEG
    } else {
        0.0
    };
    let mut theta = floor + (1.0 - rng.gen::<f64>()) * (cap - floor);
    if rng.gen::<bool>() {
        theta = -theta;
    }
    let ok = |t: f64| {
        t.abs() <= MAX_INPUT_ROTATION_DEG && (alpha * t).abs() <= MAX_AMPLIFIED_ROTATION_DEG
    };
    while !ok(theta) {
        theta *= 1.0 - 1e-12;
    }
    theta
}

/// Draw one motion: category from the mixture, then magnitudes inside the
/// binding caps (input or amplified stage, whichever is tighter for this α).
pub fn sample_motion(rng: &mut Stream, alpha: f64, mixture: &MotionMixture) -> MotionDraw {
    assert!(alpha >= 1.0, "magnification factor must be >= 1");
    let u = rng.gen::<f64>();
    let kind = if u < mixture.translation {
        MotionKind::Translation
    } else if u < mixture.translation + mixture.rotation {
        MotionKind::Rotation
    } else {
        MotionKind::Combined
    };
    let (theta_deg, (dx_px, dy_px)) = match kind {
        MotionKind::Translation => (0.0, draw_translation(rng, alpha)),
        MotionKind::Rotation => (draw_rotation(rng, alpha), (0.0, 0.0)),
        MotionKind::Combined => {
            let t = draw_translation(rng, alpha);
            (draw_rotation(rng, alpha), t)
        }
    };
    let input = RigidTransform {
        theta_deg,
        dx_px,
        dy_px,
    };
    let draw = MotionDraw {
        kind,
        input,
        alpha,
        amplified: interpolate_transform(&RigidTransform::IDENTITY, &input, alpha),
    };
    debug_assert!(check_constraints(&draw));
    draw
}
