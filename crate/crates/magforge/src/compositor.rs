//! Sub-pixel warping and linear-light over-compositing.
//!
//! Scene assembly places prepared foreground objects on the HR canvas so
//! that all three poses (reference frame A, moved frame B, and the
//! amplified pose) stay inside the frame, then composites each frame
//! back-to-front with the over operator in linear light.
//!
//! The warp is an inverse-mapped rigid transform with Catmull-Rom bicubic
//! sampling: exact on integer-aligned identity warps (the interpolation
//! weights collapse to a copy) and on quarter-turn rotations (the rotation
//! matrix entries are exact 0/±1), and exact up to `f32` rounding on linear
//! ramps — properties the test suite pins down.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assets::ForegroundObject;
use crate::error::{Error, Result};
use crate::kinematics::{MotionDraw, RigidTransform};
use crate::raster::{LinearImage, SoftMask};
use crate::rng::Stream;

/// Which pose of a placed object to render.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Reference pose (identity transform).
    A,
    /// Input motion applied.
    B,
    /// Amplified motion applied.
    Amp,
}

/// An object fixed to the canvas: its crop origin sits at `anchor`, and the
/// three poses derive from `draw`. `source_index` is the object's position
/// in the list handed to [`place_objects`], which survives drops so callers
/// can map placements back to catalog entries.
#[derive(Debug, Clone)]
pub struct PlacedObject {
    pub object: ForegroundObject,
    pub anchor: (f64, f64),
    pub draw: MotionDraw,
    pub source_index: usize,
}

impl PlacedObject {
    pub fn transform(&self, frame: Frame) -> RigidTransform {
        match frame {
            Frame::A => RigidTransform::IDENTITY,
            Frame::B => self.draw.input,
            Frame::Amp => self.draw.amplified,
        }
    }
}

/// Placement policy knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlacementConfig {
    /// Fixed margin term covering the amplified translation budget.
    pub margin_px: f64,
    /// Maximum allowed pairwise soft-mask IoU between placed objects.
    pub iou_cap: f64,
    /// Position retries per object before it is dropped.
    pub max_retries: u32,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        Self {
            margin_px: 30.0,
            iou_cap: 0.3,
            max_retries: 100,
        }
    }
}

/// Catmull-Rom cubic through `p1` (at x=0) and `p2` (at x=1); returns `p1`
/// bitwise at x=0.
fn catmull_rom(p0: f64, p1: f64, p2: f64, p3: f64, x: f64) -> f64 {
    p1 + 0.5
        * x
        * (p2 - p0 + x * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + x * (3.0 * (p1 - p2) + p3 - p0)))
}

/// Sample an interleaved plane at a fractional position with Catmull-Rom
/// bicubic interpolation; taps outside the raster contribute zero.
fn bicubic_sample(data: &[f32], w: usize, h: usize, ch: usize, x: f64, y: f64, out: &mut [f64]) {
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let x0 = x0 as i64;
    let y0 = y0 as i64;
    let tap = |xi: i64, yi: i64, c: usize| -> f64 {
        if xi < 0 || yi < 0 || xi >= w as i64 || yi >= h as i64 {
            0.0
        } else {
            data[(yi as usize * w + xi as usize) * ch + c] as f64
        }
    };
    for (c, o) in out.iter_mut().enumerate().take(ch) {
        let mut rows = [0.0f64; 4];
        for (j, row) in rows.iter_mut().enumerate() {
            let yi = y0 - 1 + j as i64;
            *row = catmull_rom(
                tap(x0 - 1, yi, c),
                tap(x0, yi, c),
                tap(x0 + 1, yi, c),
                tap(x0 + 2, yi, c),
                fx,
            );
        }
        *o = catmull_rom(rows[0], rows[1], rows[2], rows[3], fy);
    }
}

/// The warped object's support on the canvas, stored as a tight patch.
struct WarpPatch {
    x0: usize,
    y0: usize,
    w: usize,
    h: usize,
    image: Vec<f32>,
    mask: Vec<f32>,
}

/// Canvas-space pivot of a placed crop.
fn canvas_pivot(obj: &ForegroundObject, anchor: (f64, f64)) -> (f64, f64) {
    (anchor.0 + obj.pivot.0, anchor.1 + obj.pivot.1)
}

/// Axis-aligned bounds of the transformed crop on the canvas, padded for
/// bicubic support.
fn support_bounds(
    obj: &ForegroundObject,
    tf: &RigidTransform,
    anchor: (f64, f64),
) -> (f64, f64, f64, f64) {
    let pivot = canvas_pivot(obj, anchor);
    let w = obj.image.width() as f64;
    let h = obj.image.height() as f64;
    let corners = [(0.0, 0.0), (w, 0.0), (0.0, h), (w, h)];
    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (cx, cy) in corners {
        let p = tf.apply(pivot, (anchor.0 + cx, anchor.1 + cy));
        lo = (lo.0.min(p.0), lo.1.min(p.1));
        hi = (hi.0.max(p.0), hi.1.max(p.1));
    }
    const PAD: f64 = 3.0; // bicubic reach (2) plus rounding headroom
    (lo.0 - PAD, lo.1 - PAD, hi.0 + PAD, hi.1 + PAD)
}

fn warp_patch(
    obj: &ForegroundObject,
    tf: &RigidTransform,
    anchor: (f64, f64),
    canvas_w: usize,
    canvas_h: usize,
) -> Option<WarpPatch> {
    let (bx0, by0, bx1, by1) = support_bounds(obj, tf, anchor);
    let x0 = (bx0.floor() as i64).max(0);
    let y0 = (by0.floor() as i64).max(0);
    let x1 = (bx1.ceil() as i64 + 1).min(canvas_w as i64);
    let y1 = (by1.ceil() as i64 + 1).min(canvas_h as i64);
    if x0 >= x1 || y0 >= y1 {
        return None;
    }
    let (x0, y0) = (x0 as usize, y0 as usize);
    let (pw, ph) = (x1 as usize - x0, y1 as usize - y0);
    let pivot = canvas_pivot(obj, anchor);
    let (ow, oh) = (obj.image.width(), obj.image.height());
    let mut image = vec![0.0f32; pw * ph * 3];
    let mut mask = vec![0.0f32; pw * ph];
    let mut px = [0.0f64; 3];
    let mut pm = [0.0f64; 1];
    for yy in 0..ph {
        for xx in 0..pw {
            let p = ((x0 + xx) as f64, (y0 + yy) as f64);
            let src = tf.apply_inverse(pivot, p);
            let q = (src.0 - anchor.0, src.1 - anchor.1);
            // Entirely outside the crop's bicubic support: leave zero.
            if q.0 < -2.0 || q.1 < -2.0 || q.0 > ow as f64 + 2.0 || q.1 > oh as f64 + 2.0 {
                continue;
            }
            bicubic_sample(obj.image.data(), ow, oh, 3, q.0, q.1, &mut px);
            bicubic_sample(obj.mask.data(), ow, oh, 1, q.0, q.1, &mut pm);
            let i = (yy * pw + xx) * 3;
            image[i] = px[0] as f32;
            image[i + 1] = px[1] as f32;
            image[i + 2] = px[2] as f32;
            mask[yy * pw + xx] = (pm[0].clamp(0.0, 1.0)) as f32;
        }
    }
    Some(WarpPatch {
        x0,
        y0,
        w: pw,
        h: ph,
        image,
        mask,
    })
}

/// Warp one object onto a full-size canvas: inverse-mapped rigid transform
/// with bicubic sampling of image and mask. The mask is clamped to `[0,1]`;
/// pixels outside the warped support are exactly zero.
pub fn warp_object(
    obj: &ForegroundObject,
    tf: &RigidTransform,
    anchor: (f64, f64),
    canvas_w: usize,
    canvas_h: usize,
) -> (LinearImage, SoftMask) {
    let mut image = vec![0.0f32; canvas_w * canvas_h * 3];
    let mut mask = vec![0.0f32; canvas_w * canvas_h];
    if let Some(patch) = warp_patch(obj, tf, anchor, canvas_w, canvas_h) {
        for yy in 0..patch.h {
            let dst = ((patch.y0 + yy) * canvas_w + patch.x0) * 3;
            let src = yy * patch.w * 3;
            image[dst..dst + patch.w * 3].copy_from_slice(&patch.image[src..src + patch.w * 3]);
            let dst_m = (patch.y0 + yy) * canvas_w + patch.x0;
            let src_m = yy * patch.w;
            mask[dst_m..dst_m + patch.w].copy_from_slice(&patch.mask[src_m..src_m + patch.w]);
        }
    }
    (
        LinearImage::new(canvas_w, canvas_h, image).expect("warp output is finite"),
        SoftMask::new(canvas_w, canvas_h, mask).expect("mask clamped to [0,1]"),
    )
}

/// Greatest distance from the pivot to any crop corner: the radius of the
/// disk that bounds the object under any rotation about its pivot.
fn pivot_reach(obj: &ForegroundObject) -> f64 {
    let w = obj.image.width() as f64;
    let h = obj.image.height() as f64;
    [(0.0, 0.0), (w, 0.0), (0.0, h), (w, h)]
        .into_iter()
        .map(|(x, y)| (x - obj.pivot.0).hypot(y - obj.pivot.1))
        .fold(0.0, f64::max)
}

/// Soft-mask footprint of a placed object at its reference pose, on the
/// integer canvas grid (used only for overlap control).
struct Footprint {
    x0: i64,
    y0: i64,
    w: usize,
    h: usize,
    area: f64,
}

impl Footprint {
    fn new(obj: &ForegroundObject, anchor: (f64, f64)) -> Self {
        Self {
            x0: anchor.0.round() as i64,
            y0: anchor.1.round() as i64,
            w: obj.mask.width(),
            h: obj.mask.height(),
            area: obj.mask.soft_area(),
        }
    }
}

/// Soft IoU of two footprints: sum of min over sum of max.
fn footprint_iou(a: &Footprint, ma: &SoftMask, b: &Footprint, mb: &SoftMask) -> f64 {
    let x0 = a.x0.max(b.x0);
    let y0 = a.y0.max(b.y0);
    let x1 = (a.x0 + a.w as i64).min(b.x0 + b.w as i64);
    let y1 = (a.y0 + a.h as i64).min(b.y0 + b.h as i64);
    if x0 >= x1 || y0 >= y1 {
        return 0.0;
    }
    let mut inter = 0.0f64;
    for y in y0..y1 {
        for x in x0..x1 {
            let va = ma.value((x - a.x0) as usize, (y - a.y0) as usize) as f64;
            let vb = mb.value((x - b.x0) as usize, (y - b.y0) as usize) as f64;
            inter += va.min(vb);
        }
    }
    let union = a.area + b.area - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Choose anchors so every pose of every object stays in frame and pairwise
/// overlap stays under the IoU cap. Objects that cannot be placed within
/// the retry budget are dropped with a warning; an empty result is a scene
/// rejection.
pub fn place_objects(
    bg: &LinearImage,
    objs: Vec<ForegroundObject>,
    draws: &[MotionDraw],
    cfg: &PlacementConfig,
    rng: &mut Stream,
) -> Result<Vec<PlacedObject>> {
    assert_eq!(objs.len(), draws.len(), "one motion draw per object");
    let (w, h) = (bg.width() as f64, bg.height() as f64);
    let mut placed: Vec<PlacedObject> = Vec::with_capacity(objs.len());
    let mut footprints: Vec<Footprint> = Vec::with_capacity(objs.len());
    for (i, obj) in objs.into_iter().enumerate() {
        // Reach (not half-diagonal) so off-center pivots stay safe under
        // rotation; the feather is inside the crop already, the +3 covers
        // bicubic support.
        let margin = cfg.margin_px + pivot_reach(&obj) + crate::assets::FEATHER_SIGMA_PX + 3.0;
        let (lo_x, hi_x) = (margin, w - 1.0 - margin);
        let (lo_y, hi_y) = (margin, h - 1.0 - margin);
        if lo_x >= hi_x || lo_y >= hi_y {
            log::warn!("object {i} cannot fit the canvas with its motion margin; dropped");
            continue;
        }
        let mut accepted = None;
        for _ in 0..cfg.max_retries {
            let cx = lo_x + rng.gen::<f64>() * (hi_x - lo_x);
            let cy = lo_y + rng.gen::<f64>() * (hi_y - lo_y);
            let anchor = (cx - obj.pivot.0, cy - obj.pivot.1);
            let fp = Footprint::new(&obj, anchor);
            let overlap_ok = placed.iter().zip(&footprints).all(|(other, ofp)| {
                footprint_iou(&fp, &obj.mask, ofp, &other.object.mask) <= cfg.iou_cap
            });
            if overlap_ok {
                accepted = Some((anchor, fp));
                break;
            }
        }
        match accepted {
            Some((anchor, fp)) => {
                let po = PlacedObject {
                    object: obj,
                    anchor,
                    draw: draws[i],
                    source_index: i,
                };
                debug_assert!(placement_in_frame(&po, bg.width(), bg.height()));
                footprints.push(fp);
                placed.push(po);
            }
            None => log::warn!("object {i} exceeded placement retries; dropped"),
        }
    }
    if placed.is_empty() {
        return Err(Error::UnplaceableScene);
    }
    Ok(placed)
}

/// Does every pose's padded support lie inside the canvas?
pub fn placement_in_frame(po: &PlacedObject, canvas_w: usize, canvas_h: usize) -> bool {
    [Frame::A, Frame::B, Frame::Amp].into_iter().all(|f| {
        let (x0, y0, x1, y1) = support_bounds(&po.object, &po.transform(f), po.anchor);
        x0 >= 0.0 && y0 >= 0.0 && x1 <= canvas_w as f64 - 1.0 && y1 <= canvas_h as f64 - 1.0
    })
}

/// Render one frame: back-to-front over-compositing in linear light,
/// `out = obj * m + out * (1 - m)` per pixel in object list order. Pixels
/// nobody's mask touches equal the background bitwise; the result is
/// clipped to `[0,1]` (a no-op wherever values are already in range).
pub fn composite(bg: &LinearImage, placed: &[PlacedObject], frame: Frame) -> LinearImage {
    let (w, h) = (bg.width(), bg.height());
    let mut out = bg.clone();
    for po in placed {
        let tf = po.transform(frame);
        let Some(patch) = warp_patch(&po.object, &tf, po.anchor, w, h) else {
            continue;
        };
        let data = out.data_mut();
        for yy in 0..patch.h {
            for xx in 0..patch.w {
                let m = patch.mask[yy * patch.w + xx];
                if m == 0.0 {
                    continue;
                }
                let src = (yy * patch.w + xx) * 3;
                let dst = ((patch.y0 + yy) * w + patch.x0 + xx) * 3;
                for c in 0..3 {
                    data[dst + c] = patch.image[src + c] * m + data[dst + c] * (1.0 - m);
                }
            }
        }
    }
    out.clip_unit();
    out
}
