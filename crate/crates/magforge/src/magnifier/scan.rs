//! Selective state-space scan with input-dependent gating.
//!
//! The primitive is a diagonal state-space recurrence discretized by
//! zero-order hold, where the step size Δ, the input projection B, and the
//! readout projection C are all recomputed from the current input vector
//! (the "selective" part). A single left-to-right pass costs O(L·N·D);
//! [`selective_scan_1d_dense`] is the quadratic-time reference oracle that
//! materializes the full causal kernel, and [`scan_jvp`] is an exact
//! forward-mode directional derivative through the recurrence, including
//! the gate's dependence on the input.

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::stream;

/// Parameters of one selective-scan block over sequences of `channels`-dim
/// vectors with `state_dim` states per channel.
///
/// Per step `t`, with input vector `x_t`:
/// - `Δ_t[d] = softplus(Σ_e w_delta[d][e]·x_t[e] + b_delta[d])` (positive),
/// - `B_t[n] = Σ_e w_b[n][e]·x_t[e] + b_b[n]`,
/// - `C_t[n] = Σ_e w_c[n][e]·x_t[e] + b_c[n]`,
/// - `h_t[d][n] = exp(Δ_t[d]·a[d][n])·h_{t-1}[d][n] + Δ_t[d]·B_t[n]·x_t[d]`,
/// - `y_t[d] = Σ_n C_t[n]·h_t[d][n]`, with `h_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanParams {
    /// N: states per channel.
    pub state_dim: usize,
    /// D: input/output vector dimension.
    pub channels: usize,
    /// D×N continuous-time decay exponents, negative for stability.
    pub a: Vec<f64>,
    /// N×D input projection producing `B_t`.
    pub w_b: Vec<f64>,
    /// N bias of `B_t`.
    pub b_b: Vec<f64>,
    /// N×D input projection producing `C_t`.
    pub w_c: Vec<f64>,
    /// N bias of `C_t`.
    pub b_c: Vec<f64>,
    /// D×D gating projection feeding the softplus that yields `Δ_t`.
    pub w_delta: Vec<f64>,
    /// D gating bias.
    pub b_delta: Vec<f64>,
}

impl ScanParams {
    /// Small random instance: decays in `[-1.2, -0.2]`, projections scaled
    /// by `1/sqrt(channels)`, biases at modest magnitude. Draw order: `a`,
    /// `w_b`, `b_b`, `w_c`, `b_c`, `w_delta`, `b_delta`, all row-major.
    pub fn random(state_dim: usize, channels: usize, seed: u64) -> Self {
        let mut rng = stream(seed);
        let mut normal = |scale: f64| -> f64 {
            let z: f64 = StandardNormal.sample(&mut rng);
            scale * z
        };
        let proj_scale = 1.0 / (channels as f64).sqrt();
        let a = (0..channels * state_dim)
            .map(|_| -(0.2 + normal(1.0).abs().min(1.0)))
            .collect();
        let w_b = (0..state_dim * channels).map(|_| normal(proj_scale)).collect();
        let b_b = (0..state_dim).map(|_| normal(0.5)).collect();
        let w_c = (0..state_dim * channels).map(|_| normal(proj_scale)).collect();
        let b_c = (0..state_dim).map(|_| normal(0.5)).collect();
        let w_delta = (0..channels * channels).map(|_| normal(proj_scale)).collect();
        let b_delta = (0..channels).map(|_| normal(0.5)).collect();
        Self {
            state_dim,
            channels,
            a,
            w_b,
            b_b,
            w_c,
            b_c,
            w_delta,
            b_delta,
        }
    }

    /// A copy with every input projection zeroed, leaving only the biases:
    /// Δ, B, and C become step-independent constants and the recurrence
    /// turns into a linear time-invariant system.
    pub fn without_input_dependence(&self) -> Self {
        Self {
            w_b: vec![0.0; self.w_b.len()],
            w_c: vec![0.0; self.w_c.len()],
            w_delta: vec![0.0; self.w_delta.len()],
            ..self.clone()
        }
    }

    /// `self + eps * dir`, field by field; shapes must match. Used to probe
    /// the parameter direction of [`scan_jvp`] by finite differences.
    pub fn scaled_add(&self, eps: f64, dir: &ScanParams) -> Result<Self> {
        if self.state_dim != dir.state_dim || self.channels != dir.channels {
            return Err(Error::DimensionMismatch {
                context: "ScanParams::scaled_add",
                expected: format!("N={} D={}", self.state_dim, self.channels),
                actual: format!("N={} D={}", dir.state_dim, dir.channels),
            });
        }
        let axpy = |xs: &[f64], ds: &[f64]| xs.iter().zip(ds).map(|(x, d)| x + eps * d).collect();
        Ok(Self {
            state_dim: self.state_dim,
            channels: self.channels,
            a: axpy(&self.a, &dir.a),
            w_b: axpy(&self.w_b, &dir.w_b),
            b_b: axpy(&self.b_b, &dir.b_b),
            w_c: axpy(&self.w_c, &dir.w_c),
            b_c: axpy(&self.b_c, &dir.b_c),
            w_delta: axpy(&self.w_delta, &dir.w_delta),
            b_delta: axpy(&self.b_delta, &dir.b_delta),
        })
    }

    /// All-zero tangent direction with this instance's shape.
    pub fn zero_direction(&self) -> Self {
        Self {
            a: vec![0.0; self.a.len()],
            w_b: vec![0.0; self.w_b.len()],
            b_b: vec![0.0; self.b_b.len()],
            w_c: vec![0.0; self.w_c.len()],
            b_c: vec![0.0; self.b_c.len()],
            w_delta: vec![0.0; self.w_delta.len()],
            b_delta: vec![0.0; self.b_delta.len()],
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (n, d) = (self.state_dim, self.channels);
        if n == 0 || d == 0 {
            return Err(Error::InvalidConfig(format!(
                "scan dimensions must be positive, got N={n} D={d}"
            )));
        }
        let lens = [
            ("a", self.a.len(), d * n),
            ("w_b", self.w_b.len(), n * d),
            ("b_b", self.b_b.len(), n),
            ("w_c", self.w_c.len(), n * d),
            ("b_c", self.b_c.len(), n),
            ("w_delta", self.w_delta.len(), d * d),
            ("b_delta", self.b_delta.len(), d),
        ];
        for (name, got, want) in lens {
            if got != want {
                return Err(Error::DimensionMismatch {
                    context: "ScanParams",
                    expected: format!("{name}: {want}"),
                    actual: format!("{name}: {got}"),
                });
            }
        }
        let all = self
            .a
            .iter()
            .chain(&self.w_b)
            .chain(&self.b_b)
            .chain(&self.w_c)
            .chain(&self.b_c)
            .chain(&self.w_delta)
            .chain(&self.b_delta);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "scan parameters",
            });
        }
        Ok(())
    }
}

/// Numerically stable `ln(1 + e^z)`.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Logistic sigmoid — the derivative of [`softplus`].
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Per-step projected quantities (and their pre-activation for the gate).
struct StepProjection {
    delta: Vec<f64>,   // D
    gate_pre: Vec<f64>, // D, pre-softplus
    b: Vec<f64>,       // N
    c: Vec<f64>,       // N
}

fn project_step(x_t: &[f64], p: &ScanParams) -> StepProjection {
    let (n, d) = (p.state_dim, p.channels);
    let mut gate_pre = vec![0.0; d];
    for (i, g) in gate_pre.iter_mut().enumerate() {
        let mut acc = p.b_delta[i];
        for (e, &xe) in x_t.iter().enumerate() {
            acc += p.w_delta[i * d + e] * xe;
        }
        *g = acc;
    }
    let delta = gate_pre.iter().map(|&z| softplus(z)).collect();
    let mut b = vec![0.0; n];
    let mut c = vec![0.0; n];
    for j in 0..n {
        let mut acc_b = p.b_b[j];
        let mut acc_c = p.b_c[j];
        for (e, &xe) in x_t.iter().enumerate() {
            acc_b += p.w_b[j * d + e] * xe;
            acc_c += p.w_c[j * d + e] * xe;
        }
        b[j] = acc_b;
        c[j] = acc_c;
    }
    StepProjection {
        delta,
        gate_pre,
        b,
        c,
    }
}

fn check_sequence(x: &[f64], len: usize, p: &ScanParams) -> Result<()> {
    p.validate()?;
    if len == 0 || x.len() != len * p.channels {
        return Err(Error::DimensionMismatch {
            context: "selective_scan",
            expected: format!("{} values (L={len} x D={})", len * p.channels, p.channels),
            actual: format!("{} values", x.len()),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "scan input",
        });
    }
    Ok(())
}

/// Linear-time selective scan over a sequence of `len` vectors, flattened
/// step-major (`x[t*D + d]`). Single left-to-right pass; output has the
/// same layout and length.
pub fn selective_scan_1d(x: &[f64], len: usize, p: &ScanParams) -> Result<Vec<f64>> {
    check_sequence(x, len, p)?;
    let (n, d) = (p.state_dim, p.channels);
    let mut h = vec![0.0f64; d * n];
    let mut y = vec![0.0f64; len * d];
    for t in 0..len {
        let x_t = &x[t * d..(t + 1) * d];
        let s = project_step(x_t, p);
        for i in 0..d {
            let dt = s.delta[i];
            let xi = x_t[i];
            let mut out = 0.0;
            for j in 0..n {
                let decay = (dt * p.a[i * n + j]).exp();
                let hij = decay * h[i * n + j] + dt * s.b[j] * xi;
                h[i * n + j] = hij;
                out += s.c[j] * hij;
            }
            y[t * d + i] = out;
        }
    }
    Ok(y)
}

/// Quadratic-time reference evaluation: materialize, for the given input,
/// the full L×L causal kernel implied by the recurrence and apply it
/// densely. Exists to validate [`selective_scan_1d`]; same contract.
pub fn selective_scan_1d_dense(x: &[f64], len: usize, p: &ScanParams) -> Result<Vec<f64>> {
    check_sequence(x, len, p)?;
    let (n, d) = (p.state_dim, p.channels);
    let steps: Vec<StepProjection> = (0..len)
        .map(|t| project_step(&x[t * d..(t + 1) * d], p))
        .collect();
    let mut y = vec![0.0f64; len * d];
    for i in 0..d {
        for t in 0..len {
            let mut acc = 0.0;
            for s in 0..=t {
                // Kernel weight from step s to step t for channel i.
                let mut k = 0.0;
                for j in 0..n {
                    let mut decay = 1.0;
                    for step in &steps[s + 1..=t] {
                        decay *= (step.delta[i] * p.a[i * n + j]).exp();
                    }
                    k += steps[t].c[j] * decay * steps[s].delta[i] * steps[s].b[j];
                }
                acc += k * x[s * d + i];
            }
            y[t * d + i] = acc;
        }
    }
    Ok(y)
}

/// Forward-mode directional derivative of [`selective_scan_1d`] at `(x, p)`
/// along `(dx, dp)`, propagated analytically through the recurrence —
/// including Δ's, B's, and C's dependence on the input. Returns the output
/// tangent with the same layout as the scan output.
pub fn scan_jvp(x: &[f64], len: usize, p: &ScanParams, dx: &[f64], dp: &ScanParams) -> Result<Vec<f64>> {
    check_sequence(x, len, p)?;
    if dx.len() != x.len() {
        return Err(Error::DimensionMismatch {
            context: "scan_jvp",
            expected: format!("{} tangent values", x.len()),
            actual: format!("{} tangent values", dx.len()),
        });
    }
    if dp.state_dim != p.state_dim || dp.channels != p.channels {
        return Err(Error::DimensionMismatch {
            context: "scan_jvp",
            expected: format!("N={} D={}", p.state_dim, p.channels),
            actual: format!("N={} D={}", dp.state_dim, dp.channels),
        });
    }
    let (n, d) = (p.state_dim, p.channels);
    let mut h = vec![0.0f64; d * n];
    let mut dh = vec![0.0f64; d * n];
    let mut dy = vec![0.0f64; len * d];
    for t in 0..len {
        let x_t = &x[t * d..(t + 1) * d];
        let dx_t = &dx[t * d..(t + 1) * d];
        let s = project_step(x_t, p);
        // Tangents of the per-step projections.
        let mut d_gate = vec![0.0; d];
        for (i, g) in d_gate.iter_mut().enumerate() {
            let mut acc = dp.b_delta[i];
            for e in 0..d {
                acc += dp.w_delta[i * d + e] * x_t[e] + p.w_delta[i * d + e] * dx_t[e];
            }
            *g = acc;
        }
        let d_delta: Vec<f64> = (0..d)
            .map(|i| sigmoid(s.gate_pre[i]) * d_gate[i])
            .collect();
        let mut db = vec![0.0; n];
        let mut dc = vec![0.0; n];
        for j in 0..n {
            let mut acc_b = dp.b_b[j];
            let mut acc_c = dp.b_c[j];
            for e in 0..d {
                acc_b += dp.w_b[j * d + e] * x_t[e] + p.w_b[j * d + e] * dx_t[e];
                acc_c += dp.w_c[j * d + e] * x_t[e] + p.w_c[j * d + e] * dx_t[e];
            }
            db[j] = acc_b;
            dc[j] = acc_c;
        }
        for i in 0..d {
            let dt = s.delta[i];
            let ddt = d_delta[i];
            let xi = x_t[i];
            let dxi = dx_t[i];
            let mut dout = 0.0;
            for j in 0..n {
                let aij = p.a[i * n + j];
                let daij = dp.a[i * n + j];
                let decay = (dt * aij).exp();
                let ddecay = decay * (ddt * aij + dt * daij);
                let hij_prev = h[i * n + j];
                let dhij_prev = dh[i * n + j];
                let hij = decay * hij_prev + dt * s.b[j] * xi;
                let dhij = ddecay * hij_prev
                    + decay * dhij_prev
                    + ddt * s.b[j] * xi
                    + dt * db[j] * xi
                    + dt * s.b[j] * dxi;
                h[i * n + j] = hij;
                dh[i * n + j] = dhij;
                dout += dc[j] * hij + s.c[j] * dhij;
            }
            dy[t * d + i] = dout;
        }
    }
    Ok(dy)
}

/// Four directional 1D scans of a feature map — row-major forward and
/// backward, then the same pair on the transpose (column-major) — averaged
/// as `((row_f + row_b) + (col_f + col_b)) / 4`. The column scans are
/// implemented as transposed row scans and the two pair-sums commute, so
/// the operation is bitwise equivariant under transposition. Output shape
/// equals input shape; `p.channels` must match the map's channel count.
pub fn selective_scan_2d(f: &super::FeatureMap, p: &ScanParams) -> Result<super::FeatureMap> {
    p.validate()?;
    if f.channels() != p.channels {
        return Err(Error::DimensionMismatch {
            context: "selective_scan_2d",
            expected: format!("{} channels", p.channels),
            actual: format!("{} channels", f.channels()),
        });
    }
    let row_pair = scan_rows_both_ways(f, p)?;
    let col_pair = scan_rows_both_ways(&f.transposed(), p)?.transposed();
    let mut out = row_pair;
    out.zip_in_place(&col_pair, |a, b| (a + b) * 0.25)?;
    Ok(out)
}

/// Sum of the forward and backward row scans of every row.
fn scan_rows_both_ways(f: &super::FeatureMap, p: &ScanParams) -> Result<super::FeatureMap> {
    let (c, h, w) = f.shape();
    let mut out = super::FeatureMap::zeros(c, h, w);
    let mut seq = vec![0.0f64; w * c];
    let mut rev = vec![0.0f64; w * c];
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                seq[x * c + ch] = f.get(ch, y, x);
                rev[(w - 1 - x) * c + ch] = f.get(ch, y, x);
            }
        }
        let fwd = selective_scan_1d(&seq, w, p)?;
        let bwd = selective_scan_1d(&rev, w, p)?;
        for x in 0..w {
            for ch in 0..c {
                let sum = fwd[x * c + ch] + bwd[(w - 1 - x) * c + ch];
                out.set(ch, y, x, sum);
            }
        }
    }
    Ok(out)
}
