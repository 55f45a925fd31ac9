//! Power spectral density estimation and the analytic reference curve.
//!
//! Convention used throughout: for a real sequence `x_0 .. x_{M-1}` (one
//! segment) with window `w_k` and the *global* sample mean `mu` removed,
//!
//! ```text
//! S(O_j) = avg over segments of |sum_k w_k (x_k - mu) exp(-i O_j k)|^2 / sum_k w_k^2
//! ```
//!
//! at angular frequencies `O_j = 2 pi j / M`, `j = 1 ..= M/2` (radians per
//! period; the DC bin is dropped). With this normalization an uncorrelated
//! sequence of variance `s^2` estimates a flat `S = s^2` for any window, and
//! the clock's dissipation train follows the Lorentzian high-pass of
//! [`analytic_psd`]. Segments never overlap, and the mean is always the
//! global one: subtracting per-segment means would bend the spectrum exactly
//! in the low-frequency decades this crate exists to measure.
//!
//! Two independent routes compute the same quantity: the fast path
//! ([`PsdAccumulator`] / [`estimate_psd`], FFT-based, streaming-capable) and
//! the [`brute_force_psd`] oracle (direct `O(M^2)` DFT). Tests hold them to
//! 1e-9 relative agreement; do not "simplify" one in terms of the other.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::accum::KahanSum;
use crate::error::{Error, Result};
use crate::model::ClockParams;

/// Taper applied to each segment before the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    /// No taper. Best variance for smooth spectra; used by default.
    #[default]
    Rectangular,
    /// Periodic Hann taper `0.5 (1 - cos(2 pi k / M))` for spectra with
    /// strong tonal content (the integrate-and-fire comb).
    Hann,
}

impl Window {
    /// Per-sample taper coefficients for a segment of length `m`.
    pub fn coefficients(self, m: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; m],
            Window::Hann => (0..m)
                .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / m as f64).cos())
                .collect(),
        }
    }

    /// `sum_k w_k^2` in closed form (`m` and `3m/8` are exact in `f64` for
    /// the power-of-two lengths the estimator accepts).
    pub fn sum_sq(self, m: usize) -> f64 {
        match self {
            Window::Rectangular => m as f64,
            Window::Hann => 3.0 * m as f64 / 8.0,
        }
    }

    /// DFT of the taper at bin `j`: `W_j = sum_k w_k exp(-2 pi i j k / m)`.
    ///
    /// Both tapers are trigonometric polynomials, so their DFTs are exactly
    /// sparse: the rectangle is `m` at DC and zero elsewhere; periodic Hann
    /// is `m/2` at DC and `-m/4` at bins 1 and `m - 1`.
    pub fn bin_response(self, m: usize, j: usize) -> Complex<f64> {
        debug_assert!(j < m);
        let val = match self {
            Window::Rectangular => {
                if j == 0 {
                    m as f64
                } else {
                    0.0
                }
            }
            Window::Hann => {
                if j == 0 {
                    m as f64 / 2.0
                } else if j == 1 || j == m - 1 {
                    -(m as f64) / 4.0
                } else {
                    0.0
                }
            }
        };
        Complex::new(val, 0.0)
    }
}

/// A finished PSD estimate on the grid `O_j = 2 pi j / m`, `j = 1 ..= m/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    /// Angular frequencies in radians per period, strictly increasing.
    pub freqs: Vec<f64>,
    /// Estimated spectral density at each frequency (energy^2 per period).
    pub values: Vec<f64>,
    /// Number of segments averaged.
    pub segments: usize,
    /// Taper the estimate was computed with.
    pub window: Window,
}

/// Analytic dissipation spectrum of the clock model,
/// `S(O) = (delta^2 / p) / (1 + (p w / O)^2)`:
/// a high-pass Lorentzian with corner `p w` rising to the shot plateau
/// `delta^2 / p`. Rejects `omega <= 0` (the curve is stated for positive
/// frequencies; the estimator never produces a DC bin either).
pub fn analytic_psd(params: &ClockParams, omega: f64) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidParam {
            name: "omega",
            reason: format!("must be finite and > 0, got {omega}"),
        });
    }
    let corner = params.corner_frequency();
    let ratio = corner / omega;
    Ok(analytic_plateau(params) / (1.0 + ratio * ratio))
}

/// High-frequency plateau `delta^2 / p` of the analytic curve.
pub fn analytic_plateau(params: &ClockParams) -> f64 {
    params.delta * params.delta / params.p
}

/// Exact white level of a Bernoulli train with rate `p` and mark `delta/p`:
/// `p (1 - p) (delta / p)^2`. The analytic curve's plateau is the `p -> 0`
/// limit of this; at finite `p` the measured plateau sits a factor `1 - p`
/// below `delta^2 / p`.
pub fn finite_rate_plateau(params: &ClockParams) -> f64 {
    (1.0 - params.p) * analytic_plateau(params)
}

/// How the estimator learns the mean it must subtract.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanPolicy {
    /// Accumulate the exact sample mean while streaming and fold it in at
    /// finalization through the window's bin response. Algebraically
    /// identical to subtracting the mean up front (two passes), without
    /// buffering the stream.
    Streamed,
    /// The mean is already known (second pass of an in-memory estimate, or
    /// an externally supplied value).
    Known(f64),
}

/// Streaming Welch-style PSD accumulator: feed samples in period order,
/// finalize once at the end. Memory footprint is `O(segment_len)`
/// regardless of stream length; samples past the last complete segment are
/// ignored.
pub struct PsdAccumulator {
    m: usize,
    window: Window,
    policy: MeanPolicy,
    coeffs: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<f64>,
    fft_buf: Vec<Complex<f64>>,
    /// `sum over segments of |X_j|^2`, bins `1 ..= m/2`.
    power: Vec<f64>,
    /// `sum over segments of X_j` (streamed-mean correction term).
    linear: Vec<Complex<f64>>,
    sample_sum: KahanSum,
    pushed: u64,
    segments: usize,
}

impl PsdAccumulator {
    pub fn new(segment_len: usize, window: Window, policy: MeanPolicy) -> Result<Self> {
        if segment_len < 8 || !segment_len.is_power_of_two() {
            return Err(Error::BadSegmentLen(segment_len));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            m: segment_len,
            window,
            policy,
            coeffs: window.coefficients(segment_len),
            fft: planner.plan_fft_forward(segment_len),
            buf: Vec::with_capacity(segment_len),
            fft_buf: vec![Complex::default(); segment_len],
            power: vec![0.0; segment_len / 2],
            linear: vec![Complex::default(); segment_len / 2],
            sample_sum: KahanSum::new(),
            pushed: 0,
            segments: 0,
        })
    }

    pub fn segment_len(&self) -> usize {
        self.m
    }

    /// Segments fully processed so far.
    pub fn segments(&self) -> usize {
        self.segments
    }

    pub fn push(&mut self, x: f64) {
        self.pushed += 1;
        self.buf.push(x);
        if self.buf.len() == self.m {
            self.process_segment();
            self.buf.clear();
        }
    }

    pub fn push_slice(&mut self, xs: &[f64]) {
        for &x in xs {
            self.push(x);
        }
    }

    fn process_segment(&mut self) {
        let shift = match self.policy {
            MeanPolicy::Streamed => {
                for &x in &self.buf {
                    self.sample_sum.add(x);
                }
                0.0
            }
            MeanPolicy::Known(mu) => mu,
        };
        for (k, out) in self.fft_buf.iter_mut().enumerate() {
            *out = Complex::new((self.buf[k] - shift) * self.coeffs[k], 0.0);
        }
        self.fft.process(&mut self.fft_buf);
        for j in 1..=self.m / 2 {
            let x = self.fft_buf[j];
            self.power[j - 1] += x.norm_sqr();
            self.linear[j - 1] += x;
        }
        self.segments += 1;
    }

    /// Produce the estimate. Errors if not even one full segment arrived.
    pub fn finalize(&self) -> Result<PsdEstimate> {
        if self.segments == 0 {
            return Err(Error::StreamTooShort { len: self.pushed, segment_len: self.m });
        }
        let nseg = self.segments as f64;
        let norm = nseg * self.window.sum_sq(self.m);
        let mu = match self.policy {
            // The Known mean was subtracted per sample; nothing to correct.
            MeanPolicy::Known(_) => 0.0,
            MeanPolicy::Streamed => self.sample_sum.total() / (nseg * self.m as f64),
        };
        let mut freqs = Vec::with_capacity(self.m / 2);
        let mut values = Vec::with_capacity(self.m / 2);
        for j in 1..=self.m / 2 {
            freqs.push(2.0 * PI * j as f64 / self.m as f64);
            // Expanding |X_j - mu W_j|^2 summed over segments:
            // sum |X|^2 - 2 mu Re(conj(W) sum X) + nseg mu^2 |W|^2.
            let w = self.window.bin_response(self.m, j);
            let raw = self.power[j - 1] - 2.0 * mu * (w.conj() * self.linear[j - 1]).re
                + nseg * mu * mu * w.norm_sqr();
            values.push((raw / norm).max(0.0));
        }
        Ok(PsdEstimate { freqs, values, segments: self.segments, window: self.window })
    }
}

/// In-memory reference estimator: computes the exact global mean first,
/// then averages windowed segment periodograms (the classic two-pass
/// formulation of the same estimate the streaming accumulator produces).
pub fn estimate_psd(samples: &[f64], segment_len: usize, window: Window) -> Result<PsdEstimate> {
    let (consumed, mean) = consumed_mean(samples, segment_len)?;
    let mut acc = PsdAccumulator::new(segment_len, window, MeanPolicy::Known(mean))?;
    acc.push_slice(consumed);
    acc.finalize()
}

/// Direct-summation DFT oracle for [`estimate_psd`]: same convention, no
/// FFT, no shared transform code. `O(n * segment_len)` per bin — use small
/// inputs. The phase index is reduced modulo `m` in integer arithmetic so
/// the only float rounding is in the trig evaluation itself.
pub fn brute_force_psd(samples: &[f64], segment_len: usize, window: Window) -> Result<PsdEstimate> {
    if segment_len < 8 || !segment_len.is_power_of_two() {
        return Err(Error::BadSegmentLen(segment_len));
    }
    let (consumed, mean) = consumed_mean(samples, segment_len)?;
    let m = segment_len;
    let coeffs = window.coefficients(m);
    let nseg = consumed.len() / m;
    // One trig evaluation per distinct reduced phase instead of per term;
    // the looked-up values are bit-identical to evaluating inline.
    let table: Vec<(f64, f64)> = (0..m)
        .map(|idx| {
            let theta = 2.0 * PI * idx as f64 / m as f64;
            (theta.cos(), theta.sin())
        })
        .collect();
    let mut freqs = Vec::with_capacity(m / 2);
    let mut values = Vec::with_capacity(m / 2);
    for j in 1..=m / 2 {
        freqs.push(2.0 * PI * j as f64 / m as f64);
        let mut acc = 0.0;
        for s in 0..nseg {
            let seg = &consumed[s * m..(s + 1) * m];
            let (mut re, mut im) = (KahanSum::new(), KahanSum::new());
            for (k, &x) in seg.iter().enumerate() {
                let y = (x - mean) * coeffs[k];
                let idx = (j as u64 * k as u64) % m as u64;
                let (cos, sin) = table[idx as usize];
                re.add(y * cos);
                im.add(-y * sin);
            }
            acc += re.total() * re.total() + im.total() * im.total();
        }
        values.push(acc / (nseg as f64 * window.sum_sq(m)));
    }
    Ok(PsdEstimate { freqs, values, segments: nseg, window })
}

/// Truncate to whole segments and compute the exact mean of what remains.
fn consumed_mean(samples: &[f64], segment_len: usize) -> Result<(&[f64], f64)> {
    if segment_len < 8 || !segment_len.is_power_of_two() {
        return Err(Error::BadSegmentLen(segment_len));
    }
    let nseg = samples.len() / segment_len;
    if nseg == 0 {
        return Err(Error::StreamTooShort { len: samples.len() as u64, segment_len });
    }
    let consumed = &samples[..nseg * segment_len];
    let mean = consumed.iter().copied().collect::<KahanSum>().total() / consumed.len() as f64;
    Ok((consumed, mean))
}

/// Collapse an estimate onto a logarithmic frequency grid with
/// `bins_per_decade` bands per factor of ten: each band reports the
/// geometric mean of its member frequencies and the arithmetic mean of
/// their values. Bands with no members simply do not appear.
pub fn log_bin(est: &PsdEstimate, bins_per_decade: u32) -> Result<PsdEstimate> {
    if bins_per_decade == 0 {
        return Err(Error::InvalidParam {
            name: "bins_per_decade",
            reason: "must be >= 1".into(),
        });
    }
    if est.freqs.is_empty() {
        return Err(Error::EmptyEstimate);
    }
    // Points arrive in increasing frequency order, so bands are contiguous.
    let band_of = |f: f64| (bins_per_decade as f64 * f.log10()).floor() as i64;
    let mut freqs = Vec::new();
    let mut values = Vec::new();
    let mut current: Option<(i64, KahanSum, KahanSum, u64)> = None;
    let flush =
        |state: &mut Option<(i64, KahanSum, KahanSum, u64)>,
         freqs: &mut Vec<f64>,
         values: &mut Vec<f64>| {
            if let Some((_, logf, vals, count)) = state.take() {
                freqs.push((logf.total() / count as f64).exp());
                values.push(vals.total() / count as f64);
            }
        };
    for (&f, &v) in est.freqs.iter().zip(&est.values) {
        let band = band_of(f);
        match &mut current {
            Some((b, logf, vals, count)) if *b == band => {
                logf.add(f.ln());
                vals.add(v);
                *count += 1;
            }
            _ => {
                flush(&mut current, &mut freqs, &mut values);
                let mut logf = KahanSum::new();
                logf.add(f.ln());
                let mut vals = KahanSum::new();
                vals.add(v);
                current = Some((band, logf, vals, 1));
            }
        }
    }
    flush(&mut current, &mut freqs, &mut values);
    Ok(PsdEstimate { freqs, values, segments: est.segments, window: est.window })
}

/// Result of fitting the high-pass Lorentzian `A / (1 + (c/O)^2)` to an
/// estimate, by least squares in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerFit {
    /// Fitted plateau `A`.
    pub plateau: f64,
    /// Fitted corner frequency `c` in radians per period.
    pub corner: f64,
    /// Root-mean-square log-space residual at the optimum.
    pub rms_residual: f64,
}

/// Fit plateau and corner frequency to `(freq, value)` pairs. Ignores
/// non-positive values (empty bins, clamped zeros); needs at least six
/// usable points spanning a nontrivial frequency range.
pub fn fit_corner(freqs: &[f64], values: &[f64]) -> Result<CornerFit> {
    let pts: Vec<(f64, f64)> = freqs
        .iter()
        .zip(values)
        .filter(|(f, v)| f.is_finite() && **f > 0.0 && v.is_finite() && **v > 0.0)
        .map(|(&f, &v)| (f, v.ln()))
        .collect();
    if pts.len() < 6 {
        return Err(Error::Fit(format!("need at least 6 positive points, got {}", pts.len())));
    }
    let f_lo = pts.first().unwrap().0;
    let f_hi = pts.last().unwrap().0;
    if f_hi / f_lo < 4.0 {
        return Err(Error::Fit("frequency range too narrow to resolve a corner".into()));
    }

    // For a trial corner c the optimal log-plateau is the mean of
    // t_i = ln v_i + ln(1 + (c/f_i)^2), and the SSE is the spread of t.
    let sse = |ln_c: f64| {
        let c = ln_c.exp();
        let mut sum = KahanSum::new();
        let mut sum_sq = KahanSum::new();
        for &(f, ln_v) in &pts {
            let t = ln_v + (c / f).powi(2).ln_1p();
            sum.add(t);
            sum_sq.add(t * t);
        }
        let n = pts.len() as f64;
        let mean = sum.total() / n;
        (sum_sq.total() / n - mean * mean, mean)
    };

    // Coarse scan over an extended range, then golden-section refinement.
    let (ln_lo, ln_hi) = ((f_lo / 30.0).ln(), (f_hi * 30.0).ln());
    let steps = (60.0 * (ln_hi - ln_lo) / std::f64::consts::LN_10).ceil() as usize;
    let grid_step = (ln_hi - ln_lo) / steps as f64;
    let mut best = (f64::INFINITY, ln_lo);
    for i in 0..=steps {
        let ln_c = ln_lo + grid_step * i as f64;
        let (err, _) = sse(ln_c);
        if err < best.0 {
            best = (err, ln_c);
        }
    }
    let (mut a, mut b) = (best.1 - 2.0 * grid_step, best.1 + 2.0 * grid_step);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut c1, mut c2) = (b - INV_PHI * (b - a), a + INV_PHI * (b - a));
    let (mut e1, mut e2) = (sse(c1).0, sse(c2).0);
    for _ in 0..60 {
        if e1 < e2 {
            b = c2;
            c2 = c1;
            e2 = e1;
            c1 = b - INV_PHI * (b - a);
            e1 = sse(c1).0;
        } else {
            a = c1;
            c1 = c2;
            e1 = e2;
            c2 = a + INV_PHI * (b - a);
            e2 = sse(c2).0;
        }
    }
    let ln_c = 0.5 * (a + b);
    let (err, ln_plateau) = sse(ln_c);
    if !err.is_finite() || !ln_plateau.is_finite() {
        return Err(Error::Fit("degenerate optimum".into()));
    }
    Ok(CornerFit {
        plateau: ln_plateau.exp(),
        corner: ln_c.exp(),
        rms_residual: (err / pts.len() as f64).sqrt().min(err.sqrt()),
    })
}
