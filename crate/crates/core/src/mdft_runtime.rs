//! Direct-form simulation of the plain DFT bank and the MDFT bank.
//!
//! Decimators keep the samples whose index, counted from the buffer's
//! `origin`, is a multiple of the factor. Channel `k` of the MDFT bank
//! computes `u(r) = (x * h_k)(r M/2)` and keeps `Re u(r)` when `r + k` is even,
//! `j Im u(r)` otherwise, so channel 0 is real-led. On the synthesis side each
//! kept value is placed at `r M/2 + M/2` (the z^{-M/2} of the delayed branch)
//! and filtered by `f_k`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modbank::UniformBank;

#[derive(Debug, Clone, PartialEq)]
pub struct SignalBuffer {
    samples: Vec<Complex64>,
    origin: i64,
}

impl SignalBuffer {
    pub fn new(samples: Vec<Complex64>, origin: i64) -> Result<Self> {
        if let Some(index) = samples.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(SignalBuffer { samples, origin })
    }

    pub fn from_real(samples: &[f64], origin: i64) -> Result<Self> {
        Self::new(samples.iter().map(|&v| Complex64::new(v, 0.0)).collect(), origin)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_real(&self) -> bool {
        self.samples.iter().all(|v| v.im == 0.0)
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Sample at absolute index `t`, zero outside the buffer.
    pub fn at(&self, t: i64) -> Complex64 {
        let i = t - self.origin;
        if i < 0 || i as usize >= self.samples.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.samples[i as usize]
        }
    }
}

/// One channel of an MDFT analysis: the two decimated branches.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSubbands {
    /// Y^(R): Re u(r) for the r with r + parity even, in increasing r.
    pub real_part: Vec<f64>,
    /// Y^(I): Im u(r) for the r with r + parity odd, in increasing r.
    pub imag_part: Vec<f64>,
    /// Overall decimation factor M_i; each branch runs at 1/M_i of the input rate.
    pub decimation: usize,
    /// Selection parity (channel index, or start channel of a merged group).
    pub parity: usize,
}

impl ChannelSubbands {
    pub fn sample_count(&self) -> usize {
        self.real_part.len() + self.imag_part.len()
    }

    /// Interleaves the branches back into w(r) = Re u or j Im u.
    pub fn selected(&self) -> Vec<Complex64> {
        let n = self.sample_count();
        let mut out = Vec::with_capacity(n);
        let (mut a, mut b) = (0, 0);
        for r in 0..n {
            if (r + self.parity).is_multiple_of(2) {
                out.push(Complex64::new(self.real_part.get(a).copied().unwrap_or(0.0), 0.0));
                a += 1;
            } else {
                out.push(Complex64::new(0.0, self.imag_part.get(b).copied().unwrap_or(0.0)));
                b += 1;
            }
        }
        out
    }

    fn check(&self, channel: usize) -> Result<()> {
        let (re, im) = (self.real_part.len(), self.imag_part.len());
        // The real-led branch may be one sample longer, never the other way.
        let real_led = self.parity.is_multiple_of(2);
        let ok = if real_led { re == im || re == im + 1 } else { im == re || im == re + 1 };
        if !ok {
            return Err(Error::BranchLength { channel, real: re, imag: im });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubbandSet {
    pub channels: Vec<ChannelSubbands>,
    /// Absolute index of the analysed signal's first sample.
    pub origin: i64,
}

impl SubbandSet {
    pub fn total_samples(&self) -> usize {
        self.channels.iter().map(ChannelSubbands::sample_count).sum()
    }
}

/// Plain DFT bank subbands: channel k is (x * h_k) decimated by M.
#[derive(Debug, Clone, PartialEq)]
pub struct DftSubbands {
    pub channels: Vec<Vec<Complex64>>,
    pub origin: i64,
}

/// One analysis/synthesis path of the generic MDFT engine.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ChannelPath<'a> {
    pub analysis: &'a [Complex64],
    pub synthesis: &'a [Complex64],
    /// Overall decimation M_i; the first stage decimates by M_i / 2.
    pub decimation: usize,
    pub parity: usize,
    /// Output placement offset, M/2 of the source bank for every channel.
    pub place: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (u, v) in y.iter_mut().zip(x) {
        *u += a * v;
    }
}

struct Split {
    re: Vec<f64>,
    im: Vec<f64>,
}

fn split(v: &[Complex64]) -> Split {
    Split { re: v.iter().map(|c| c.re).collect(), im: v.iter().map(|c| c.im).collect() }
}

fn reversed(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().rev().copied().collect()
}

/// Samples of `x * h` at `t = step * r` for `r in 0..count`; `part` picks the
/// real (true) or imaginary (false) part per r.
fn filtered_parts(
    x: &Split,
    real_input: bool,
    h: &[Complex64],
    step: usize,
    count: usize,
    mut want_real: impl FnMut(usize) -> bool,
) -> Vec<(bool, f64)> {
    let n = h.len();
    let l = x.re.len();
    let hr = split(&reversed(h));
    (0..count)
        .map(|r| {
            let t = step * r;
            // x[m] h[t - m] for m in max(0, t+1-n) ..= min(t, l-1)
            let lo = (t + 1).saturating_sub(n);
            let hi = t.min(l - 1);
            let is_re = want_real(r);
            if lo > hi {
                return (is_re, 0.0);
            }
            // hr[j] = h[n - 1 - j], so h[t - m] sits at m + n - 1 - t.
            let start = lo + n - 1 - t;
            let end = hi + n - 1 - t;
            let xs_re = &x.re[lo..=hi];
            let hs_re = &hr.re[start..=end];
            let hs_im = &hr.im[start..=end];
            let v = if real_input {
                if is_re {
                    dot(xs_re, hs_re)
                } else {
                    dot(xs_re, hs_im)
                }
            } else {
                let xs_im = &x.im[lo..=hi];
                if is_re {
                    dot(xs_re, hs_re) - dot(xs_im, hs_im)
                } else {
                    dot(xs_re, hs_im) + dot(xs_im, hs_re)
                }
            };
            (is_re, v)
        })
        .collect()
}

pub(crate) fn analyze_path(path: &ChannelPath<'_>, x: &SignalBuffer) -> Result<ChannelSubbands> {
    if x.is_empty() {
        return Err(Error::EmptyInput("signal"));
    }
    let step = path.decimation / 2;
    let full = x.len() + path.analysis.len() - 1;
    let count = full.div_ceil(step);
    let xs = split(x.samples());
    let parity = path.parity;
    let vals = filtered_parts(&xs, x.is_real(), path.analysis, step, count, |r| (r + parity).is_multiple_of(2));
    let mut real_part = Vec::with_capacity(count / 2 + 1);
    let mut imag_part = Vec::with_capacity(count / 2 + 1);
    for (is_re, v) in vals {
        if is_re {
            real_part.push(v);
        } else {
            imag_part.push(v);
        }
    }
    Ok(ChannelSubbands { real_part, imag_part, decimation: path.decimation, parity })
}

/// Contribution of one channel as (re, im) vectors starting at output index 0.
pub(crate) fn synthesize_path(path: &ChannelPath<'_>, sub: &ChannelSubbands) -> (Vec<f64>, Vec<f64>) {
    let step = path.decimation / 2;
    let count = sub.sample_count();
    let n = path.synthesis.len();
    let len = if count == 0 { 0 } else { step * (count - 1) + path.place + n };
    let mut yr = vec![0.0; len];
    let mut yi = vec![0.0; len];
    let f = split(path.synthesis);
    let (mut a, mut b) = (0, 0);
    for r in 0..count {
        let t = step * r + path.place;
        if (r + sub.parity).is_multiple_of(2) {
            let v = sub.real_part[a];
            a += 1;
            if v != 0.0 {
                axpy(&mut yr[t..t + n], v, &f.re);
                axpy(&mut yi[t..t + n], v, &f.im);
            }
        } else {
            let v = sub.imag_part[b];
            b += 1;
            if v != 0.0 {
                axpy(&mut yr[t..t + n], -v, &f.im);
                axpy(&mut yi[t..t + n], v, &f.re);
            }
        }
    }
    (yr, yi)
}

pub(crate) fn analyze_paths(paths: &[ChannelPath<'_>], x: &SignalBuffer) -> Result<SubbandSet> {
    if x.is_empty() {
        return Err(Error::EmptyInput("signal"));
    }
    let channels = paths.par_iter().map(|p| analyze_path(p, x)).collect::<Result<Vec<_>>>()?;
    Ok(SubbandSet { channels, origin: x.origin() })
}

pub(crate) fn synthesize_paths(paths: &[ChannelPath<'_>], subbands: &SubbandSet) -> Result<SignalBuffer> {
    if subbands.channels.len() != paths.len() {
        return Err(Error::ChannelMismatch { expected: paths.len(), got: subbands.channels.len() });
    }
    for (i, (p, s)) in paths.iter().zip(&subbands.channels).enumerate() {
        if s.decimation != p.decimation {
            return Err(Error::ChannelMismatch { expected: p.decimation, got: s.decimation });
        }
        if s.parity % 2 != p.parity % 2 {
            return Err(Error::InvalidPlan(format!("channel {i}: subband parity does not match the bank")));
        }
        s.check(i)?;
    }
    let parts: Vec<(Vec<f64>, Vec<f64>)> =
        paths.par_iter().zip(&subbands.channels).map(|(p, s)| synthesize_path(p, s)).collect();
    Ok(accumulate(parts, subbands.origin))
}

fn accumulate(parts: Vec<(Vec<f64>, Vec<f64>)>, origin: i64) -> SignalBuffer {
    let len = parts.iter().map(|p| p.0.len()).max().unwrap_or(0);
    let mut yr = vec![0.0; len];
    let mut yi = vec![0.0; len];
    for (pr, pi) in &parts {
        for (u, v) in yr.iter_mut().zip(pr) {
            *u += v;
        }
        for (u, v) in yi.iter_mut().zip(pi) {
            *u += v;
        }
    }
    let samples = yr.into_iter().zip(yi).map(|(r, i)| Complex64::new(r, i)).collect();
    SignalBuffer { samples, origin }
}

pub(crate) fn uniform_paths(bank: &UniformBank) -> Vec<ChannelPath<'_>> {
    let m = bank.channels();
    (0..m)
        .map(|k| ChannelPath {
            analysis: bank.analysis(k),
            synthesis: bank.synthesis(k),
            decimation: m,
            parity: k % 2,
            place: m / 2,
        })
        .collect()
}

pub fn mdft_analyze(bank: &UniformBank, x: &SignalBuffer) -> Result<SubbandSet> {
    analyze_paths(&uniform_paths(bank), x)
}

pub fn mdft_synthesize(bank: &UniformBank, subbands: &SubbandSet) -> Result<SignalBuffer> {
    synthesize_paths(&uniform_paths(bank), subbands)
}

fn complex_dot_window(x: &[Complex64], hrev: &[Complex64], t: usize) -> Complex64 {
    let n = hrev.len();
    let lo = (t + 1).saturating_sub(n);
    let hi = t.min(x.len() - 1);
    if lo > hi {
        return Complex64::new(0.0, 0.0);
    }
    let start = lo + n - 1 - t;
    x[lo..=hi].iter().zip(&hrev[start..=start + (hi - lo)]).map(|(a, b)| a * b).sum()
}

pub fn dft_analyze(bank: &UniformBank, x: &SignalBuffer) -> Result<DftSubbands> {
    if x.is_empty() {
        return Err(Error::EmptyInput("signal"));
    }
    let m = bank.channels();
    let count = (x.len() + bank.taps() - 1).div_ceil(m);
    let channels = (0..m)
        .into_par_iter()
        .map(|k| {
            let hrev = reversed(bank.analysis(k));
            (0..count).map(|r| complex_dot_window(x.samples(), &hrev, m * r)).collect()
        })
        .collect();
    Ok(DftSubbands { channels, origin: x.origin() })
}

/// Sum over k of f_k * (subband k upsampled by M). The 1/M of the
/// decimation model is already absorbed by f_k = M h_k, so a clean channel
/// passes with unit gain.
pub fn dft_synthesize(bank: &UniformBank, subbands: &DftSubbands) -> Result<SignalBuffer> {
    let m = bank.channels();
    if subbands.channels.len() != m {
        return Err(Error::ChannelMismatch { expected: m, got: subbands.channels.len() });
    }
    let parts: Vec<(Vec<f64>, Vec<f64>)> = subbands
        .channels
        .par_iter()
        .enumerate()
        .map(|(k, u)| {
            let f = split(bank.synthesis(k));
            let n = f.re.len();
            let len = if u.is_empty() { 0 } else { m * (u.len() - 1) + n };
            let mut yr = vec![0.0; len];
            let mut yi = vec![0.0; len];
            for (r, v) in u.iter().enumerate() {
                let t = m * r;
                if v.re != 0.0 {
                    axpy(&mut yr[t..t + n], v.re, &f.re);
                    axpy(&mut yi[t..t + n], v.re, &f.im);
                }
                if v.im != 0.0 {
                    axpy(&mut yr[t..t + n], -v.im, &f.im);
                    axpy(&mut yi[t..t + n], v.im, &f.re);
                }
            }
            (yr, yi)
        })
        .collect();
    Ok(accumulate(parts, subbands.origin))
}

/// Full linear convolution, length `a.len() + b.len() - 1`.
pub fn convolve(a: &[Complex64], b: &[Complex64]) -> Result<Vec<Complex64>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("convolution operand"));
    }
    let brev = reversed(b);
    Ok((0..a.len() + b.len() - 1).map(|t| complex_dot_window(a, &brev, t)).collect())
}

/// Keeps x[phase], x[phase + factor], ...
pub fn decimate(x: &[Complex64], factor: usize, phase: usize) -> Result<Vec<Complex64>> {
    if factor == 0 {
        return Err(Error::InvalidPlan("decimation factor must be positive".into()));
    }
    Ok(x.iter().skip(phase).step_by(factor).copied().collect())
}

/// Inserts factor - 1 zeros after every sample.
pub fn upsample(x: &[Complex64], factor: usize) -> Result<Vec<Complex64>> {
    if factor == 0 {
        return Err(Error::InvalidPlan("upsampling factor must be positive".into()));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); x.len() * factor];
    for (i, &v) in x.iter().enumerate() {
        out[i * factor] = v;
    }
    Ok(out)
}

/// Anything that can push a signal through analysis and synthesis.
pub trait RoundTrip: Sync {
    /// Channel count of the underlying uniform bank.
    fn source_channels(&self) -> usize;
    /// Widest merged group (1 for uniform banks).
    fn widest_group(&self) -> usize;
    /// Expected input-to-output delay in samples.
    fn nominal_delay(&self) -> usize;
    fn round_trip(&self, x: &SignalBuffer) -> Result<SignalBuffer>;
}

impl RoundTrip for UniformBank {
    fn source_channels(&self) -> usize {
        self.channels()
    }

    fn widest_group(&self) -> usize {
        1
    }

    fn nominal_delay(&self) -> usize {
        self.system_delay()
    }

    fn round_trip(&self, x: &SignalBuffer) -> Result<SignalBuffer> {
        mdft_synthesize(self, &mdft_analyze(self, x)?)
    }
}

/// The plain DFT bank of the same prototype (Fig. 1 structure).
#[derive(Debug, Clone, Copy)]
pub struct DftBank<'a>(pub &'a UniformBank);

impl RoundTrip for DftBank<'_> {
    fn source_channels(&self) -> usize {
        self.0.channels()
    }

    fn widest_group(&self) -> usize {
        1
    }

    fn nominal_delay(&self) -> usize {
        self.0.taps() - 1
    }

    fn round_trip(&self, x: &SignalBuffer) -> Result<SignalBuffer> {
        dft_synthesize(self.0, &dft_analyze(self.0, x)?)
    }
}

/// Identity system, useful as a measurement sanity check.
#[derive(Debug, Clone, Copy)]
pub struct Bypass {
    pub channels: usize,
}

impl RoundTrip for Bypass {
    fn source_channels(&self) -> usize {
        self.channels
    }

    fn widest_group(&self) -> usize {
        1
    }

    fn nominal_delay(&self) -> usize {
        0
    }

    fn round_trip(&self, x: &SignalBuffer) -> Result<SignalBuffer> {
        Ok(x.clone())
    }
}
