//! Distortion, flatness, alias, reconstruction and phase measurements.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::firdesign::{dtft_at, power_at, uniform_grid, FilterSpec, Prototype, TapCount};
use crate::mdft_runtime::{RoundTrip, SignalBuffer};
use crate::merge::{MergePlan, NonUniformBank};
use crate::modbank::UniformBank;

/// Alias floor a clean bank should reach, dB relative to the probe tone.
pub const ALIAS_TARGET_DB: f64 = -50.0;
/// Reconstruction SNR target for the uniform MDFT bank.
pub const SNR_TARGET_DB: f64 = 50.0;
/// Peak-to-peak amplitude distortion target.
pub const DISTORTION_TARGET_DB: f64 = 0.01;
/// Power-complementarity target after 3-dB edge adjustment.
pub const FLATNESS_TARGET: f64 = 0.01;
/// Merged-filter passband deviation target inside the Property-1 band.
pub const BAND_DEVIATION_TARGET: f64 = 0.05;
/// Reported SNR for an error-free reconstruction.
pub const SNR_CAP_DB: f64 = 300.0;
/// Half-width of the masks around the tone and DC, in bins of the
/// un-padded analysis segment. The Blackman-Harris main lobe spans four.
pub const PROBE_MASK_BINS: f64 = 5.0;
/// Length of the steady-state segment analysed by [`alias_probe`].
pub const PROBE_SEGMENT: usize = 16384;
/// Fractional channel offsets of the probes used for a merged pair (a, a+1).
pub const PAIR_PROBE_OFFSETS: [f64; 4] = [-0.25, 0.25, 0.75, 1.25];

#[derive(Debug, Clone, PartialEq)]
pub enum SpectrumValues {
    Complex(Vec<Complex64>),
    Linear(Vec<f64>),
    Decibel(Vec<f64>),
}

impl SpectrumValues {
    fn len(&self) -> usize {
        match self {
            SpectrumValues::Complex(v) => v.len(),
            SpectrumValues::Linear(v) | SpectrumValues::Decibel(v) => v.len(),
        }
    }
}

/// Values on a strictly increasing frequency grid. Grids may extend past pi
/// (to 2 pi) so that a band straddling pi can be described without a jump.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    grid: Vec<f64>,
    values: SpectrumValues,
}

impl SpectrumReport {
    pub fn new(grid: Vec<f64>, values: SpectrumValues) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::EmptyInput("frequency grid"));
        }
        if grid.len() != values.len() {
            return Err(Error::ChannelMismatch { expected: grid.len(), got: values.len() });
        }
        check_grid(&grid)?;
        Ok(SpectrumReport { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &SpectrumValues {
        &self.values
    }

    pub fn magnitude(&self) -> Vec<f64> {
        match &self.values {
            SpectrumValues::Complex(v) => v.iter().map(|c| c.norm()).collect(),
            SpectrumValues::Linear(v) => v.iter().map(|x| x.abs()).collect(),
            SpectrumValues::Decibel(v) => v.iter().map(|d| 10f64.powf(d / 20.0)).collect(),
        }
    }

    pub fn magnitude_db(&self) -> Vec<f64> {
        match &self.values {
            SpectrumValues::Decibel(v) => v.clone(),
            _ => self.magnitude().iter().map(|m| 20.0 * m.log10()).collect(),
        }
    }

    /// Max minus min of the dB magnitude over grid points in [lo, hi].
    pub fn peak_to_peak_db(&self, lo: f64, hi: f64) -> Option<f64> {
        let db = self.magnitude_db();
        let inside = self.grid.iter().zip(&db).filter(|(w, _)| lo <= **w && **w <= hi).map(|(_, d)| *d);
        let (mn, mx) = inside.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), d| (a.min(d), b.max(d)));
        (mn <= mx).then_some(mx - mn)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        match &self.values {
            SpectrumValues::Complex(v) => {
                s.push_str("omega,re,im,magnitude_db\n");
                for (w, c) in self.grid.iter().zip(v) {
                    let _ = writeln!(s, "{w:.11e},{:.11e},{:.11e},{:.11e}", c.re, c.im, 20.0 * c.norm().log10());
                }
            }
            SpectrumValues::Linear(v) => {
                s.push_str("omega,value\n");
                for (w, x) in self.grid.iter().zip(v) {
                    let _ = writeln!(s, "{w:.11e},{x:.11e}");
                }
            }
            SpectrumValues::Decibel(v) => {
                s.push_str("omega,value_db\n");
                for (w, x) in self.grid.iter().zip(v) {
                    let _ = writeln!(s, "{w:.11e},{x:.11e}");
                }
            }
        }
        s
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    for (i, w) in grid.iter().enumerate() {
        if !w.is_finite() || w.abs() > 2.0 * PI + 1e-12 {
            return Err(Error::InvalidSpec(format!("grid point {i} ({w}) outside [-2pi, 2pi]")));
        }
    }
    if grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::InvalidSpec("grid must be strictly increasing".into()));
    }
    Ok(())
}

fn response(c: &[Complex64], grid: &[f64]) -> Vec<Complex64> {
    grid.par_iter().map(|&w| dtft_at(c, w)).collect()
}

/// Per-channel products F_k H_k of the uniform bank, in channel order.
fn channel_products(bank: &UniformBank, grid: &[f64]) -> Vec<Vec<Complex64>> {
    (0..bank.channels())
        .into_par_iter()
        .map(|k| {
            let h = response(bank.analysis(k), grid);
            let f = response(bank.synthesis(k), grid);
            f.iter().zip(&h).map(|(a, b)| a * b).collect()
        })
        .collect()
}

fn sum_scaled(terms: &[Vec<Complex64>], scale: f64, len: usize) -> Vec<Complex64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); len];
    for t in terms {
        for (a, v) in acc.iter_mut().zip(t) {
            *a += v;
        }
    }
    acc.iter().map(|v| v * scale).collect()
}

/// T(e^{jw}) = (1/M) sum_k F_k H_k.
pub fn distortion_uniform(bank: &UniformBank, grid: &[f64]) -> Result<SpectrumReport> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("frequency grid"));
    }
    check_grid(grid)?;
    let terms = channel_products(bank, grid);
    let t = sum_scaled(&terms, 1.0 / bank.channels() as f64, grid.len());
    SpectrumReport::new(grid.to_vec(), SpectrumValues::Complex(t))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonUniformDistortion {
    /// (1/M) sum_i sum_{k in group i} F_k H_k.
    pub diagonal: SpectrumReport,
    /// sum_i (1/M_i) F~_i H~_i from the merged filters themselves.
    pub full: SpectrumReport,
    /// (1/M) sum_i sum_{k=n_i}^{n_i+p_i-2} (F_k H_{k+1} + F_{k+1} H_k).
    pub adjacent_residual: SpectrumReport,
}

impl NonUniformDistortion {
    /// Largest |adjacent residual| on the grid.
    pub fn max_residual(&self) -> f64 {
        self.adjacent_residual.magnitude().into_iter().fold(0.0, f64::max)
    }
}

pub fn distortion_nonuniform(nubank: &NonUniformBank, grid: &[f64]) -> Result<NonUniformDistortion> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("frequency grid"));
    }
    check_grid(grid)?;
    let src = nubank.source();
    let m = src.channels();
    let inv_m = 1.0 / m as f64;
    let len = grid.len();
    // Groups are contiguous and ascending, so this visits k = 0..M-1 in the
    // same order as the uniform sum.
    let terms = channel_products(src, grid);
    let diagonal = sum_scaled(&terms, inv_m, len);

    let full_terms: Vec<Vec<Complex64>> = (0..nubank.channels())
        .into_par_iter()
        .map(|i| {
            let h = response(nubank.analysis(i), grid);
            let f = response(nubank.synthesis(i), grid);
            let s = 1.0 / nubank.decimation(i) as f64;
            f.iter().zip(&h).map(|(a, b)| a * b * s).collect()
        })
        .collect();
    let full = sum_scaled(&full_terms, 1.0, len);

    let mut cross = Vec::new();
    for &(n, p) in nubank.plan().groups() {
        for k in n..n + p - 1 {
            let hk = response(src.analysis(k), grid);
            let hk1 = response(src.analysis(k + 1), grid);
            let fk = response(src.synthesis(k), grid);
            let fk1 = response(src.synthesis(k + 1), grid);
            cross.push((0..len).map(|j| fk[j] * hk1[j] + fk1[j] * hk[j]).collect::<Vec<_>>());
        }
    }
    let residual = sum_scaled(&cross, inv_m, len);
    Ok(NonUniformDistortion {
        diagonal: SpectrumReport::new(grid.to_vec(), SpectrumValues::Complex(diagonal))?,
        full: SpectrumReport::new(grid.to_vec(), SpectrumValues::Complex(full))?,
        adjacent_residual: SpectrumReport::new(grid.to_vec(), SpectrumValues::Complex(residual))?,
    })
}

/// Grid of `count` points over [0, 2 pi / M].
pub fn flatness_grid(m: usize, count: usize) -> Vec<f64> {
    uniform_grid(0.0, 2.0 * PI / m as f64, count)
}

/// max | |H(w)|^2 + |H(w - 2pi/M)|^2 - 1 | over the grid.
pub fn flatness_deviation(prototype: &Prototype, m: usize, grid: &[f64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("frequency grid"));
    }
    if m == 0 {
        return Err(Error::InvalidChannelCount { m, reason: "M must be positive" });
    }
    let h = prototype.coefficients();
    let shift = 2.0 * PI / m as f64;
    Ok(grid.par_iter().map(|&w| (power_at(h, w) + power_at(h, w - shift) - 1.0).abs()).reduce(|| 0.0, f64::max))
}

/// Band where a merged filter should be flat: from the centre of its first
/// channel to the centre of its last, i.e. the group's nominal band
/// ((n - 1/2) 2pi/M, (n + p - 1/2) 2pi/M) narrowed by pi/M at each end.
pub fn property1_band(m: usize, n: usize, p: usize) -> (f64, f64) {
    let unit = 2.0 * PI / m as f64;
    let eps = PI / m as f64;
    ((n as f64 - 0.5) * unit + eps, (n as f64 + p as f64 - 0.5) * unit - eps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergedFlatness {
    /// |H~_i(e^{jw})|^2 on the requested grid.
    pub spectrum: SpectrumReport,
    pub band: (f64, f64),
    /// max | |H~_i|^2 - 1 | over grid points in the band (taken modulo 2 pi)
    /// and the band ends.
    pub max_deviation: f64,
}

pub fn merged_flatness(nubank: &NonUniformBank, i: usize, grid: &[f64]) -> Result<MergedFlatness> {
    if i >= nubank.channels() {
        return Err(Error::IndexOutOfRange { index: i, len: nubank.channels() });
    }
    if grid.is_empty() {
        return Err(Error::EmptyInput("frequency grid"));
    }
    let (n, p) = nubank.plan().groups()[i];
    let band = property1_band(nubank.source().channels(), n, p);
    let h = nubank.analysis(i);
    let power: Vec<f64> = response(h, grid).iter().map(|v| v.norm_sqr()).collect();
    let mut dev = [band.0, band.1].iter().map(|&w| (dtft_at(h, w).norm_sqr() - 1.0).abs()).fold(0.0, f64::max);
    for (w, v) in grid.iter().zip(&power) {
        // Membership modulo 2 pi, so a [-pi, pi) grid covers bands past pi.
        if (w - band.0).rem_euclid(2.0 * PI) <= band.1 - band.0 {
            dev = dev.max((v - 1.0).abs());
        }
    }
    Ok(MergedFlatness {
        spectrum: SpectrumReport::new(grid.to_vec(), SpectrumValues::Linear(power))?,
        band,
        max_deviation: dev,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeResult {
    pub frequency: f64,
    /// Largest unmasked spectral peak relative to the tone, dB.
    pub level_db: f64,
    /// Frequency of that peak in [-pi, pi).
    pub spur_frequency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AliasReport {
    pub probes: Vec<ProbeResult>,
    pub worst_db: f64,
}

fn blackman_harris(n: usize) -> Vec<f64> {
    const A: [f64; 4] = [0.35875, 0.48829, 0.14128, 0.01168];
    let d = (n - 1) as f64;
    (0..n)
        .map(|i| {
            let x = 2.0 * PI * i as f64 / d;
            A[0] - A[1] * x.cos() + A[2] * (2.0 * x).cos() - A[3] * (3.0 * x).cos()
        })
        .collect()
}

fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// Samples from `settle` on where every filter in the chain sees input.
fn probe_layout(system: &dyn RoundTrip) -> (usize, usize) {
    let m = system.source_channels();
    let settle = 2 * system.nominal_delay() + 2 * m;
    let seg = PROBE_SEGMENT.max(64 * m * system.widest_group());
    (settle, seg)
}

/// Two-sided windowed magnitude spectrum of `y[start..start+seg]`, FFT
/// length at least 8 * seg.
pub fn windowed_spectrum(y: &[Complex64], start: usize, seg: usize) -> Vec<f64> {
    let k = next_pow2(8 * seg);
    let win = blackman_harris(seg);
    let mut buf = vec![Complex64::new(0.0, 0.0); k];
    for i in 0..seg {
        let v = y.get(start + i).copied().unwrap_or_default();
        buf[i] = v * win[i];
    }
    FftPlanner::new().plan_fft_forward(k).process(&mut buf);
    buf.iter().map(|c| c.norm()).collect()
}

fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// One real cosine probe of the given amplitude through the system.
pub fn alias_probe_tone(system: &dyn RoundTrip, frequency: f64, amplitude: f64) -> Result<ProbeResult> {
    if amplitude == 0.0 || !amplitude.is_finite() {
        return Err(Error::DegenerateProbe(format!("amplitude {amplitude}")));
    }
    if !frequency.is_finite() || frequency.sin().abs() < 1e-9 {
        return Err(Error::DegenerateProbe(format!("probe at {frequency} sits on DC or pi")));
    }
    let (settle, seg) = probe_layout(system);
    let len = settle + seg;
    let x: Vec<f64> = (0..len).map(|t| amplitude * (frequency * t as f64).cos()).collect();
    let y = system.round_trip(&SignalBuffer::from_real(&x, 0)?)?;
    let spec = windowed_spectrum(y.samples(), settle, seg);
    let k = spec.len();
    let mask = PROBE_MASK_BINS * 2.0 * PI / seg as f64;
    let (mut tone, mut spur, mut spur_w) = (0.0f64, 0.0f64, 0.0);
    for (b, &mag) in spec.iter().enumerate() {
        let w = 2.0 * PI * b as f64 / k as f64;
        let near_tone = angular_distance(w, frequency) <= mask || angular_distance(w, -frequency) <= mask;
        if near_tone {
            tone = tone.max(mag);
        } else if angular_distance(w, 0.0) > mask && mag > spur {
            spur = mag;
            spur_w = w;
        }
    }
    if tone == 0.0 {
        return Err(Error::DegenerateProbe("tone vanished at the output".into()));
    }
    let level_db = if spur > 0.0 { 20.0 * (spur / tone).log10() } else { -SNR_CAP_DB };
    let spur_frequency = if spur_w >= PI { spur_w - 2.0 * PI } else { spur_w };
    Ok(ProbeResult { frequency, level_db, spur_frequency })
}

/// Unit-amplitude cosine probes; reports the worst residual peak.
pub fn alias_probe(system: &dyn RoundTrip, probes: &[f64]) -> Result<AliasReport> {
    if probes.is_empty() {
        return Err(Error::EmptyInput("probe list"));
    }
    let probes = probes.iter().map(|&w| alias_probe_tone(system, w, 1.0)).collect::<Result<Vec<_>>>()?;
    let worst_db = probes.iter().map(|p| p.level_db).fold(f64::NEG_INFINITY, f64::max);
    Ok(AliasReport { probes, worst_db })
}

/// Mod-pi wrap into (-pi/2, pi/2].
fn wrap_half(x: f64) -> f64 {
    let y = (x + PI / 2.0).rem_euclid(PI) - PI / 2.0;
    if y <= -PI / 2.0 {
        y + PI
    } else {
        y
    }
}

/// Maximum deviation of the group delay from its median, in samples, over
/// frequencies where |H| exceeds 1e-4 of its peak. The phase is sampled by
/// a zero-padded FFT dense enough that adjacent-bin phase steps stay below
/// pi/2, differenced centrally and wrapped modulo pi so the sign flips of a
/// real amplitude response do not count.
pub fn phase_linearity(taps: &[Complex64]) -> Result<f64> {
    if taps.is_empty() {
        return Err(Error::EmptyInput("filter taps"));
    }
    if taps.iter().all(|c| c.norm() == 0.0) {
        return Err(Error::ZeroFilter);
    }
    let k = next_pow2(8192.max(16 * taps.len()));
    let mut buf = vec![Complex64::new(0.0, 0.0); k];
    buf[..taps.len()].copy_from_slice(taps);
    FftPlanner::new().plan_fft_forward(k).process(&mut buf);
    let mag: Vec<f64> = buf.iter().map(|c| c.norm()).collect();
    let peak = mag.iter().copied().fold(0.0, f64::max);
    let floor = 1e-4 * peak;
    let dw = 2.0 * PI / k as f64;
    let mut tau = Vec::new();
    for b in 0..k {
        let (prev, next) = ((b + k - 1) % k, (b + 1) % k);
        if mag[prev] > floor && mag[b] > floor && mag[next] > floor {
            let step = (buf[next] * buf[prev].conj()).arg();
            tau.push(-wrap_half(step) / (2.0 * dw));
        }
    }
    if tau.is_empty() {
        return Err(Error::ZeroFilter);
    }
    let mut sorted = tau.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    Ok(tau.iter().map(|t| (t - median).abs()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reconstruction {
    pub snr_db: f64,
    /// Output lag maximising the cross-correlation with the input.
    pub delay: i64,
    /// Least-squares complex gain applied before differencing.
    pub gain: Complex64,
}

fn cross_correlation_peak(y: &[Complex64], x: &[Complex64]) -> i64 {
    let k = next_pow2(y.len() + x.len());
    let mut fy = vec![Complex64::new(0.0, 0.0); k];
    let mut fx = vec![Complex64::new(0.0, 0.0); k];
    fy[..y.len()].copy_from_slice(y);
    fx[..x.len()].copy_from_slice(x);
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(k);
    fwd.process(&mut fy);
    fwd.process(&mut fx);
    let mut c: Vec<Complex64> = fy.iter().zip(&fx).map(|(a, b)| a * b.conj()).collect();
    planner.plan_fft_inverse(k).process(&mut c);
    // c[d] = sum_t y(t + d) conj(x(t)), negative lags wrap to the top.
    let (best, _) =
        c.iter().enumerate().fold((0usize, -1.0f64), |acc, (i, v)| if v.norm() > acc.1 { (i, v.norm()) } else { acc });
    if best >= k - x.len() {
        best as i64 - k as i64
    } else {
        best as i64
    }
}

/// Delay by cross-correlation, complex gain by least squares, then
/// 10 log10(sum |x|^2 / sum |x - g x^|^2), capped at [`SNR_CAP_DB`].
pub fn measure_reconstruction(system: &dyn RoundTrip, x: &SignalBuffer) -> Result<Reconstruction> {
    let needed = 16 * system.source_channels() * system.widest_group();
    if x.len() < needed {
        return Err(Error::InsufficientLength { needed, got: x.len() });
    }
    let energy = x.energy();
    if energy == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let pad = system.nominal_delay() + system.source_channels();
    let mut padded = vec![Complex64::new(0.0, 0.0); pad];
    padded.extend_from_slice(x.samples());
    padded.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), pad));
    let xp = SignalBuffer::new(padded, 0)?;
    let y = system.round_trip(&xp)?;
    let delay = cross_correlation_peak(y.samples(), xp.samples());
    let aligned: Vec<Complex64> = (0..xp.len()).map(|t| y.at(t as i64 + delay)).collect();
    let num: Complex64 = aligned.iter().zip(xp.samples()).map(|(a, b)| a.conj() * b).sum();
    let den: f64 = aligned.iter().map(|a| a.norm_sqr()).sum();
    let gain = if den > 0.0 { num / den } else { Complex64::new(0.0, 0.0) };
    let err: f64 = aligned.iter().zip(xp.samples()).map(|(a, b)| (b - gain * a).norm_sqr()).sum();
    let snr_db = if err == 0.0 { SNR_CAP_DB } else { (10.0 * (energy / err).log10()).min(SNR_CAP_DB) };
    Ok(Reconstruction { snr_db, delay, gain })
}

pub fn reconstruction_snr(system: &dyn RoundTrip, x: &SignalBuffer) -> Result<f64> {
    Ok(measure_reconstruction(system, x)?.snr_db)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BankReport {
    pub distortion_peak_to_peak_db: f64,
    pub max_flatness_deviation: f64,
    pub worst_alias_level_db: f64,
    pub reconstruction_snr_db: f64,
    pub max_group_delay_deviation_samples: f64,
}

impl BankReport {
    pub fn to_csv(&self) -> String {
        let rows = [
            ("distortion_peak_to_peak_db", self.distortion_peak_to_peak_db),
            ("max_flatness_deviation", self.max_flatness_deviation),
            ("worst_alias_level_db", self.worst_alias_level_db),
            ("reconstruction_snr_db", self.reconstruction_snr_db),
            ("max_group_delay_deviation_samples", self.max_group_delay_deviation_samples),
        ];
        let mut s = String::from("key,value\n");
        for (k, v) in rows {
            let _ = writeln!(s, "{k},{v:.11e}");
        }
        s
    }
}

/// Prototype spec for alias sweeps: 3-dB point near pi/M, transition width
/// 0.4 pi/M, 60 dB stopband, 0.004 dB ripple.
pub fn sweep_spec(m: usize) -> Result<FilterSpec> {
    let c = PI / m as f64;
    FilterSpec::new(c - 0.2 * c, c + 0.2 * c, 0.004, 60.0, TapCount::Auto)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairSweep {
    pub m: usize,
    /// Worst probe level for the merge of (a, a+1), indexed by a. `None` where
    /// the pair cannot be realised (M/2 odd).
    pub pair_levels: Vec<Option<f64>>,
}

impl PairSweep {
    /// Pair with the highest alias level.
    pub fn worst_pair(&self) -> Option<usize> {
        self.pair_levels
            .iter()
            .enumerate()
            .filter_map(|(a, l)| l.map(|l| (a, l)))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(a, _)| a)
    }

    /// Channel whose every realisable merge aliases the most: the argmax over
    /// channels c of the smaller of the levels of pairs (c-1, c) and (c, c+1).
    pub fn empirical_channel(&self) -> Option<usize> {
        (0..self.m)
            .filter_map(|c| {
                let left = c.checked_sub(1).and_then(|a| self.pair_levels.get(a).copied().flatten());
                let right = self.pair_levels.get(c).copied().flatten();
                let level = match (left, right) {
                    (Some(l), Some(r)) => l.min(r),
                    (Some(l), None) => l,
                    (None, Some(r)) => r,
                    (None, None) => return None,
                };
                Some((c, level))
            })
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .map(|(c, _)| c)
    }

    /// Worst level over pairs that do not include `channel`.
    pub fn worst_excluding(&self, channel: usize) -> Option<f64> {
        self.pair_levels
            .iter()
            .enumerate()
            .filter(|(a, _)| *a != channel && a + 1 != channel)
            .filter_map(|(_, l)| *l)
            .fold(None, |acc: Option<f64>, l| Some(acc.map_or(l, |a| a.max(l))))
    }
}

/// Merges every adjacent pair (override on) and probes each with cosines at
/// [`PAIR_PROBE_OFFSETS`] channel widths from the lower channel's centre.
pub fn pair_alias_sweep(bank: &UniformBank) -> Result<PairSweep> {
    let m = bank.channels();
    let pair_levels = (0..m - 1)
        .into_par_iter()
        .map(|a| {
            let plan = MergePlan::pair(m, a)?;
            let nu = match crate::merge::merge_bank(bank, &plan, true) {
                Ok(nu) => nu,
                Err(Error::UnsupportedDecimation { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let probes: Vec<f64> = PAIR_PROBE_OFFSETS.iter().map(|o| (a as f64 + o) * 2.0 * PI / m as f64).collect();
            Ok(Some(alias_probe(&nu, &probes)?.worst_db))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PairSweep { m, pair_levels })
}
