//! Equiripple design of the linear-phase lowpass prototype and 3-dB edge
//! tuning for M-channel modulated banks.

mod estimate;
mod remez;
mod response;

use std::f64::consts::PI;

pub use estimate::{herrmann_length, round_up_aligned, round_up_odd};
pub use response::{centered_grid, freq_response, uniform_grid};
pub(crate) use response::{dtft_at, power_at};

use crate::error::{Error, Result};

/// Longest filter the designer will attempt.
pub const MAX_TAPS: usize = 65_535;
/// Bisection steps allowed in [`adjust_edges_3db`].
pub const MAX_EDGE_ITERATIONS: usize = 60;
/// Required accuracy of |H(e^{j pi/M})|^2 after edge adjustment.
pub const CROSSOVER_TOLERANCE: f64 = 1e-3;
/// Bisection stops early once the crossover is this close to 0.5.
const CROSSOVER_TARGET: f64 = 1e-4;
/// Points used for the measured ripple/attenuation in a [`DesignRecord`].
const MEASURE_POINTS: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TapCount {
    Auto,
    Fixed(usize),
}

/// Lowpass requirements. Edges are angular frequencies in (0, pi).
///
/// The transition width is stored rather than the stopband edge so that
/// shifting the band keeps the width bit-for-bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    passband_edge: f64,
    transition_width: f64,
    max_passband_ripple_db: f64,
    min_stopband_atten_db: f64,
    num_taps: TapCount,
}

impl FilterSpec {
    pub fn new(
        passband_edge: f64,
        stopband_edge: f64,
        max_passband_ripple_db: f64,
        min_stopband_atten_db: f64,
        num_taps: TapCount,
    ) -> Result<Self> {
        if !(passband_edge.is_finite() && stopband_edge.is_finite()) {
            return Err(Error::InvalidSpec("band edges must be finite".into()));
        }
        if !(passband_edge < stopband_edge) {
            return Err(Error::InvalidSpec(format!(
                "passband edge {passband_edge} must lie below stopband edge {stopband_edge}"
            )));
        }
        Self::with_width(
            passband_edge,
            stopband_edge - passband_edge,
            max_passband_ripple_db,
            min_stopband_atten_db,
            num_taps,
        )
    }

    fn with_width(
        passband_edge: f64,
        transition_width: f64,
        max_passband_ripple_db: f64,
        min_stopband_atten_db: f64,
        num_taps: TapCount,
    ) -> Result<Self> {
        let spec =
            FilterSpec { passband_edge, transition_width, max_passband_ripple_db, min_stopband_atten_db, num_taps };
        let ws = spec.stopband_edge();
        if !(passband_edge > 0.0 && ws < PI) {
            return Err(Error::InvalidSpec(format!("edges ({passband_edge}, {ws}) must lie strictly inside (0, pi)")));
        }
        if !(transition_width > 0.0) {
            return Err(Error::InvalidSpec("transition width must be positive".into()));
        }
        if !(max_passband_ripple_db > 0.0 && max_passband_ripple_db.is_finite()) {
            return Err(Error::InvalidSpec("passband ripple must be a positive dB value".into()));
        }
        if !(min_stopband_atten_db > 0.0 && min_stopband_atten_db.is_finite()) {
            return Err(Error::InvalidSpec("stopband attenuation must be a positive dB value".into()));
        }
        if let TapCount::Fixed(n) = num_taps {
            if n < 3 {
                return Err(Error::InvalidSpec(format!("{n} taps is too short for a lowpass")));
            }
            if n > MAX_TAPS {
                return Err(Error::InvalidSpec(format!("{n} taps exceeds the {MAX_TAPS} limit")));
            }
        }
        Ok(spec)
    }

    pub fn passband_edge(&self) -> f64 {
        self.passband_edge
    }

    pub fn stopband_edge(&self) -> f64 {
        self.passband_edge + self.transition_width
    }

    pub fn transition_width(&self) -> f64 {
        self.transition_width
    }

    pub fn max_passband_ripple_db(&self) -> f64 {
        self.max_passband_ripple_db
    }

    pub fn min_stopband_atten_db(&self) -> f64 {
        self.min_stopband_atten_db
    }

    pub fn num_taps(&self) -> TapCount {
        self.num_taps
    }

    pub fn with_taps(&self, num_taps: TapCount) -> Result<Self> {
        Self::with_width(
            self.passband_edge,
            self.transition_width,
            self.max_passband_ripple_db,
            self.min_stopband_atten_db,
            num_taps,
        )
    }

    /// Same requirements with both edges moved so the passband edge lands at
    /// `passband_edge`; the transition width is carried over unchanged.
    pub fn shifted_to(&self, passband_edge: f64) -> Result<Self> {
        Self::with_width(
            passband_edge,
            self.transition_width,
            self.max_passband_ripple_db,
            self.min_stopband_atten_db,
            self.num_taps,
        )
    }

    /// Linear passband deviation: peak departure of |H| from 1.
    pub fn passband_deviation(&self) -> f64 {
        10f64.powf(self.max_passband_ripple_db / 20.0) - 1.0
    }

    pub fn stopband_deviation(&self) -> f64 {
        10f64.powf(-self.min_stopband_atten_db / 20.0)
    }

    /// Length estimate before any rounding.
    pub fn estimated_taps(&self) -> usize {
        let df = self.transition_width / (2.0 * PI);
        let n = herrmann_length(self.passband_deviation(), self.stopband_deviation(), df).ceil();
        if n.is_finite() && n > 0.0 {
            (n as usize).max(3)
        } else {
            usize::MAX
        }
    }
}

/// Diagnostics attached to a designed prototype.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignRecord {
    /// The spec actually handed to the exchange (after any edge shift).
    pub spec: FilterSpec,
    pub iterations: usize,
    /// Final weighted equiripple deviation.
    pub deviation: f64,
    pub extremal_frequencies: Vec<f64>,
    pub alternations: usize,
    /// +/- ripple in dB, measured on a dense grid.
    pub passband_ripple_db: f64,
    pub stopband_atten_db: f64,
    pub edge_adjustment: Option<EdgeAdjustment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeAdjustment {
    pub channels: usize,
    pub iterations: usize,
    /// |H(e^{j pi/M})|^2 of the returned filter.
    pub crossover_power: f64,
}

/// Real symmetric lowpass FIR with unit DC gain.
#[derive(Debug, Clone, PartialEq)]
pub struct Prototype {
    coefficients: Vec<f64>,
    group_delay: f64,
    record: Option<DesignRecord>,
}

impl Prototype {
    /// Wraps externally supplied taps. They must be exactly symmetric and have
    /// unit DC gain within 1e-6.
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::EmptyInput("prototype coefficients"));
        }
        if let Some(index) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let n = coefficients.len();
        if (0..n / 2).any(|i| coefficients[i] != coefficients[n - 1 - i]) {
            return Err(Error::InvalidSpec("prototype taps are not symmetric".into()));
        }
        let dc: f64 = coefficients.iter().sum();
        if (dc - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidSpec(format!("prototype DC gain {dc} is not 1")));
        }
        Ok(Prototype { group_delay: (n as f64 - 1.0) / 2.0, coefficients, record: None })
    }

    /// Scales symmetric taps to unit DC gain, then wraps them.
    pub fn normalized(mut coefficients: Vec<f64>) -> Result<Self> {
        let dc: f64 = coefficients.iter().sum();
        if dc == 0.0 || !dc.is_finite() {
            return Err(Error::InvalidSpec("prototype DC gain is zero".into()));
        }
        coefficients.iter_mut().for_each(|c| *c /= dc);
        Self::new(coefficients)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn group_delay(&self) -> f64 {
        self.group_delay
    }

    pub fn record(&self) -> Option<&DesignRecord> {
        self.record.as_ref()
    }

    /// |H(e^{jw})|^2.
    pub fn power(&self, w: f64) -> f64 {
        power_at(&self.coefficients, w)
    }
}

/// Normalises taps to unit DC gain, keeping pairs bit-identical.
fn normalise_dc(h: &mut [f64]) {
    let n = h.len();
    // Sum mirrored pairs first so the result does not depend on orientation.
    let mut dc = if n % 2 == 1 { h[n / 2] } else { 0.0 };
    for i in 0..n / 2 {
        dc += h[i] + h[n - 1 - i];
    }
    for v in h.iter_mut() {
        *v /= dc;
    }
}

fn measure(h: &[f64], spec: &FilterSpec) -> (f64, f64) {
    let grid = uniform_grid(0.0, PI, MEASURE_POINTS);
    let (mut pmax, mut pmin, mut smax) = (0.0f64, f64::INFINITY, 0.0f64);
    for &w in &grid {
        let in_pass = w <= spec.passband_edge();
        let in_stop = w >= spec.stopband_edge();
        if !(in_pass || in_stop) {
            continue;
        }
        let mag = power_at(h, w).sqrt();
        if in_pass {
            pmax = pmax.max(mag);
            pmin = pmin.min(mag);
        } else {
            smax = smax.max(mag);
        }
    }
    let ripple = 10.0 * (pmax / pmin).log10();
    let atten = -20.0 * smax.log10();
    (ripple, atten)
}

fn design_with(spec: &FilterSpec, num_taps: usize, warm: Option<&remez::WarmStart>) -> Result<Prototype> {
    let estimate = spec.estimated_taps();
    let stop_weight = spec.passband_deviation() / spec.stopband_deviation();
    let out = match remez::remez_lowpass(num_taps, spec.passband_edge(), spec.stopband_edge(), stop_weight, warm) {
        Ok(out) => out,
        Err(Error::InvalidSpec(_)) => return Err(Error::Infeasible { estimated_taps: estimate }),
        Err(e) => return Err(e),
    };
    let mut h = out.coefficients;
    normalise_dc(&mut h);
    let (ripple, atten) = measure(&h, spec);
    if !(atten > 0.0) {
        return Err(Error::Infeasible { estimated_taps: estimate });
    }
    let record = DesignRecord {
        spec: spec.with_taps(TapCount::Fixed(num_taps))?,
        iterations: out.iterations,
        deviation: out.delta,
        extremal_frequencies: out.extremals,
        alternations: out.alternations,
        passband_ripple_db: ripple,
        stopband_atten_db: atten,
        edge_adjustment: None,
    };
    Ok(Prototype { group_delay: (h.len() as f64 - 1.0) / 2.0, coefficients: h, record: Some(record) })
}

/// Parks-McClellan lowpass meeting `spec`, normalised to unit DC gain.
///
/// With [`TapCount::Auto`] the Herrmann estimate is rounded up to the next
/// odd length, which gives an integer group delay.
pub fn design_prototype(spec: &FilterSpec) -> Result<Prototype> {
    let n = match spec.num_taps() {
        TapCount::Fixed(n) => n,
        TapCount::Auto => {
            let est = spec.estimated_taps();
            if est > MAX_TAPS {
                return Err(Error::Infeasible { estimated_taps: est });
            }
            round_up_odd(est)
        }
    };
    design_with(spec, n, None)
}

/// Shifts both edges of `spec` (width fixed) until the designed prototype
/// crosses the 3-dB point at pi/M, i.e. |H(e^{j pi/M})|^2 = 1/2.
///
/// With [`TapCount::Auto`] the length is rounded up so that N - 1 is a
/// multiple of 2M, which keeps every modulated filter in phase with the
/// prototype.
pub fn adjust_edges_3db(spec: &FilterSpec, m: usize) -> Result<Prototype> {
    if !m.is_multiple_of(2) {
        return Err(Error::InvalidChannelCount { m, reason: "M must be even" });
    }
    if m < 4 {
        return Err(Error::InvalidChannelCount { m, reason: "M must be at least 4" });
    }
    let crossover = PI / m as f64;
    let width = spec.transition_width();
    if width >= crossover {
        return Err(Error::InvalidSpec(format!("transition width {width} must be narrower than pi/M = {crossover}")));
    }
    let n = match spec.num_taps() {
        TapCount::Fixed(n) => n,
        TapCount::Auto => {
            let est = spec.estimated_taps();
            if est > MAX_TAPS {
                return Err(Error::Infeasible { estimated_taps: est });
            }
            round_up_aligned(est, m)
        }
    };

    let gain_at = |p: &Prototype| p.power(crossover);
    // At the low end the whole transition sits below pi/M (gain ~ 0); at the
    // high end the passband reaches it (gain ~ 1).
    let mut lo = crossover - width;
    let mut hi = crossover;
    let mut warm: Option<remez::WarmStart> = None;
    let mut best: Option<(f64, Prototype)> = None;
    let mut iterations = 0;
    while iterations < MAX_EDGE_ITERATIONS {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let shifted = spec.shifted_to(mid)?;
        let p = design_with(&shifted, n, warm.as_ref())?;
        let g = gain_at(&p);
        warm = p.record.as_ref().map(|r| remez::WarmStart {
            extremals: r.extremal_frequencies.clone(),
            passband_edge: shifted.passband_edge(),
            stopband_edge: shifted.stopband_edge(),
        });
        if best.as_ref().is_none_or(|(bg, _)| (g - 0.5).abs() < (bg - 0.5).abs()) {
            best = Some((g, p));
        }
        if (g - 0.5).abs() <= CROSSOVER_TARGET {
            break;
        }
        if g < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (g, mut p) = best.expect("at least one bisection step");
    if (g - 0.5).abs() > CROSSOVER_TOLERANCE {
        return Err(Error::EdgeAdjustment { final_gain: g });
    }
    if let Some(r) = p.record.as_mut() {
        r.edge_adjustment = Some(EdgeAdjustment { channels: m, iterations, crossover_power: g });
    }
    Ok(p)
}
