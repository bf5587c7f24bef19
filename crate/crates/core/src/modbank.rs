//! Uniform M-channel bank by complex modulation of the prototype.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::firdesign::Prototype;

/// Analysis filters h_k(n) = h(n) W_M^{-kn}, synthesis filters f_k = M h_k,
/// with W_M = exp(-j 2 pi / M).
#[derive(Debug, Clone, PartialEq)]
pub struct UniformBank {
    m: usize,
    analysis: Vec<Vec<Complex64>>,
    synthesis: Vec<Vec<Complex64>>,
    prototype: Prototype,
}

/// W_M^{-i} = exp(j 2 pi i / M), exact at multiples of a quarter turn.
pub(crate) fn unit_root(i: usize, m: usize) -> Complex64 {
    let i = i % m;
    if (4 * i).is_multiple_of(m) {
        return match 4 * i / m {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let (s, c) = (2.0 * PI * i as f64 / m as f64).sin_cos();
    Complex64::new(c, s)
}

pub(crate) fn check_channel_count(m: usize) -> Result<()> {
    if !m.is_multiple_of(2) {
        return Err(Error::InvalidChannelCount { m, reason: "M must be even for M/2 decimation" });
    }
    if m < 4 {
        return Err(Error::InvalidChannelCount { m, reason: "M must be at least 4" });
    }
    Ok(())
}

pub fn modulate(prototype: &Prototype, m: usize) -> Result<UniformBank> {
    check_channel_count(m)?;
    let h = prototype.coefficients();
    let roots: Vec<Complex64> = (0..m).map(|i| unit_root(i, m)).collect();
    let scale = m as f64;
    let mut analysis = Vec::with_capacity(m);
    let mut synthesis = Vec::with_capacity(m);
    for k in 0..m {
        let hk: Vec<Complex64> = h.iter().enumerate().map(|(n, &v)| v * roots[(k * n) % m]).collect();
        let fk = hk.iter().map(|&v| v * scale).collect();
        analysis.push(hk);
        synthesis.push(fk);
    }
    Ok(UniformBank { m, analysis, synthesis, prototype: prototype.clone() })
}

impl UniformBank {
    pub fn channels(&self) -> usize {
        self.m
    }

    pub fn taps(&self) -> usize {
        self.prototype.len()
    }

    pub fn prototype(&self) -> &Prototype {
        &self.prototype
    }

    pub fn analysis(&self, k: usize) -> &[Complex64] {
        &self.analysis[k]
    }

    pub fn synthesis(&self, k: usize) -> &[Complex64] {
        &self.synthesis[k]
    }

    pub fn analysis_filters(&self) -> &[Vec<Complex64>] {
        &self.analysis
    }

    pub fn synthesis_filters(&self) -> &[Vec<Complex64>] {
        &self.synthesis
    }

    /// Delay of the complete MDFT analysis/synthesis path: (N - 1) + M/2.
    pub fn system_delay(&self) -> usize {
        self.taps() - 1 + self.m / 2
    }
}

/// Wraps an angle to [-pi, pi).
pub fn wrap_angle(w: f64) -> f64 {
    let t = (w + PI).rem_euclid(2.0 * PI) - PI;
    if t >= PI {
        t - 2.0 * PI
    } else {
        t
    }
}

/// Nominal passband (2 pi k/M - pi/M, 2 pi k/M + pi/M), each end wrapped to
/// [-pi, pi). A band crossing pi comes back with `low > high`.
pub fn channel_band(m: usize, k: usize) -> Result<(f64, f64)> {
    if k >= m {
        return Err(Error::IndexOutOfRange { index: k, len: m });
    }
    if m == 0 {
        return Err(Error::InvalidChannelCount { m, reason: "M must be positive" });
    }
    let centre = 2.0 * PI * k as f64 / m as f64;
    let half = PI / m as f64;
    Ok((wrap_angle(centre - half), wrap_angle(centre + half)))
}

/// True when `w` (any angle) lies inside a band returned by [`channel_band`].
pub fn band_contains(band: (f64, f64), w: f64) -> bool {
    let w = wrap_angle(w);
    let (lo, hi) = band;
    if lo <= hi {
        lo <= w && w <= hi
    } else {
        w >= lo || w <= hi
    }
}
