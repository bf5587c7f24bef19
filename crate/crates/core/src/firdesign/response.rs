use num_complex::Complex64;

use crate::error::{Error, Result};

/// Taps between exact phasor re-evaluations in [`freq_response`]. The
/// recurrence drifts by about one ulp per step, so short blocks keep the
/// result within a few dozen ulps of the naive sum.
const RESYNC: usize = 32;

/// Direct DTFT: `sum_n c(n) e^{-j w n}` at every grid point.
///
/// Grid values are expected in [-pi, pi] but any finite frequency is
/// accepted; the transform is 2*pi periodic.
pub fn freq_response<T>(coefficients: &[T], grid: &[f64]) -> Result<Vec<Complex64>>
where
    T: Copy + Into<Complex64>,
{
    if coefficients.is_empty() {
        return Err(Error::EmptyInput("coefficient vector"));
    }
    let c: Vec<Complex64> = coefficients.iter().map(|&v| v.into()).collect();
    Ok(grid.iter().map(|&w| dtft_at(&c, w)).collect())
}

pub(crate) fn dtft_at(c: &[Complex64], w: f64) -> Complex64 {
    let (s, co) = (-w).sin_cos();
    let step = Complex64::new(co, s);
    let mut acc = Complex64::new(0.0, 0.0);
    for (b, block) in c.chunks(RESYNC).enumerate() {
        let (s, co) = (-w * (b * RESYNC) as f64).sin_cos();
        let mut p = Complex64::new(co, s);
        for &v in block {
            acc += v * p;
            p *= step;
        }
    }
    acc
}

/// Real-coefficient specialisation returning |H(e^{jw})|^2.
pub(crate) fn power_at(h: &[f64], w: f64) -> f64 {
    let (s, co) = (-w).sin_cos();
    let (mut re, mut im) = (0.0, 0.0);
    for (b, block) in h.chunks(RESYNC).enumerate() {
        let (ps, pc) = (-w * (b * RESYNC) as f64).sin_cos();
        let (mut pr, mut pi) = (pc, ps);
        for &v in block {
            re += v * pr;
            im += v * pi;
            let t = pr * co - pi * s;
            pi = pr * s + pi * co;
            pr = t;
        }
    }
    re * re + im * im
}

/// `count` points uniformly covering [lo, hi] inclusive.
pub fn uniform_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (count - 1) as f64;
            (0..count).map(|i| if i + 1 == count { hi } else { lo + step * i as f64 }).collect()
        }
    }
}

/// `count` points covering [-pi, pi) with spacing 2*pi/count.
pub fn centered_grid(count: usize) -> Vec<f64> {
    use std::f64::consts::PI;
    (0..count).map(|i| -PI + 2.0 * PI * i as f64 / count as f64).collect()
}
