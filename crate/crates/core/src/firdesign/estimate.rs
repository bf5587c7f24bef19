//! Herrmann / Kaiser style length estimate for equiripple lowpass filters.

/// Estimated tap count for passband deviation `dp`, stopband deviation `ds`
/// and transition width `df` in cycles per sample. The larger deviation is
/// treated as the passband one, as in the usual formulation.
pub fn herrmann_length(dp: f64, ds: f64, df: f64) -> f64 {
    let (dp, ds) = if dp < ds { (ds, dp) } else { (dp, ds) };
    let l = dp.log10();
    let dinf = (5.309e-3 * l * l + 7.114e-2 * l - 4.761e-1) * ds.log10() + (-2.66e-3 * l * l - 5.941e-1 * l - 4.278e-1);
    let f = 11.01217 + 0.51244 * (dp.log10() - ds.log10());
    dinf / df - f * df + 1.0
}

/// Smallest odd length not below `n`.
pub fn round_up_odd(n: usize) -> usize {
    if n.is_multiple_of(2) {
        n + 1
    } else {
        n
    }
}

/// Smallest length not below `n` with `len - 1` a multiple of `2 * m`.
pub fn round_up_aligned(n: usize, m: usize) -> usize {
    let period = 2 * m;
    let k = n.saturating_sub(1).div_ceil(period);
    k * period + 1
}
