//! Parks-McClellan exchange for symmetric (type I / type II) lowpass filters.
//!
//! The approximation runs in x = cos(w) with barycentric Lagrange
//! interpolation. Weights are formed in log space because the node products
//! overflow for lengths in the thousands, and differences of cosines are
//! taken through half angles to avoid cancellation near DC and pi.
//!
//! Convergence: the weighted error spread (max|E| - |delta|) / max|E| falls
//! below 1e-6, or |delta| changes by less than 1e-6 relative while the
//! spread is already under 1e-3.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub(crate) const GRID_DENSITY: usize = 16;
pub(crate) const MAX_ITERATIONS: usize = 100;
pub(crate) const CONVERGENCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub(crate) struct RemezOutput {
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    /// Weighted equiripple deviation |delta| of the final iteration.
    pub delta: f64,
    /// Extremal frequencies (radians) of the final reference set.
    pub extremals: Vec<f64>,
    /// Points of the final reference on which the weighted error alternates.
    pub alternations: usize,
}

struct Grid {
    omega: Vec<f64>,
    x: Vec<f64>,
    half_sin: Vec<f64>,
    half_cos: Vec<f64>,
    desired: Vec<f64>,
    weight: Vec<f64>,
    /// First index of the stopband; extrema never span this boundary.
    band_split: usize,
}

fn linspace(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    let step = if count > 1 { (hi - lo) / (count - 1) as f64 } else { 0.0 };
    (0..count).map(move |i| if i + 1 == count { hi } else { lo + step * i as f64 })
}

fn build_grid(num_taps: usize, r: usize, wp: f64, ws: f64, stop_weight: f64) -> Grid {
    let even = num_taps.is_multiple_of(2);
    let delta = PI / (GRID_DENSITY * r) as f64;
    let pass_count = ((wp / delta).round() as usize + 1).max(2);
    // cos(w/2) vanishes at pi for even lengths, so the grid stops short of it.
    let top = if even { PI - delta } else { PI };
    let stop_count = (((top - ws) / delta).round() as usize + 1).max(2);

    let mut g = Grid {
        omega: Vec::with_capacity(pass_count + stop_count),
        x: Vec::with_capacity(pass_count + stop_count),
        half_sin: Vec::with_capacity(pass_count + stop_count),
        half_cos: Vec::with_capacity(pass_count + stop_count),
        desired: Vec::with_capacity(pass_count + stop_count),
        weight: Vec::with_capacity(pass_count + stop_count),
        band_split: pass_count,
    };
    let mut push = |w: f64, d: f64, wt: f64| {
        let (d, wt) = if even {
            let c = (w / 2.0).cos();
            (d / c, wt * c)
        } else {
            (d, wt)
        };
        g.omega.push(w);
        g.x.push(w.cos());
        g.half_sin.push((w / 2.0).sin());
        g.half_cos.push((w / 2.0).cos());
        g.desired.push(d);
        g.weight.push(wt);
    };
    for w in linspace(0.0, wp, pass_count) {
        push(w, 1.0, 1.0);
    }
    for w in linspace(ws, top, stop_count) {
        push(w, 0.0, stop_weight);
    }
    g
}

/// A frequency with the half-angle values used for accurate differences.
#[derive(Debug, Clone, Copy)]
struct Node {
    w: f64,
    s: f64,
    c: f64,
}

impl Node {
    fn new(w: f64) -> Self {
        let (s, c) = (w / 2.0).sin_cos();
        Node { w, s, c }
    }
}

/// cos(a) - cos(b) without the cancellation of subtracting two cosines.
/// Uses cos w = 1 - 2 sin^2(w/2) near DC and 2 cos^2(w/2) - 1 near pi.
#[inline]
fn cos_diff(a: Node, b: Node) -> f64 {
    if a.w + b.w < PI {
        2.0 * (b.s - a.s) * (b.s + a.s)
    } else {
        2.0 * (a.c - b.c) * (a.c + b.c)
    }
}

/// Log-magnitude and sign of the scaled barycentric weights
/// 1 / prod_{j != i} 2(x_i - x_j). The factor 2 keeps node polynomials on
/// [-1, 1] close to unit size.
fn log_weights(nodes: &[Node]) -> (Vec<f64>, Vec<f64>) {
    let n = nodes.len();
    let mut log_mag = vec![0.0; n];
    let mut sign = vec![1.0; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = cos_diff(nodes[i], nodes[j]);
            let l = (2.0 * d.abs()).ln();
            log_mag[i] -= l;
            log_mag[j] -= l;
            if d < 0.0 {
                sign[i] = -sign[i];
            } else {
                sign[j] = -sign[j];
            }
        }
    }
    (log_mag, sign)
}

/// Weights divided by their largest magnitude, with the log of that scale.
fn scaled(log_mag: &[f64], sign: &[f64]) -> (Vec<f64>, f64) {
    let top = log_mag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (log_mag.iter().zip(sign).map(|(l, s)| s * (l - top).exp()).collect(), top)
}

/// Polynomial through `c` at `nodes`, evaluated with the first
/// (modified Lagrange) barycentric form. Unlike the second form this stays
/// accurate when the reference set is badly distributed, which happens in
/// early exchanges of long designs.
struct Interpolant {
    nodes: Vec<Node>,
    beta: Vec<f64>,
    log_scale: f64,
    c: Vec<f64>,
}

const RESCALE_HI: f64 = 1e150;
const RESCALE_LO: f64 = 1e-150;

impl Interpolant {
    fn eval(&self, at: Node) -> f64 {
        let mut sum = 0.0;
        let mut mant = 1.0f64;
        let mut log_extra = 0.0f64;
        for (k, ((&node, &b), &c)) in self.nodes.iter().zip(&self.beta).zip(&self.c).enumerate() {
            let d = 2.0 * cos_diff(at, node);
            if d == 0.0 {
                return c;
            }
            sum += b * c / d;
            mant *= d;
            if k % 16 == 15 {
                let a = mant.abs();
                if !(RESCALE_LO..=RESCALE_HI).contains(&a) {
                    log_extra += a.ln();
                    mant = mant.signum();
                }
            }
        }
        let mag = (mant.abs().ln() + log_extra + self.log_scale).exp();
        mant.signum() * mag * sum
    }
}

impl Grid {
    fn node(&self, j: usize) -> Node {
        Node { w: self.omega[j], s: self.half_sin[j], c: self.half_cos[j] }
    }
}

/// One exchange step: solve for delta on the reference set and build the
/// interpolant through the first r reference points.
fn solve_reference(grid: &Grid, ext: &[usize]) -> (f64, Interpolant) {
    let nodes: Vec<Node> = ext.iter().map(|&i| grid.node(i)).collect();
    let (log_mag, sign) = log_weights(&nodes);
    let (b, _) = scaled(&log_mag, &sign);

    let mut num = 0.0;
    let mut den = 0.0;
    let mut s = 1.0;
    for (k, &i) in ext.iter().enumerate() {
        num += b[k] * grid.desired[i];
        den += s * b[k] / grid.weight[i];
        s = -s;
    }
    let delta = num / den;

    let r = ext.len() - 1;
    let last = nodes[r];
    let mut lm = Vec::with_capacity(r);
    let mut sg = Vec::with_capacity(r);
    for k in 0..r {
        let d = cos_diff(nodes[k], last);
        lm.push(log_mag[k] + (2.0 * d.abs()).ln());
        sg.push(if d < 0.0 { -sign[k] } else { sign[k] });
    }
    let (beta, log_scale) = scaled(&lm, &sg);
    let mut s = 1.0;
    let mut c = Vec::with_capacity(r);
    for &i in &ext[..r] {
        c.push(grid.desired[i] - s * delta / grid.weight[i]);
        s = -s;
    }
    (delta, Interpolant { nodes: nodes[..r].to_vec(), beta, log_scale, c })
}

/// Local extrema of the error with |E| >= |delta|, reduced to an alternating
/// set of exactly `want` points.
///
/// The previous reference points are always candidates: by construction the
/// error alternates on them, so rounding noise in the grid evaluation can
/// never drop the count below `want`.
fn select_extremals(grid: &Grid, err: &[f64], delta: f64, want: usize, previous: &[usize]) -> Option<Vec<usize>> {
    let floor = delta.abs() * (1.0 - 1e-12);
    let n = err.len();
    let mut cand: Vec<usize> = Vec::new();
    let mut prev = previous.iter().peekable();
    for j in 0..n {
        let e = err[j];
        let was_ref = prev.next_if(|&&p| p == j).is_some();
        if was_ref && e != 0.0 {
            cand.push(j);
            continue;
        }
        if e.abs() < floor {
            continue;
        }
        let left = if j == 0 || j == grid.band_split { None } else { Some(err[j - 1]) };
        let right = if j + 1 == n || j + 1 == grid.band_split { None } else { Some(err[j + 1]) };
        let is_ext = if e > 0.0 {
            left.is_none_or(|l| e >= l) && right.is_none_or(|r| e > r)
        } else {
            left.is_none_or(|l| e <= l) && right.is_none_or(|r| e < r)
        };
        if is_ext {
            cand.push(j);
        }
    }

    // Collapse same-sign runs to their largest member.
    let mut alt: Vec<usize> = Vec::with_capacity(cand.len());
    for j in cand {
        match alt.last() {
            Some(&p) if err[p].signum() == err[j].signum() => {
                if err[j].abs() > err[p].abs() {
                    *alt.last_mut().unwrap() = j;
                }
            }
            _ => alt.push(j),
        }
    }

    while alt.len() > want {
        if alt.len() == want + 1 {
            if err[alt[0]].abs() < err[alt[alt.len() - 1]].abs() {
                alt.remove(0);
            } else {
                alt.pop();
            }
            continue;
        }
        let (k, _) = alt.iter().enumerate().min_by(|a, b| err[*a.1].abs().total_cmp(&err[*b.1].abs())).unwrap();
        if k == 0 || k == alt.len() - 1 {
            alt.remove(k);
        } else {
            // Neighbours now share a sign; keep the larger.
            let keep = if err[alt[k - 1]].abs() >= err[alt[k + 1]].abs() { alt[k - 1] } else { alt[k + 1] };
            alt.splice(k - 1..=k + 1, [keep]);
        }
    }
    pad_reference(grid, alt, want)
}

/// Fills a short reference up to `want` points: missing band edges first,
/// then midpoints of the widest gaps. Any distinct set is a valid
/// reference; this only matters when rounding has hidden an alternation.
fn pad_reference(grid: &Grid, mut set: Vec<usize>, want: usize) -> Option<Vec<usize>> {
    let n = grid.omega.len();
    for edge in [0, grid.band_split - 1, grid.band_split, n - 1] {
        if set.len() >= want {
            break;
        }
        if let Err(pos) = set.binary_search(&edge) {
            set.insert(pos, edge);
        }
    }
    while set.len() < want {
        let (k, gap) = set.windows(2).enumerate().map(|(k, w)| (k, w[1] - w[0])).max_by_key(|&(_, g)| g)?;
        if gap < 2 {
            return None;
        }
        set.insert(k + 1, set[k] + gap / 2);
    }
    Some(set)
}

/// Previous solution used to seed a nearby design.
#[derive(Debug, Clone)]
pub(crate) struct WarmStart {
    pub extremals: Vec<f64>,
    pub passband_edge: f64,
    pub stopband_edge: f64,
}

fn initial_extremals(grid: &Grid, want: usize, warm: Option<&WarmStart>) -> Vec<usize> {
    let g = grid.omega.len();
    if let Some(prev) = warm.filter(|w| w.extremals.len() == want) {
        // Stretch each band of the old reference onto the new band.
        let wp = grid.omega[grid.band_split - 1];
        let ws = grid.omega[grid.band_split];
        let top = grid.omega[g - 1];
        let mut idx: Vec<usize> = prev
            .extremals
            .iter()
            .map(|&w| {
                let (lo, hi, mapped) = if w <= prev.passband_edge {
                    (0, grid.band_split, w * wp / prev.passband_edge)
                } else {
                    let t = (w - prev.stopband_edge) / (PI - prev.stopband_edge);
                    (grid.band_split, g, ws + t * (top - ws))
                };
                let band = &grid.omega[lo..hi];
                let p = band.partition_point(|&o| o < mapped);
                let k = if p == 0 {
                    0
                } else if p == band.len() || (mapped - band[p - 1]) <= (band[p] - mapped) {
                    p - 1
                } else {
                    p
                };
                lo + k
            })
            .collect();
        idx.dedup();
        if idx.len() == want {
            return idx;
        }
    }
    window_reference(grid, want)
        .unwrap_or_else(|| (0..want).map(|i| (i * (g - 1) + (want - 1) / 2) / (want - 1)).collect())
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..500 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Reference set taken from the error extrema of a Kaiser-windowed design
/// of the same length. Far closer to the optimum than a uniform spread,
/// which matters for lengths in the thousands.
fn window_reference(grid: &Grid, want: usize) -> Option<Vec<usize>> {
    let r = want - 1;
    let wp = grid.omega[grid.band_split - 1];
    let ws = grid.omega[grid.band_split];
    let wc = 0.5 * (wp + ws);
    // Cosine-series coefficients a_k of A(w) = sum a_k cos(k w), type I form.
    let beta = 5.0;
    let i0b = bessel_i0(beta);
    let a: Vec<f64> = (0..r)
        .map(|k| {
            let t = k as f64 / r as f64;
            let win = bessel_i0(beta * (1.0 - t * t).max(0.0).sqrt()) / i0b;
            let ideal = if k == 0 { wc / PI } else { (k as f64 * wc).sin() / (PI * k as f64) };
            if k == 0 {
                ideal * win
            } else {
                2.0 * ideal * win
            }
        })
        .collect();
    let err: Vec<f64> = grid
        .x
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            // Clenshaw recurrence for sum a_k T_k(x).
            let (mut b1, mut b2) = (0.0, 0.0);
            for &ak in a.iter().skip(1).rev() {
                let b0 = ak + 2.0 * x * b1 - b2;
                b2 = b1;
                b1 = b0;
            }
            let amp = a[0] + x * b1 - b2;
            grid.weight[j] * (grid.desired[j] - amp)
        })
        .collect();
    let n = grid.omega.len();
    let edges = [0, grid.band_split - 1, grid.band_split, n - 1];
    select_extremals(grid, &err, 0.0, want, &edges)
}

/// Equiripple lowpass with unit passband (weight 1) and zero stopband
/// (weight `stop_weight`). Edges are in radians.
pub(crate) fn remez_lowpass(
    num_taps: usize,
    wp: f64,
    ws: f64,
    stop_weight: f64,
    warm: Option<&WarmStart>,
) -> Result<RemezOutput> {
    let even = num_taps.is_multiple_of(2);
    let r = if even { num_taps / 2 } else { (num_taps - 1) / 2 + 1 };
    let want = r + 1;
    let grid = build_grid(num_taps, r, wp, ws, stop_weight);
    if grid.omega.len() < want {
        return Err(Error::InvalidSpec(format!("grid of {} points cannot hold {} extremals", grid.omega.len(), want)));
    }

    let mut ext = initial_extremals(&grid, want, warm);
    let mut err = vec![0.0; grid.omega.len()];
    let mut prev_delta = 0.0f64;
    let mut iterations = 0;
    let mut last_max = f64::NAN;
    let mut interp;
    loop {
        iterations += 1;
        let (delta, it) = solve_reference(&grid, &ext);
        interp = it;
        let mut max_err = 0.0f64;
        for j in 0..err.len() {
            let e = grid.weight[j] * (grid.desired[j] - interp.eval(grid.node(j)));
            err[j] = e;
            max_err = max_err.max(e.abs());
        }
        last_max = if max_err.is_finite() { max_err } else { last_max };
        let spread = (max_err - delta.abs()) / max_err;
        let change = ((delta.abs() - prev_delta.abs()) / delta.abs()).abs();
        prev_delta = delta;
        if spread < CONVERGENCE_TOL || (change < CONVERGENCE_TOL && spread < 1e-3) {
            break;
        }
        if iterations >= MAX_ITERATIONS {
            return Err(Error::NonConvergence { iterations, ripple: last_max });
        }
        match select_extremals(&grid, &err, delta, want, &ext) {
            Some(next) => ext = next,
            None => return Err(Error::NonConvergence { iterations, ripple: last_max }),
        }
    }

    let alternations = 1 + ext.windows(2).filter(|p| err[p[0]].signum() != err[p[1]].signum()).count();
    let coefficients = sample_and_invert(num_taps, &interp);
    Ok(RemezOutput {
        coefficients,
        iterations,
        delta: prev_delta.abs(),
        extremals: ext.iter().map(|&i| grid.omega[i]).collect(),
        alternations,
    })
}

/// Samples the amplitude response at 2*pi*j/N and inverts the real DFT of a
/// symmetric filter. Only half the taps are computed; the rest are mirrored.
fn sample_and_invert(num_taps: usize, interp: &Interpolant) -> Vec<f64> {
    let n = num_taps;
    let even = n.is_multiple_of(2);
    let half = (n - 1) / 2;
    let amp: Vec<f64> = (0..=half)
        .map(|j| {
            let w = 2.0 * PI * j as f64 / n as f64;
            let p = interp.eval(Node::new(w));
            if even {
                p * (w / 2.0).cos()
            } else {
                p
            }
        })
        .collect();
    let centre = (n as f64 - 1.0) / 2.0;
    let mut h = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let t = i as f64 - centre;
        let mut acc = amp[0];
        for (j, &a) in amp.iter().enumerate().skip(1) {
            let phase = 2.0 * PI * ((j as f64 * t) % n as f64) / n as f64;
            acc += 2.0 * a * phase.cos();
        }
        h[i] = acc / n as f64;
        h[n - 1 - i] = h[i];
    }
    h
}
