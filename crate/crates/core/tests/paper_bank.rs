//! Checks on the full 8-channel bank (edges 0.0618 pi / 0.0634 pi, 60 dB).
//! Building it takes tens of seconds, so it is shared across tests.

use std::f64::consts::PI;
use std::sync::OnceLock;

use mdft_core::firdesign::{freq_response, uniform_grid};
use mdft_core::metrics::{
    alias_probe, distortion_nonuniform, distortion_uniform, flatness_deviation, flatness_grid, phase_linearity,
    reconstruction_snr, SpectrumValues,
};
use mdft_core::{
    adjust_edges_3db, dft_analyze, mdft_analyze, merge_bank, modulate, DftBank, FilterSpec, MergePlan, SignalBuffer,
    TapCount, UniformBank,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn paper_spec() -> FilterSpec {
    FilterSpec::new(0.0618 * PI, 0.0634 * PI, 0.004, 60.0, TapCount::Auto).unwrap()
}

fn bank() -> &'static UniformBank {
    static BANK: OnceLock<UniformBank> = OnceLock::new();
    BANK.get_or_init(|| modulate(&adjust_edges_3db(&paper_spec(), 8).unwrap(), 8).unwrap())
}

fn noise(len: usize, seed: u64) -> SignalBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SignalBuffer::from_real(&x, 0).unwrap()
}

fn naive_mag(h: &[f64], w: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (n, c) in h.iter().enumerate() {
        re += c * (w * n as f64).cos();
        im -= c * (w * n as f64).sin();
    }
    re.hypot(im)
}

#[test]
fn adjusted_prototype_meets_its_spec() {
    let p = bank().prototype();
    let rec = p.record().unwrap();
    let (wp, ws) = (rec.spec.passband_edge(), rec.spec.stopband_edge());
    assert!((ws - wp - 0.0016 * PI).abs() < 1e-12, "transition width moved");
    let h = p.coefficients();
    let (mut pmax, mut pmin, mut smax) = (0.0f64, f64::INFINITY, 0.0f64);
    for w in uniform_grid(0.0, PI, 8192) {
        if w <= wp {
            let m = naive_mag(h, w);
            pmax = pmax.max(m);
            pmin = pmin.min(m);
        } else if w >= ws {
            smax = smax.max(naive_mag(h, w));
        }
    }
    assert!(-20.0 * smax.log10() >= 58.0);
    assert!(10.0 * (pmax / pmin).log10() <= 0.006);
    let cross = naive_mag(h, PI / 8.0).powi(2);
    assert!((cross - 0.5).abs() <= 1e-3, "crossover power {cross}");
}

#[test]
fn modulated_filters_are_shifted_prototypes() {
    let b = bank();
    let grid = uniform_grid(-PI, PI, 1024);
    let shifted: Vec<f64> = grid.iter().map(|w| w - 3.0 * 2.0 * PI / 8.0).collect();
    let h3 = freq_response(b.analysis(3), &grid).unwrap();
    let h0 = freq_response(b.prototype().coefficients(), &shifted).unwrap();
    for (a, c) in h3.iter().zip(&h0) {
        assert!((a.norm() - c.norm()).abs() < 1e-10);
    }
}

#[test]
fn dft_bank_routes_a_complex_exponential_to_its_channel() {
    let b = bank();
    let w = 2.0 * PI * 3.0 / 8.0;
    let len = 16384;
    let x: Vec<Complex64> = (0..len).map(|n| Complex64::from_polar(1.0, w * n as f64)).collect();
    let s = dft_analyze(b, &SignalBuffer::new(x, 0).unwrap()).unwrap();
    // Only samples whose filter window lies inside the signal; the on/off
    // transients are broadband.
    let steady = (b.taps() - 1).div_ceil(8)..(len - 1) / 8 + 1;
    let energy: Vec<f64> = s.channels.iter().map(|c| c[steady.clone()].iter().map(|v| v.norm_sqr()).sum()).collect();
    let total: f64 = energy.iter().sum();
    for (k, e) in energy.iter().enumerate() {
        if k != 3 {
            assert!(10.0 * (e / total).log10() < -58.0, "channel {k} leaks");
        }
    }
}

#[test]
fn mdft_places_a_sinusoid_in_its_channel() {
    let b = bank();
    let w = 2.0 * PI * 4.0 / 8.0 + 0.01;
    let x: Vec<Complex64> = (0..8192).map(|n| Complex64::from_polar(1.0, w * n as f64)).collect();
    let s = mdft_analyze(b, &SignalBuffer::new(x, 0).unwrap()).unwrap();
    let energy: Vec<f64> =
        s.channels.iter().map(|c| c.real_part.iter().chain(&c.imag_part).map(|v| v * v).sum()).collect();
    let best = (0..8).max_by(|&a, &c| energy[a].total_cmp(&energy[c])).unwrap();
    assert_eq!(best, 4);
    // Two real streams at rate 2/M carry one complex stream at rate 1/M.
    let full = 8192 + b.taps() - 1;
    assert_eq!(s.channels[4].sample_count(), full.div_ceil(4));
}

#[test]
fn reconstruction_is_near_perfect_and_beats_the_dft_bank() {
    let b = bank();
    let x = noise(16384, 1);
    let mdft = reconstruction_snr(b, &x).unwrap();
    let dft = reconstruction_snr(&DftBank(b), &x).unwrap();
    assert!(mdft >= 50.0, "MDFT SNR {mdft} dB");
    assert!(mdft - dft >= 20.0, "MDFT {mdft} dB vs DFT {dft} dB");
}

#[test]
fn uniform_bank_does_not_alias_a_mid_band_tone() {
    let r = alias_probe(bank(), &[0.3 * PI]).unwrap();
    assert!(r.worst_db <= -50.0, "{} dB", r.worst_db);
}

#[test]
fn adjusted_prototype_is_power_complementary() {
    let grid = flatness_grid(8, 4001);
    let after = flatness_deviation(bank().prototype(), 8, &grid).unwrap();
    assert!(after <= 0.01, "deviation {after}");
    let raw = mdft_core::design_prototype(&paper_spec()).unwrap();
    assert!(flatness_deviation(&raw, 8, &grid).unwrap() > after);
}

#[test]
fn all_filters_have_linear_phase() {
    let b = bank();
    let nu = merge_bank(b, &MergePlan::parse("M=8; factors=4,8,4,4,8").unwrap(), false).unwrap();
    for k in 0..8 {
        assert!(phase_linearity(b.analysis(k)).unwrap() <= 1e-6);
        assert!(phase_linearity(b.synthesis(k)).unwrap() <= 1e-6);
    }
    for i in 0..nu.channels() {
        assert!(phase_linearity(nu.analysis(i)).unwrap() <= 1e-6);
        assert!(phase_linearity(nu.synthesis(i)).unwrap() <= 1e-6);
    }
}

#[test]
fn perturbed_tap_breaks_linear_phase() {
    let mut h: Vec<Complex64> = bank().analysis(0).to_vec();
    let n = h.len();
    h[n / 2 - 40] += 0.05;
    assert!(phase_linearity(&h).unwrap() > 0.01);
}

#[test]
fn figure_plans_share_the_uniform_distortion() {
    let b = bank();
    let grid = uniform_grid(-PI, PI, 512);
    let u = distortion_uniform(b, &grid).unwrap();
    let SpectrumValues::Complex(uv) = u.values() else { panic!() };
    for text in ["M=8; factors=4,8,8,2", "M=8; factors=4,8,4,4,8"] {
        let nu = merge_bank(b, &MergePlan::parse(text).unwrap(), false).unwrap();
        let d = distortion_nonuniform(&nu, &grid).unwrap();
        let SpectrumValues::Complex(dv) = d.diagonal.values() else { panic!() };
        for (x, y) in uv.iter().zip(dv) {
            assert!((x - y).norm() <= 1e-10);
        }
    }
}

#[test]
fn edge_adjustment_does_not_increase_distortion() {
    let grid = uniform_grid(0.05 * PI, 0.95 * PI, 1024);
    let raw = modulate(&mdft_core::design_prototype(&paper_spec()).unwrap(), 8).unwrap();
    let before = distortion_uniform(&raw, &grid).unwrap().peak_to_peak_db(0.0, PI).unwrap();
    let after = distortion_uniform(bank(), &grid).unwrap().peak_to_peak_db(0.0, PI).unwrap();
    assert!(after <= before, "adjusted {after} dB, raw {before} dB");
}
