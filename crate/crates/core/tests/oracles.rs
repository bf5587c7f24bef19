//! Fast paths against naive reimplementations on randomized small cases.

use std::f64::consts::PI;

use mdft_core::firdesign::{freq_response, Prototype};
use mdft_core::mdft_runtime::{convolve, decimate, upsample};
use mdft_core::{dft_analyze, dft_synthesize, mdft_analyze, mdft_synthesize, modulate, SignalBuffer};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CASES: usize = 20;
const TOL: f64 = 1e-12;

fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn naive_dtft(c: &[Complex64], w: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (n, v) in c.iter().enumerate() {
        let (s, co) = (-w * n as f64).sin_cos();
        acc += v * Complex64::new(co, s);
    }
    acc
}

fn naive_convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn naive_decimate(x: &[Complex64], factor: usize, phase: usize) -> Vec<Complex64> {
    let mut out = Vec::new();
    let mut i = phase;
    while i < x.len() {
        out.push(x[i]);
        i += factor;
    }
    out
}

fn close(a: &[Complex64], b: &[Complex64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= TOL)
}

fn random_prototype(rng: &mut ChaCha8Rng, half: usize) -> Prototype {
    let mut h: Vec<f64> = (0..half).map(|_| rng.gen_range(0.1..1.0)).collect();
    let mid = rng.gen_range(0.5..2.0);
    let mut full = h.clone();
    full.push(mid);
    h.reverse();
    full.extend(h);
    Prototype::normalized(full).unwrap()
}

#[test]
fn freq_response_matches_naive_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..CASES {
        let n = rng.gen_range(1..80);
        let c = random_complex(&mut rng, n);
        let grid: Vec<f64> = (0..64).map(|_| rng.gen_range(-PI..PI)).collect();
        let fast = freq_response(&c, &grid).unwrap();
        let slow: Vec<Complex64> = grid.iter().map(|&w| naive_dtft(&c, w)).collect();
        assert!(close(&fast, &slow));
    }
}

#[test]
fn convolution_matches_naive() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..CASES {
        let a = {
            let n = rng.gen_range(1..60);
            random_complex(&mut rng, n)
        };
        let b = {
            let n = rng.gen_range(1..60);
            random_complex(&mut rng, n)
        };
        assert!(close(&convolve(&a, &b).unwrap(), &naive_convolve(&a, &b)));
    }
}

#[test]
fn decimation_and_upsampling_match_naive() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..CASES {
        let x = {
            let n = rng.gen_range(1..100);
            random_complex(&mut rng, n)
        };
        let f = rng.gen_range(1..9);
        let p = rng.gen_range(0..f);
        assert_eq!(decimate(&x, f, p).unwrap(), naive_decimate(&x, f, p));
        let up = upsample(&x, f).unwrap();
        assert_eq!(naive_decimate(&up, f, 0), x);
        assert!(up.iter().enumerate().all(|(i, v)| i % f == 0 || *v == Complex64::new(0.0, 0.0)));
    }
}

/// MDFT analysis as convolve, decimate by M/2, then Re / j Im by r + k parity.
fn naive_mdft_channel(x: &[Complex64], h: &[Complex64], m: usize, k: usize) -> (Vec<f64>, Vec<f64>) {
    let u = naive_decimate(&naive_convolve(x, h), m / 2, 0);
    let (mut re, mut im) = (Vec::new(), Vec::new());
    for (r, v) in u.iter().enumerate() {
        if (r + k).is_multiple_of(2) {
            re.push(v.re);
        } else {
            im.push(v.im);
        }
    }
    (re, im)
}

#[test]
fn mdft_engine_matches_naive_pipeline() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for case in 0..CASES {
        let m = [4, 6, 8][case % 3];
        let bank = modulate(
            &{
                let n = rng.gen_range(1..12);
                random_prototype(&mut rng, n)
            },
            m,
        )
        .unwrap();
        // Alternate real and complex inputs: the engine has a real fast path.
        let mut x = {
            let n = rng.gen_range(1..70);
            random_complex(&mut rng, n)
        };
        if case % 2 == 0 {
            x.iter_mut().for_each(|v| v.im = 0.0);
        }
        let buf = SignalBuffer::new(x.clone(), 0).unwrap();
        let sub = mdft_analyze(&bank, &buf).unwrap();
        for k in 0..m {
            let (re, im) = naive_mdft_channel(&x, bank.analysis(k), m, k);
            let ch = &sub.channels[k];
            assert_eq!(ch.real_part.len(), re.len());
            assert_eq!(ch.imag_part.len(), im.len());
            assert!(ch.real_part.iter().zip(&re).all(|(a, b)| (a - b).abs() <= TOL));
            assert!(ch.imag_part.iter().zip(&im).all(|(a, b)| (a - b).abs() <= TOL));
        }

        // Synthesis: upsample the selected stream by M/2, delay M/2, filter.
        let mut expect: Vec<Complex64> = Vec::new();
        for k in 0..m {
            let w = sub.channels[k].selected();
            let mut up = vec![Complex64::new(0.0, 0.0); m / 2];
            up.extend(upsample(&w, m / 2).unwrap());
            let y = naive_convolve(&up, bank.synthesis(k));
            if expect.len() < y.len() {
                expect.resize(y.len(), Complex64::new(0.0, 0.0));
            }
            for (e, v) in expect.iter_mut().zip(y) {
                *e += v;
            }
        }
        let got = mdft_synthesize(&bank, &sub).unwrap();
        let n = got.len().min(expect.len());
        assert!(close(&got.samples()[..n], &expect[..n]));
        assert!(got.samples()[n..].iter().chain(&expect[n..]).all(|v| v.norm() <= TOL));
    }
}

#[test]
fn dft_bank_matches_naive_pipeline() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for case in 0..CASES {
        let m = [4, 6, 8][case % 3];
        let bank = modulate(
            &{
                let n = rng.gen_range(1..10);
                random_prototype(&mut rng, n)
            },
            m,
        )
        .unwrap();
        let x = {
            let n = rng.gen_range(1..50);
            random_complex(&mut rng, n)
        };
        let sub = dft_analyze(&bank, &SignalBuffer::new(x.clone(), 0).unwrap()).unwrap();
        let mut expect = Vec::new();
        for k in 0..m {
            let d = naive_decimate(&naive_convolve(&x, bank.analysis(k)), m, 0);
            assert!(close(&sub.channels[k], &d));
            let y = naive_convolve(&upsample(&d, m).unwrap(), bank.synthesis(k));
            if expect.len() < y.len() {
                expect.resize(y.len(), Complex64::new(0.0, 0.0));
            }
            for (e, v) in expect.iter_mut().zip(y) {
                *e += v;
            }
        }
        let got = dft_synthesize(&bank, &sub).unwrap();
        let n = got.len().min(expect.len());
        assert!(close(&got.samples()[..n], &expect[..n]));
        assert!(got.samples()[n..].iter().chain(&expect[n..]).all(|v| v.norm() <= TOL));
    }
}
