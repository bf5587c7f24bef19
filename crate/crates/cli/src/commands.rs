use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mdft_core::firdesign::{centered_grid, freq_response, uniform_grid};
use mdft_core::metrics::{
    alias_probe, distortion_nonuniform, distortion_uniform, flatness_deviation, flatness_grid, merged_flatness,
    pair_alias_sweep, phase_linearity, reconstruction_snr, sweep_spec, windowed_spectrum, BankReport, PROBE_SEGMENT,
};
use mdft_core::{
    adjust_edges_3db, design_prototype, enumerate_valid_plans, merge_bank, modulate, predict_alias_channel,
    validate_plan, Error, MergePlan, NonUniformBank, Prototype, RoundTrip, SignalBuffer, UniformBank,
};
use num_complex::Complex64;

use crate::config::{DesignConfig, Probe};
use crate::error::{CliError, CliResult};
use crate::wav;

pub const PROTOTYPE_FILE: &str = "prototype.txt";
/// Longest stretch of a WAV file used for the spectrum CSVs.
const WAV_SPECTRUM_MAX: usize = 1 << 16;

pub struct Context {
    pub config: DesignConfig,
    pub out: PathBuf,
    pub grid: usize,
    pub allow_alias: bool,
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

fn db(v: f64) -> f64 {
    20.0 * v.log10()
}

/// CSV with an omega column followed by one dB column per response.
fn response_table(grid: &[f64], names: &[String], columns: &[Vec<Complex64>]) -> String {
    let mut s = format!("omega,{}\n", names.join(","));
    for (i, w) in grid.iter().enumerate() {
        let _ = write!(s, "{w:.11e}");
        for c in columns {
            let _ = write!(s, ",{:.11e}", db(c[i].norm()));
        }
        s.push('\n');
    }
    s
}

pub fn design(ctx: &Context) -> CliResult<()> {
    let cfg = &ctx.config;
    let proto =
        if cfg.adjust_edges { adjust_edges_3db(&cfg.spec, cfg.channels)? } else { design_prototype(&cfg.spec)? };
    let bank = modulate(&proto, cfg.channels)?;
    ensure_dir(&ctx.out)?;

    let mut coeffs = String::new();
    for c in proto.coefficients() {
        // Shortest round-trip form, so reloading gives identical taps.
        let _ = writeln!(coeffs, "{c:e}");
    }
    write_file(&ctx.out.join(PROTOTYPE_FILE), &coeffs)?;

    let grid = uniform_grid(0.0, PI, ctx.grid);
    let h = freq_response(proto.coefficients(), &grid)?;
    let mut s = String::from("omega,magnitude_db,phase_rad\n");
    for (w, v) in grid.iter().zip(&h) {
        let _ = writeln!(s, "{w:.11e},{:.11e},{:.11e}", db(v.norm()), v.arg());
    }
    write_file(&ctx.out.join("response.csv"), &s)?;

    let grid = centered_grid(ctx.grid);
    let columns: Vec<Vec<Complex64>> =
        (0..bank.channels()).map(|k| freq_response(bank.analysis(k), &grid)).collect::<Result<_, _>>()?;
    let names: Vec<String> = (0..bank.channels()).map(|k| format!("h{k}_db")).collect();
    write_file(&ctx.out.join("bank_response.csv"), &response_table(&grid, &names, &columns))?;

    let rec = proto.record().expect("designed prototypes carry a record");
    let flat = flatness_deviation(&proto, cfg.channels, &flatness_grid(cfg.channels, ctx.grid))?;
    let mut r = String::from("key,value\n");
    let _ = writeln!(r, "taps,{}", proto.len());
    let _ = writeln!(r, "passband_edge,{:.11e}", rec.spec.passband_edge());
    let _ = writeln!(r, "stopband_edge,{:.11e}", rec.spec.stopband_edge());
    let _ = writeln!(r, "passband_ripple_db,{:.11e}", rec.passband_ripple_db);
    let _ = writeln!(r, "stopband_atten_db,{:.11e}", rec.stopband_atten_db);
    let _ = writeln!(r, "crossover_power,{:.11e}", proto.power(PI / cfg.channels as f64));
    let _ = writeln!(r, "flatness_deviation,{flat:.11e}");
    let _ = writeln!(r, "system_delay,{}", bank.system_delay());
    write_file(&ctx.out.join("design_report.csv"), &r)?;
    println!(
        "designed N={} taps: stopband {:.2} dB, ripple {:.4} dB, flatness deviation {:.4}",
        proto.len(),
        rec.stopband_atten_db,
        rec.passband_ripple_db,
        flat
    );
    Ok(())
}

fn load_bank(ctx: &Context) -> CliResult<UniformBank> {
    let path = ctx.out.join(PROTOTYPE_FILE);
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Io(format!("missing bank {} ({e}); run `mdft design` first", path.display())))?;
    let taps = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok(modulate(&Prototype::new(taps)?, ctx.config.channels)?)
}

/// Validates and builds the configured plan, reporting on stderr.
fn build_merged(ctx: &Context, bank: &UniformBank, plan: &MergePlan) -> CliResult<NonUniformBank> {
    let report = validate_plan(plan);
    if !report.is_partition() {
        eprintln!("{report}");
        return Err(CliError::Validation(format!("invalid merge plan {}", plan.to_text())));
    }
    match merge_bank(bank, plan, ctx.allow_alias) {
        Ok(nu) => {
            if !report.alias_hazards.is_empty() {
                eprintln!(
                    "warning: plan merges aliasing channel a_{} = {}; built anyway because of --allow-alias",
                    plan.channels(),
                    report.alias_channel.unwrap_or(0)
                );
            }
            Ok(nu)
        }
        Err(Error::AliasHazard { channel }) => {
            eprintln!("{report}");
            Err(CliError::Validation(format!(
                "refusing plan {}: it merges aliasing channel a_{} = {channel}; pass --allow-alias to build it anyway",
                plan.to_text(),
                plan.channels()
            )))
        }
        Err(e) => {
            eprintln!("{report}");
            Err(e.into())
        }
    }
}

fn required_plan(ctx: &Context) -> CliResult<&MergePlan> {
    ctx.config.plan.as_ref().ok_or_else(|| CliError::Validation("config has no plan".into()))
}

pub fn merge(ctx: &Context) -> CliResult<()> {
    let plan = required_plan(ctx)?;
    let bank = load_bank(ctx)?;
    let nu = build_merged(ctx, &bank, plan)?;
    let report = validate_plan(plan);

    write_file(&ctx.out.join("plan.txt"), &format!("{}\n", plan.to_text()))?;
    write_file(&ctx.out.join("validation.txt"), &format!("{report}\n"))?;

    let mut s = String::from("channel,tap,analysis_re,analysis_im,synthesis_re,synthesis_im\n");
    for i in 0..nu.channels() {
        for (n, (h, f)) in nu.analysis(i).iter().zip(nu.synthesis(i)).enumerate() {
            let _ = writeln!(s, "{i},{n},{:.11e},{:.11e},{:.11e},{:.11e}", h.re, h.im, f.re, f.im);
        }
    }
    write_file(&ctx.out.join("merged_filters.csv"), &s)?;

    let grid = centered_grid(ctx.grid);
    let columns: Vec<Vec<Complex64>> =
        (0..nu.channels()).map(|i| freq_response(nu.analysis(i), &grid)).collect::<Result<_, _>>()?;
    let names: Vec<String> = (0..nu.channels()).map(|i| format!("g{i}_db")).collect();
    write_file(&ctx.out.join("merged_response.csv"), &response_table(&grid, &names, &columns))?;

    let u = distortion_uniform(&bank, &grid)?;
    let d = distortion_nonuniform(&nu, &grid)?;
    let (ud, dd, fd) = (u.magnitude_db(), d.diagonal.magnitude_db(), d.full.magnitude_db());
    let mut s = String::from("omega,uniform_db,diagonal_db,full_db\n");
    for (i, w) in grid.iter().enumerate() {
        let _ = writeln!(s, "{w:.11e},{:.11e},{:.11e},{:.11e}", ud[i], dd[i], fd[i]);
    }
    write_file(&ctx.out.join("distortion.csv"), &s)?;

    let factors: Vec<String> = nu.decimations().iter().map(usize::to_string).collect();
    println!("merged {} channels into {} (decimation {})", plan.channels(), nu.channels(), factors.join(","));
    Ok(())
}

/// Peak-hold resampling of an FFT magnitude onto `points` bins over [-pi, pi).
fn spectrum_csv(mag: &[f64], points: usize) -> String {
    let k = mag.len();
    let peak = mag.iter().cloned().fold(0.0, f64::max);
    let mut cells = vec![0.0f64; points];
    for (b, &v) in mag.iter().enumerate() {
        // Bin b is at 2 pi b / k; shift to [-pi, pi).
        let shifted = (b + k / 2) % k;
        let c = shifted * points / k;
        cells[c] = cells[c].max(v);
    }
    let mut s = String::from("omega,magnitude_db\n");
    for (c, v) in cells.iter().enumerate() {
        let w = -PI + 2.0 * PI * c as f64 / points as f64;
        let level = if *v > 0.0 && peak > 0.0 { db(v / peak) } else { -300.0 };
        let _ = writeln!(s, "{w:.11e},{level:.11e}");
    }
    s
}

struct Signals {
    input: SignalBuffer,
    /// Start and length of the stretch used for spectra.
    window: (usize, usize),
    sample_rate: Option<u32>,
}

fn probe_signal(system: &dyn RoundTrip, tones: &[f64]) -> CliResult<Signals> {
    if tones.is_empty() {
        return Err(CliError::Validation("probe list is empty".into()));
    }
    let m = system.source_channels();
    let settle = 2 * system.nominal_delay() + 2 * m;
    let seg = PROBE_SEGMENT.max(64 * m * system.widest_group());
    let amp = 1.0 / tones.len() as f64;
    let x: Vec<f64> = (0..settle + seg).map(|t| tones.iter().map(|w| amp * (w * t as f64).cos()).sum()).collect();
    Ok(Signals { input: SignalBuffer::from_real(&x, 0)?, window: (settle, seg), sample_rate: None })
}

fn wav_signal(path: &Path) -> CliResult<Signals> {
    let audio = wav::read(path)?;
    let input = SignalBuffer::from_real(&audio.samples, 0)?;
    if input.energy() == 0.0 {
        return Err(CliError::Validation(format!("{}: input has zero energy (silent file)", path.display())));
    }
    let seg = audio.samples.len().min(WAV_SPECTRUM_MAX);
    Ok(Signals { input, window: (0, seg), sample_rate: Some(audio.sample_rate) })
}

fn max_phase_deviation(filters: impl Iterator<Item = Vec<Complex64>>) -> CliResult<f64> {
    let mut worst = 0.0f64;
    for f in filters {
        worst = worst.max(phase_linearity(&f)?);
    }
    Ok(worst)
}

pub fn simulate(ctx: &Context) -> CliResult<()> {
    let cfg = &ctx.config;
    let bank = load_bank(ctx)?;
    let merged = cfg.plan.as_ref().map(|p| build_merged(ctx, &bank, p)).transpose()?;
    let system: &dyn RoundTrip = match &merged {
        Some(nu) => nu,
        None => &bank,
    };
    let m = cfg.channels;
    let probes = cfg.probe.as_ref().map(|p| p.frequencies(m));
    let signals = match (&probes, &cfg.input) {
        (Some(tones), None) => probe_signal(system, tones)?,
        (None, Some(path)) => wav_signal(path)?,
        _ => return Err(CliError::Validation("simulate needs exactly one of probe or input".into())),
    };

    let y = system.round_trip(&signals.input)?;
    let delay = system.nominal_delay();
    let (start, seg) = signals.window;
    ensure_dir(&ctx.out)?;
    let xin = windowed_spectrum(signals.input.samples(), start, seg);
    let xout = windowed_spectrum(y.samples(), start + if signals.sample_rate.is_some() { delay } else { 0 }, seg);
    write_file(&ctx.out.join("input_spectrum.csv"), &spectrum_csv(&xin, ctx.grid))?;
    write_file(&ctx.out.join("output_spectrum.csv"), &spectrum_csv(&xout, ctx.grid))?;

    let alias_tones = probes.unwrap_or_else(|| Probe::Sweep.frequencies(m));
    let alias = alias_probe(system, &alias_tones)?;
    let snr = reconstruction_snr(system, &signals.input)?;
    let band = uniform_grid(0.05 * PI, 0.95 * PI, ctx.grid);
    let (distortion, flatness, phase) = match &merged {
        None => (
            distortion_uniform(&bank, &band)?,
            flatness_deviation(bank.prototype(), m, &flatness_grid(m, ctx.grid))?,
            max_phase_deviation((0..m).flat_map(|k| [bank.analysis(k).to_vec(), bank.synthesis(k).to_vec()]))?,
        ),
        Some(nu) => {
            let grid = uniform_grid(-PI, PI, ctx.grid);
            let mut flat = 0.0f64;
            for i in 0..nu.channels() {
                flat = flat.max(merged_flatness(nu, i, &grid)?.max_deviation);
            }
            (
                distortion_nonuniform(nu, &band)?.diagonal,
                flat,
                max_phase_deviation(
                    (0..nu.channels()).flat_map(|i| [nu.analysis(i).to_vec(), nu.synthesis(i).to_vec()]),
                )?,
            )
        }
    };
    let report = BankReport {
        distortion_peak_to_peak_db: distortion.peak_to_peak_db(0.0, PI).unwrap_or(0.0),
        max_flatness_deviation: flatness,
        worst_alias_level_db: alias.worst_db,
        reconstruction_snr_db: snr,
        max_group_delay_deviation_samples: phase,
    };
    write_file(&ctx.out.join("report.csv"), &report.to_csv())?;

    if let Some(rate) = signals.sample_rate {
        let out: Vec<f64> =
            (0..signals.input.len()).map(|t| y.samples().get(t + delay).map_or(0.0, |v| v.re)).collect();
        wav::write(&ctx.out.join("output.wav"), rate, &out)?;
    }
    println!(
        "round trip: SNR {:.2} dB, worst alias {:.1} dB, distortion {:.4} dB peak-to-peak",
        report.reconstruction_snr_db, report.worst_alias_level_db, report.distortion_peak_to_peak_db
    );
    Ok(())
}

pub fn sweep(channels: &[usize], out: Option<&Path>) -> CliResult<()> {
    if channels.is_empty() {
        return Err(CliError::Validation("no channel counts given".into()));
    }
    for &m in channels {
        if m % 2 != 0 || !(4..=16).contains(&m) {
            return Err(CliError::Validation(format!("M={m}: sweep needs even M in 4..=16")));
        }
    }
    let mut s = String::from("m,predicted,empirical,worst_pair_db,worst_excluding_predicted_db\n");
    for &m in channels {
        let a = predict_alias_channel(m)?;
        let bank = modulate(&adjust_edges_3db(&sweep_spec(m)?, m)?, m)?;
        let sw = pair_alias_sweep(&bank)?;
        let empirical = sw.empirical_channel().map_or("none".to_string(), |c| c.to_string());
        let worst = sw.worst_pair().and_then(|p| sw.pair_levels[p]);
        let fmt = |v: Option<f64>| v.map_or("none".to_string(), |v| format!("{v:.11e}"));
        let _ = writeln!(s, "{m},{a},{empirical},{},{}", fmt(worst), fmt(sw.worst_excluding(a)));
    }
    print!("{s}");
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_file(&dir.join("sweep.csv"), &s)?;
    }
    Ok(())
}

pub fn enumerate(m: usize, max: usize, out: Option<&Path>) -> CliResult<()> {
    let plans = enumerate_valid_plans(m, max)?;
    let mut s = String::new();
    for p in &plans {
        let _ = writeln!(s, "{}", p.to_text());
    }
    print!("{s}");
    if let Some(dir) = out {
        ensure_dir(dir)?;
        write_file(&dir.join("plans.txt"), &s)?;
    }
    Ok(())
}
